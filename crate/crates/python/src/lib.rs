//! Python bindings for the stockpile tracker.
//!
//! Geometry and clustering take points as `(x, y)` tuples; the tracking
//! entry points take events as `(iso_timestamp, x, y)` tuples and return
//! one dict per window. Rings come back open (first vertex not repeated),
//! counter-clockwise.

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stockpile_core::clustering::{self, ClusterLabel, DbscanParams};
use stockpile_core::events::{EventKind, EventStream, TelemetryRecord, WindowSpec};
use stockpile_core::geometry::{self, AlphaParam, Point2, Polygon, Ring};
use stockpile_core::tracker::{
    self, Algorithm1Mode, Algorithm2Streams, DumpLedger, PolygonModel, Snapshot, TrackerConfig,
};

fn to_points(pairs: &[(f64, f64)]) -> Vec<Point2> {
    pairs.iter().map(|&(x, y)| Point2::new(x, y)).collect()
}

fn ring_out(poly: &Polygon) -> Vec<(f64, f64)> {
    poly.exterior().vertices().iter().map(|p| (p.x, p.y)).collect()
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ring_of(vertices: Vec<(f64, f64)>) -> PyResult<Polygon> {
    Ring::new(to_points(&vertices))
        .map(Polygon::new)
        .map_err(value_err)
}

fn alpha_param(alpha: f64) -> PyResult<AlphaParam> {
    if alpha.is_infinite() && alpha > 0.0 {
        Ok(AlphaParam::Infinite)
    } else {
        AlphaParam::finite(alpha).map_err(value_err)
    }
}

fn model_of(model: &str, alpha: Option<f64>) -> PyResult<PolygonModel> {
    match (model, alpha) {
        ("convex", None) => Ok(PolygonModel::Convex),
        ("convex", Some(_)) => Err(PyValueError::new_err(
            "alpha is only meaningful with model='alpha'",
        )),
        ("alpha", Some(a)) => Ok(PolygonModel::Alpha(alpha_param(a)?)),
        ("alpha", None) => Err(PyValueError::new_err("model='alpha' requires alpha")),
        _ => Err(PyValueError::new_err(format!(
            "unknown model `{model}`; expected 'convex' or 'alpha'"
        ))),
    }
}

fn parse_iso(label: &str, value: &str) -> PyResult<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| PyValueError::new_err(format!("{label}: bad ISO 8601 timestamp ({e})")))
}

fn parse_events(events: &[(String, f64, f64)], kind: EventKind) -> PyResult<EventStream> {
    let mut records = Vec::with_capacity(events.len());
    for (i, (ts, x, y)) in events.iter().enumerate() {
        if !(x.is_finite() && y.is_finite()) {
            return Err(PyValueError::new_err(format!(
                "event {i}: non-finite coordinate ({x}, {y})"
            )));
        }
        records.push(TelemetryRecord {
            timestamp: parse_iso(&format!("event {i}"), ts)?,
            equipment_id: "py".to_string(),
            kind,
            position: Point2::new(*x, *y),
            speed_mps: None,
        });
    }
    Ok(EventStream::new(records))
}

fn window_spec(
    streams: &[&EventStream],
    window_hours: f64,
    start: Option<&str>,
    end: Option<&str>,
) -> PyResult<WindowSpec> {
    if !(window_hours.is_finite() && window_hours > 0.0) {
        return Err(PyValueError::new_err("window_hours must be positive"));
    }
    let range = streams
        .iter()
        .filter_map(|s| s.time_range())
        .reduce(|(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
    let start = match start {
        Some(s) => parse_iso("start", s)?,
        None => match range {
            Some((lo, _)) => lo,
            None => {
                return Err(PyValueError::new_err(
                    "no events to infer a time range from; pass start and end",
                ))
            }
        },
    };
    let end = match end {
        Some(s) => parse_iso("end", s)?,
        None => range.map(|(_, hi)| hi + TimeDelta::milliseconds(1)).unwrap(),
    };
    let duration = TimeDelta::milliseconds((window_hours * 3_600_000.0).round() as i64);
    WindowSpec::new(start, duration, end).map_err(value_err)
}

fn config(
    spec: WindowSpec,
    model: &str,
    alpha: Option<f64>,
    eps: f64,
    min_pts: usize,
) -> PyResult<TrackerConfig> {
    let params = DbscanParams::new(eps, min_pts).map_err(value_err)?;
    Ok(TrackerConfig::new(spec, model_of(model, alpha)?, params, params))
}

fn feature_dicts<'py>(
    py: Python<'py>,
    features: &[tracker::PolygonFeature],
) -> PyResult<Vec<Py<PyDict>>> {
    features
        .iter()
        .map(|f| {
            let d = PyDict::new(py);
            d.set_item("ring", ring_out(&f.polygon))?;
            d.set_item("role", f.role.as_str())?;
            d.set_item("source", f.source.as_str())?;
            d.set_item("cluster", f.cluster_id)?;
            d.set_item("area_m2", geometry::polygon_area(&f.polygon))?;
            Ok(d.unbind())
        })
        .collect()
}

fn snapshot_dict<'py>(py: Python<'py>, s: &Snapshot) -> PyResult<Py<PyDict>> {
    let iso = |t: DateTime<Utc>| t.to_rfc3339_opts(SecondsFormat::Millis, true);
    let d = PyDict::new(py);
    d.set_item("window", s.window.index)?;
    d.set_item("start", iso(s.window.start))?;
    d.set_item("end", iso(s.window.end))?;
    d.set_item("dumps", feature_dicts(py, &s.dump_features)?)?;
    d.set_item("reclaims", feature_dicts(py, &s.reclaim_features)?)?;
    d.set_item("degenerate_clusters", s.degenerate_clusters)?;
    d.set_item("degenerate_reclaim", s.degenerate_reclaim)?;
    d.set_item("removed", s.removed_this_window)?;
    Ok(d.unbind())
}

fn ledger_dict<'py>(py: Python<'py>, ledger: &DumpLedger) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    let active: Vec<(f64, f64)> = ledger
        .active()
        .iter()
        .map(|p| (p.position.x, p.position.y))
        .collect();
    d.set_item("active", active)?;
    d.set_item("added_total", ledger.added_total())?;
    d.set_item("removed_total", ledger.removed_total())?;
    d.set_item("conserved", ledger.is_conserved())?;
    Ok(d.unbind())
}

/// Strict convex hull, counter-clockwise, collinear boundary points dropped.
#[pyfunction]
fn convex_hull(points: Vec<(f64, f64)>) -> PyResult<Vec<(f64, f64)>> {
    geometry::convex_hull(&to_points(&points))
        .map(|p| ring_out(&p))
        .map_err(value_err)
}

/// Alpha shape as a list of open rings; `alpha=None` or `inf` means the
/// unfiltered shape, which equals the convex hull.
#[pyfunction]
#[pyo3(signature = (points, alpha=None))]
fn alpha_shape(points: Vec<(f64, f64)>, alpha: Option<f64>) -> PyResult<Vec<Vec<(f64, f64)>>> {
    let param = match alpha {
        Some(a) => alpha_param(a)?,
        None => AlphaParam::Infinite,
    };
    geometry::alpha_shape(&to_points(&points), param)
        .map(|mp| mp.parts().iter().map(ring_out).collect())
        .map_err(value_err)
}

/// Delaunay triangles as vertex-coordinate triples, all counter-clockwise.
#[pyfunction]
fn delaunay_triangulate(
    points: Vec<(f64, f64)>,
) -> PyResult<Vec<((f64, f64), (f64, f64), (f64, f64))>> {
    geometry::delaunay_triangulate(&to_points(&points))
        .map(|tris| {
            tris.iter()
                .map(|t| {
                    let [a, b, c] = t.vertices();
                    ((a.x, a.y), (b.x, b.y), (c.x, c.y))
                })
                .collect()
        })
        .map_err(value_err)
}

/// Per-point cluster labels (noise is -1) plus the cluster count.
#[pyfunction]
fn dbscan(points: Vec<(f64, f64)>, eps: f64, min_pts: usize) -> PyResult<(Vec<i64>, usize)> {
    let params = DbscanParams::new(eps, min_pts).map_err(value_err)?;
    let assignment = clustering::dbscan(&to_points(&points), &params);
    let labels = assignment
        .labels
        .iter()
        .map(|l| match l {
            ClusterLabel::Cluster(id) => *id as i64,
            ClusterLabel::Noise => -1,
        })
        .collect();
    Ok((labels, assignment.cluster_count))
}

/// Unsigned area of a simple ring given as open vertex list.
#[pyfunction]
fn polygon_area(ring: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(geometry::polygon_area(&ring_of(ring)?))
}

/// 'inside', 'boundary', or 'outside'.
#[pyfunction]
fn point_in_polygon(point: (f64, f64), ring: Vec<(f64, f64)>) -> PyResult<&'static str> {
    let poly = ring_of(ring)?;
    Ok(
        match geometry::point_in_polygon(Point2::new(point.0, point.1), &poly) {
            geometry::Containment::Inside => "inside",
            geometry::Containment::Boundary => "boundary",
            geometry::Containment::Outside => "outside",
        },
    )
}

/// Windowed, stateless polygon extraction over one event stream.
///
/// `events` are `(iso_timestamp, x, y)` tuples; `mode` is 'dump' or
/// 'reclaim'. Returns one dict per window.
#[pyfunction]
#[pyo3(signature = (
    events, *, mode="dump", model="convex", alpha=None,
    eps=10.0, min_pts=4, window_hours=2.0, start=None, end=None,
))]
#[allow(clippy::too_many_arguments)]
fn run_algorithm1(
    py: Python<'_>,
    events: Vec<(String, f64, f64)>,
    mode: &str,
    model: &str,
    alpha: Option<f64>,
    eps: f64,
    min_pts: usize,
    window_hours: f64,
    start: Option<&str>,
    end: Option<&str>,
) -> PyResult<Vec<Py<PyDict>>> {
    let (alg_mode, kind) = match mode {
        "dump" => (Algorithm1Mode::DumpOnly, EventKind::TruckGps),
        "reclaim" => (Algorithm1Mode::ReclaimOnly, EventKind::BucketReclaim),
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown mode `{mode}`; expected 'dump' or 'reclaim'"
            )))
        }
    };
    let stream = parse_events(&events, kind)?;
    let spec = window_spec(&[&stream], window_hours, start, end)?;
    let cfg = config(spec, model, alpha, eps, min_pts)?;
    let snapshots = tracker::run_algorithm1(&stream, &cfg, alg_mode).map_err(value_err)?;
    snapshots.iter().map(|s| snapshot_dict(py, s)).collect()
}

/// Persistent-ledger tracking: dumps accumulate, reclaim polygons remove
/// the points they cover, digger positions stand in for missing bucket
/// data when the fallback is enabled.
///
/// Returns `(snapshots, ledger)`.
#[pyfunction]
#[pyo3(signature = (
    dumps, buckets=Vec::new(), diggers=Vec::new(), *, model="convex", alpha=None,
    eps=10.0, min_pts=4, window_hours=24.0, start=None, end=None,
    digger_offset=(0.0, 0.0), digger_fallback=true,
))]
#[allow(clippy::too_many_arguments)]
fn run_algorithm2(
    py: Python<'_>,
    dumps: Vec<(String, f64, f64)>,
    buckets: Vec<(String, f64, f64)>,
    diggers: Vec<(String, f64, f64)>,
    model: &str,
    alpha: Option<f64>,
    eps: f64,
    min_pts: usize,
    window_hours: f64,
    start: Option<&str>,
    end: Option<&str>,
    digger_offset: (f64, f64),
    digger_fallback: bool,
) -> PyResult<(Vec<Py<PyDict>>, Py<PyDict>)> {
    let dumps = parse_events(&dumps, EventKind::TruckGps)?;
    let buckets = parse_events(&buckets, EventKind::BucketReclaim)?;
    let diggers = parse_events(&diggers, EventKind::DiggerGps)?;
    let spec = window_spec(&[&dumps, &buckets, &diggers], window_hours, start, end)?;
    let mut cfg = config(spec, model, alpha, eps, min_pts)?;
    cfg.digger_offset = digger_offset;
    cfg.digger_fallback = digger_fallback;
    let streams = Algorithm2Streams {
        dumps: &dumps,
        buckets: &buckets,
        diggers: &diggers,
    };
    let (snapshots, ledger) = tracker::run_algorithm2(streams, &cfg).map_err(value_err)?;
    let snaps: PyResult<Vec<Py<PyDict>>> =
        snapshots.iter().map(|s| snapshot_dict(py, s)).collect();
    Ok((snaps?, ledger_dict(py, &ledger)?))
}

#[pymodule]
fn stockpile_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(convex_hull, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_shape, m)?)?;
    m.add_function(wrap_pyfunction!(delaunay_triangulate, m)?)?;
    m.add_function(wrap_pyfunction!(dbscan, m)?)?;
    m.add_function(wrap_pyfunction!(polygon_area, m)?)?;
    m.add_function(wrap_pyfunction!(point_in_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(run_algorithm1, m)?)?;
    m.add_function(wrap_pyfunction!(run_algorithm2, m)?)?;
    Ok(())
}
