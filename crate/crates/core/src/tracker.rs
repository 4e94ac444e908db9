//! The two reconstruction algorithms.
//!
//! A windowed, stateless pass turns each time window's events into
//! independent polygons (dump-only or reclaim-only). The stateful variant
//! threads a dump ledger across windows: truck dumps accumulate as points,
//! reclaim polygons built from bucket positions (or offset digger GPS as a
//! fallback) delete every ledger point they cover, and the surviving
//! points are re-clustered and re-wrapped every window. Persistence is at
//! the point level, so polygon boolean subtraction never happens.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::clustering::{dbscan, ClusterLabel, DbscanParams};
use crate::events::{slice_window, EventStream, TelemetryRecord, Window, WindowSpec};
use crate::geometry::{
    alpha_shape, convex_hull, point_in_polygon, polygon_area, AlphaParam, Containment, Point2,
    Polygon,
};

/// Starting defaults; the search distance is roughly one truck length.
pub mod defaults {
    pub const EPS_M: f64 = 10.0;
    pub const MIN_PTS: usize = 4;
    pub const STATIONARY_SPEED_MPS: f64 = 0.3;
    pub const DUMP_WINDOW_HOURS: f64 = 2.0;
    pub const RECLAIM_WINDOW_HOURS: f64 = 0.5;
    pub const LEDGER_WINDOW_HOURS: f64 = 24.0;
    pub const MIN_POLYGON_POINTS: usize = 3;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("digger offset must be finite")]
    BadOffset,
    #[error("stationary speed threshold must be finite and non-negative")]
    BadStationarySpeed,
    #[error("min_polygon_points must be at least 3")]
    BadMinPolygonPoints,
}

/// How a cluster of points becomes a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolygonModel {
    Convex,
    Alpha(AlphaParam),
}

impl PolygonModel {
    /// Wrap a point set. An empty result means the set was degenerate
    /// (too few distinct points, collinear) or the alpha filter removed
    /// every triangle; callers count those rather than erroring.
    pub fn build(&self, points: &[Point2]) -> Vec<Polygon> {
        match self {
            PolygonModel::Convex => convex_hull(points).map(|p| vec![p]).unwrap_or_default(),
            PolygonModel::Alpha(alpha) => alpha_shape(points, *alpha)
                .map(|mp| mp.into_parts())
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRole {
    Dump,
    Reclaim,
}

impl FeatureRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureRole::Dump => "dump",
            FeatureRole::Reclaim => "reclaim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    Truck,
    Bucket,
    Digger,
}

impl FeatureSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureSource::Truck => "truck",
            FeatureSource::Bucket => "bucket",
            FeatureSource::Digger => "digger",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm1Mode {
    DumpOnly,
    ReclaimOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub window: WindowSpec,
    pub model: PolygonModel,
    pub dump_dbscan: DbscanParams,
    pub reclaim_dbscan: DbscanParams,
    /// Added to digger GPS positions before they are used as reclaim
    /// points; calibrates the machine-to-bucket displacement.
    pub digger_offset: (f64, f64),
    pub stationary_speed: f64,
    /// Clusters with fewer distinct points than this produce no polygon.
    pub min_polygon_points: usize,
    /// When false, digger GPS is never used as a reclaim substitute
    /// (diagnostic mode: shows what the bucket stream alone supports).
    pub digger_fallback: bool,
}

impl TrackerConfig {
    pub fn new(
        window: WindowSpec,
        model: PolygonModel,
        dump_dbscan: DbscanParams,
        reclaim_dbscan: DbscanParams,
    ) -> Self {
        TrackerConfig {
            window,
            model,
            dump_dbscan,
            reclaim_dbscan,
            digger_offset: (0.0, 0.0),
            stationary_speed: defaults::STATIONARY_SPEED_MPS,
            min_polygon_points: defaults::MIN_POLYGON_POINTS,
            digger_fallback: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.digger_offset.0.is_finite() && self.digger_offset.1.is_finite()) {
            return Err(ConfigError::BadOffset);
        }
        if !(self.stationary_speed.is_finite() && self.stationary_speed >= 0.0) {
            return Err(ConfigError::BadStationarySpeed);
        }
        if self.min_polygon_points < 3 {
            return Err(ConfigError::BadMinPolygonPoints);
        }
        Ok(())
    }
}

/// A dump event still standing in the model.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerPoint {
    pub position: Point2,
    pub timestamp: DateTime<Utc>,
    pub window_added: usize,
    /// Cluster id assigned in the window the point arrived; `None` while
    /// unprocessed or when the point was noise that window.
    pub cluster_at_add: Option<usize>,
}

/// Accumulated dump material, point by point. Reclaims only ever remove
/// points; the counters witness that nothing is lost track of.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DumpLedger {
    active: Vec<LedgerPoint>,
    added_total: usize,
    removed_total: usize,
}

impl DumpLedger {
    pub fn new() -> Self {
        DumpLedger::default()
    }

    pub fn active(&self) -> &[LedgerPoint] {
        &self.active
    }

    pub fn added_total(&self) -> usize {
        self.added_total
    }

    pub fn removed_total(&self) -> usize {
        self.removed_total
    }

    /// Every point ever added is either still active or counted removed.
    pub fn is_conserved(&self) -> bool {
        self.added_total == self.active.len() + self.removed_total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonFeature {
    pub polygon: Polygon,
    pub role: FeatureRole,
    pub source: FeatureSource,
    pub window_index: usize,
    /// `None` for reclaim features: reclaim points are wrapped directly,
    /// without clustering.
    pub cluster_id: Option<usize>,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub window: Window,
    pub dump_features: Vec<PolygonFeature>,
    pub reclaim_features: Vec<PolygonFeature>,
    /// Clusters that produced no polygon this window (too few distinct
    /// points, collinear, or alpha-filtered to nothing).
    pub degenerate_clusters: usize,
    pub removed_this_window: usize,
    /// The window had reclaim events but they could not form a polygon;
    /// nothing was removed.
    pub degenerate_reclaim: bool,
}

impl Snapshot {
    fn empty(window: Window) -> Self {
        Snapshot {
            window,
            dump_features: Vec::new(),
            reclaim_features: Vec::new(),
            degenerate_clusters: 0,
            removed_this_window: 0,
            degenerate_reclaim: false,
        }
    }
}

/// Events of one window, already sliced. Dumps are stationary truck GPS,
/// buckets are reclaimer bucket positions, diggers are raw digger GPS.
#[derive(Debug, Clone, Copy)]
pub struct WindowEvents<'a> {
    pub dumps: &'a [TelemetryRecord],
    pub buckets: &'a [TelemetryRecord],
    pub diggers: &'a [TelemetryRecord],
}

/// The three input streams of the ledger-tracking run.
#[derive(Debug, Clone, Copy)]
pub struct Algorithm2Streams<'a> {
    pub dumps: &'a EventStream,
    pub buckets: &'a EventStream,
    pub diggers: &'a EventStream,
}

/// Windowed, stateless polygon extraction: each window's events are
/// clustered and each cluster is wrapped independently. Windows share no
/// state, so snapshots depend only on their own events.
pub fn run_algorithm1(
    stream: &EventStream,
    cfg: &TrackerConfig,
    mode: Algorithm1Mode,
) -> Result<Vec<Snapshot>, ConfigError> {
    cfg.validate()?;
    let (params, role, source) = match mode {
        Algorithm1Mode::DumpOnly => (&cfg.dump_dbscan, FeatureRole::Dump, FeatureSource::Truck),
        Algorithm1Mode::ReclaimOnly => (
            &cfg.reclaim_dbscan,
            FeatureRole::Reclaim,
            FeatureSource::Bucket,
        ),
    };

    let mut snapshots = Vec::new();
    for window in cfg.window.windows() {
        let positions: Vec<Point2> = slice_window(stream, &window)
            .iter()
            .map(|r| r.position)
            .collect();
        let mut snap = Snapshot::empty(window);
        let (features, degenerate, _) =
            clustered_features(&positions, params, cfg, role, source, window.index);
        match role {
            FeatureRole::Dump => snap.dump_features = features,
            FeatureRole::Reclaim => snap.reclaim_features = features,
        }
        snap.degenerate_clusters = degenerate;
        snapshots.push(snap);
    }
    Ok(snapshots)
}

/// One window of the ledger algorithm. New dumps join the ledger; a
/// reclaim polygon (bucket positions, else offset digger positions when
/// the fallback is enabled) removes every active point it covers,
/// boundary contact included; the surviving points are re-clustered and
/// re-wrapped. A window with nothing to act on leaves the ledger alone
/// and yields an empty snapshot.
pub fn step_algorithm2(
    ledger: &mut DumpLedger,
    window: &Window,
    events: WindowEvents<'_>,
    cfg: &TrackerConfig,
) -> Snapshot {
    let use_diggers =
        cfg.digger_fallback && events.buckets.is_empty() && !events.diggers.is_empty();
    let has_activity = !events.dumps.is_empty() || !events.buckets.is_empty() || use_diggers;
    if !has_activity {
        return Snapshot::empty(*window);
    }

    let mut snap = Snapshot::empty(*window);

    for rec in events.dumps {
        ledger.active.push(LedgerPoint {
            position: rec.position,
            timestamp: rec.timestamp,
            window_added: window.index,
            cluster_at_add: None,
        });
        ledger.added_total += 1;
    }

    let reclaim = if !events.buckets.is_empty() {
        Some((
            events.buckets.iter().map(|r| r.position).collect::<Vec<_>>(),
            FeatureSource::Bucket,
        ))
    } else if use_diggers {
        let (dx, dy) = cfg.digger_offset;
        Some((
            events
                .diggers
                .iter()
                .map(|r| Point2::new(r.position.x + dx, r.position.y + dy))
                .collect::<Vec<_>>(),
            FeatureSource::Digger,
        ))
    } else {
        None
    };

    if let Some((positions, source)) = reclaim {
        let parts = cfg.model.build(&positions);
        if parts.is_empty() {
            snap.degenerate_reclaim = true;
        } else {
            let before = ledger.active.len();
            ledger.active.retain(|lp| {
                parts
                    .iter()
                    .all(|poly| point_in_polygon(lp.position, poly) == Containment::Outside)
            });
            let removed = before - ledger.active.len();
            ledger.removed_total += removed;
            snap.removed_this_window = removed;
            snap.reclaim_features = parts
                .into_iter()
                .map(|polygon| {
                    let area_m2 = polygon_area(&polygon);
                    PolygonFeature {
                        polygon,
                        role: FeatureRole::Reclaim,
                        source,
                        window_index: window.index,
                        cluster_id: None,
                        area_m2,
                    }
                })
                .collect();
        }
    }

    let positions: Vec<Point2> = ledger.active.iter().map(|lp| lp.position).collect();
    let (features, degenerate, assignment) = clustered_features(
        &positions,
        &cfg.dump_dbscan,
        cfg,
        FeatureRole::Dump,
        FeatureSource::Truck,
        window.index,
    );
    snap.dump_features = features;
    snap.degenerate_clusters += degenerate;

    for (lp, label) in ledger.active.iter_mut().zip(assignment.labels.iter()) {
        if lp.window_added == window.index {
            lp.cluster_at_add = match label {
                ClusterLabel::Cluster(id) => Some(*id),
                ClusterLabel::Noise => None,
            };
        }
    }

    snap
}

/// Fold [`step_algorithm2`] over the configured windows.
pub fn run_algorithm2(
    streams: Algorithm2Streams<'_>,
    cfg: &TrackerConfig,
) -> Result<(Vec<Snapshot>, DumpLedger), ConfigError> {
    cfg.validate()?;
    let mut ledger = DumpLedger::new();
    let mut snapshots = Vec::new();
    for window in cfg.window.windows() {
        let events = WindowEvents {
            dumps: slice_window(streams.dumps, &window),
            buckets: slice_window(streams.buckets, &window),
            diggers: slice_window(streams.diggers, &window),
        };
        snapshots.push(step_algorithm2(&mut ledger, &window, events, cfg));
    }
    Ok((snapshots, ledger))
}

/// Cluster positions and wrap every viable cluster. Noise points are left
/// out of polygon construction entirely. Returns the features, the count
/// of clusters that produced no polygon, and the raw assignment (callers
/// use it to stamp cluster provenance).
fn clustered_features(
    positions: &[Point2],
    params: &DbscanParams,
    cfg: &TrackerConfig,
    role: FeatureRole,
    source: FeatureSource,
    window_index: usize,
) -> (Vec<PolygonFeature>, usize, crate::clustering::ClusterAssignment) {
    let assignment = dbscan(positions, params);
    let mut features = Vec::new();
    let mut degenerate = 0;
    for (cluster_id, member_idx) in assignment.members().into_iter().enumerate() {
        let pts: Vec<Point2> = member_idx.iter().map(|&i| positions[i]).collect();
        if distinct_count(&pts) < cfg.min_polygon_points {
            degenerate += 1;
            continue;
        }
        let parts = cfg.model.build(&pts);
        if parts.is_empty() {
            degenerate += 1;
            continue;
        }
        for polygon in parts {
            let area_m2 = polygon_area(&polygon);
            features.push(PolygonFeature {
                polygon,
                role,
                source,
                window_index,
                cluster_id: Some(cluster_id),
                area_m2,
            });
        }
    }
    (features, degenerate, assignment)
}

fn distinct_count(pts: &[Point2]) -> usize {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    sorted.dedup();
    sorted.len()
}
