//! Seeded synthetic telemetry for demos and verification.
//!
//! Real fleet data is proprietary, so everything observable is exercised
//! against generated scenarios: progressive dump campaigns, reclaim
//! passes, and a C-shaped point set whose concavity separates the alpha
//! shape from the convex hull. All generators are deterministic in the
//! seed.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::events::{EventKind, TelemetryRecord};
use crate::geometry::Point2;

/// All scenarios start at the same instant; mirrors a mid-2019 campaign.
pub fn base_time() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2019-06-01T00:00:00Z")
        .unwrap()
        .with_timezone(&Utc)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Isotropic Gaussian scatter around a center.
pub fn gaussian_blob(rng: &mut impl Rng, center: Point2, sigma: f64, n: usize) -> Vec<Point2> {
    let normal = Normal::new(0.0, sigma).unwrap();
    (0..n)
        .map(|_| {
            Point2::new(
                center.x + normal.sample(rng),
                center.y + normal.sample(rng),
            )
        })
        .collect()
}

/// Uniform scatter over the square [lo, hi]^2.
pub fn uniform_points(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect()
}

/// A three-quarter annulus (a thick "C"): radius `r_mid`, band width
/// `width`, opening one quarter of the circle. The convex hull spans the
/// opening while a suitable alpha shape follows the band, which is what
/// makes the two areas diverge.
pub fn c_shape_points(rng: &mut impl Rng, center: Point2, r_mid: f64, width: f64, n: usize) -> Vec<Point2> {
    let arc = 1.5 * std::f64::consts::PI;
    (0..n)
        .map(|_| {
            let theta = rng.random_range(0.0..arc);
            let r = rng.random_range((r_mid - width / 2.0)..(r_mid + width / 2.0));
            Point2::new(center.x + r * theta.cos(), center.y + r * theta.sin())
        })
        .collect()
}

fn truck_record(t: DateTime<Utc>, id: usize, p: Point2) -> TelemetryRecord {
    TelemetryRecord {
        timestamp: t,
        equipment_id: format!("DT{:02}", id),
        kind: EventKind::TruckGps,
        position: p,
        speed_mps: Some(0.0),
    }
}

fn bucket_record(t: DateTime<Utc>, id: usize, p: Point2) -> TelemetryRecord {
    TelemetryRecord {
        timestamp: t,
        equipment_id: format!("WL{:02}", id),
        kind: EventKind::BucketReclaim,
        position: p,
        speed_mps: None,
    }
}

fn digger_record(t: DateTime<Utc>, id: usize, p: Point2) -> TelemetryRecord {
    TelemetryRecord {
        timestamp: t,
        equipment_id: format!("WL{:02}", id),
        kind: EventKind::DiggerGps,
        position: p,
        speed_mps: None,
    }
}

/// Fifteen 2-hour windows, one fresh dump blob each, marching east along
/// the crest of a pile near grid (12000, 4000). Feed to the windowed
/// dump-only pass to watch the footprint grow window by window.
pub fn progressive_dump_records(seed: u64) -> Vec<TelemetryRecord> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for w in 0..15 {
        let t_window = base_time() + TimeDelta::hours(2 * w as i64);
        let center = Point2::new(12_000.0 + 9.0 * w as f64, 4_000.0 + 2.0 * ((w % 3) as f64));
        for (i, p) in gaussian_blob(&mut rng, center, 2.0, 30).into_iter().enumerate() {
            let t = t_window + TimeDelta::seconds((i as i64 * 211) % 7000);
            out.push(truck_record(t, i % 5, p));
        }
    }
    out
}

/// Four 24-hour windows for the ledger algorithm: two dump days, then a
/// bucket reclaim over the first pile, then a digger-GPS pass over the
/// second. Returns (dumps, buckets, diggers).
pub fn ledger_demo_records(
    seed: u64,
) -> (
    Vec<TelemetryRecord>,
    Vec<TelemetryRecord>,
    Vec<TelemetryRecord>,
) {
    let mut rng = rng(seed);
    let day = |d: i64| base_time() + TimeDelta::hours(24 * d);
    let pile_a = Point2::new(12_000.0, 4_000.0);
    let pile_b = Point2::new(12_060.0, 4_010.0);

    let mut dumps = Vec::new();
    for (i, p) in gaussian_blob(&mut rng, pile_a, 3.0, 40).into_iter().enumerate() {
        dumps.push(truck_record(day(0) + TimeDelta::minutes(i as i64 * 7), i % 4, p));
    }
    for (i, p) in gaussian_blob(&mut rng, pile_b, 3.0, 40).into_iter().enumerate() {
        dumps.push(truck_record(day(1) + TimeDelta::minutes(i as i64 * 7), i % 4, p));
    }

    // Reclaim rings: generous circles around each pile so every dump point
    // classifies inside.
    let ring = |c: Point2, r: f64, t: DateTime<Utc>, f: fn(DateTime<Utc>, usize, Point2) -> TelemetryRecord| {
        (0..16)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 16.0;
                f(
                    t + TimeDelta::minutes(k as i64 * 11),
                    0,
                    Point2::new(c.x + r * th.cos(), c.y + r * th.sin()),
                )
            })
            .collect::<Vec<_>>()
    };
    let buckets = ring(pile_a, 16.0, day(2), bucket_record);
    let diggers = ring(pile_b, 16.0, day(3), digger_record);

    (dumps, buckets, diggers)
}

/// Write records as a telemetry CSV in the interchange layout.
pub fn write_csv(path: &Path, records: &[TelemetryRecord]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "timestamp,equipment_id,kind,x,y,speed_mps")?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            r.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            r.equipment_id,
            r.kind.as_str(),
            r.position.x,
            r.position.y,
            r.speed_mps.map(|v| v.to_string()).unwrap_or_default(),
        )?;
    }
    f.flush()
}
