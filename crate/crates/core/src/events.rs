//! Telemetry ingestion, stationary-dump filtering, and time windowing.
//!
//! Input is CSV with header `timestamp,equipment_id,kind,x,y,speed_mps`.
//! Timestamps are ISO 8601 with offset and are normalized to UTC.
//! Malformed rows never abort a load: they are collected into a rejects
//! report alongside the parsed stream.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read telemetry file: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("window duration must be positive")]
    BadDuration,
    #[error("stop timestamp precedes start")]
    StopBeforeStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    TruckGps,
    BucketReclaim,
    DiggerGps,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::TruckGps => "truck_gps",
            EventKind::BucketReclaim => "bucket_reclaim",
            EventKind::DiggerGps => "digger_gps",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        match s {
            "truck_gps" => Some(EventKind::TruckGps),
            "bucket_reclaim" => Some(EventKind::BucketReclaim),
            "digger_gps" => Some(EventKind::DiggerGps),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub timestamp: DateTime<Utc>,
    pub equipment_id: String,
    pub kind: EventKind,
    pub position: Point2,
    /// Present on truck GPS pings when the fleet system reports it.
    pub speed_mps: Option<f64>,
}

/// Records sorted by timestamp; ties keep their original relative order,
/// so construction is idempotent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStream {
    records: Vec<TelemetryRecord>,
}

impl EventStream {
    pub fn new(mut records: Vec<TelemetryRecord>) -> Self {
        records.sort_by_key(|r| r.timestamp);
        EventStream { records }
    }

    pub fn records(&self) -> &[TelemetryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Timestamp span as (earliest, latest), when non-empty.
    pub fn time_range(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => Some((a.timestamp, b.timestamp)),
            _ => None,
        }
    }
}

/// Tiling of the event horizon `[start, stop)` into windows of `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    start: DateTime<Utc>,
    duration: TimeDelta,
    stop: DateTime<Utc>,
}

impl WindowSpec {
    pub fn new(
        start: DateTime<Utc>,
        duration: TimeDelta,
        stop: DateTime<Utc>,
    ) -> Result<Self, WindowError> {
        if duration <= TimeDelta::zero() {
            return Err(WindowError::BadDuration);
        }
        if stop < start {
            return Err(WindowError::StopBeforeStart);
        }
        Ok(WindowSpec {
            start,
            duration,
            stop,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn duration(&self) -> TimeDelta {
        self.duration
    }

    pub fn stop(&self) -> DateTime<Utc> {
        self.stop
    }

    /// The windows, in order. They partition `[start, stop)` exactly: when
    /// the horizon is not a whole number of durations, the final window is
    /// truncated at the stop timestamp so no record past it is ever picked
    /// up and none before it is missed.
    pub fn windows(&self) -> Vec<Window> {
        let mut out = Vec::new();
        let mut cursor = self.start;
        let mut index = 0;
        while cursor < self.stop {
            let end = (cursor + self.duration).min(self.stop);
            out.push(Window {
                index,
                start: cursor,
                end,
            });
            cursor = end;
            index += 1;
        }
        out
    }
}

/// One half-open slice `[start, end)` of the event horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub index: usize,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

/// Records with `window.start <= timestamp < window.end`.
pub fn slice_window<'a>(stream: &'a EventStream, window: &Window) -> &'a [TelemetryRecord] {
    let records = stream.records();
    let lo = records.partition_point(|r| r.timestamp < window.start);
    let hi = records.partition_point(|r| r.timestamp < window.end);
    &records[lo..hi]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug)]
pub struct LoadResult {
    pub stream: EventStream,
    pub rejects: Vec<RejectedRow>,
}

/// Load a telemetry CSV. When `expected_kind` is given, rows of any other
/// kind are rejected; that guards against pointing a dump pipeline at a
/// reclaim file. Malformed rows (bad timestamp, bad numbers, unknown kind,
/// short rows) land in the rejects report with their line number.
pub fn load_csv(path: &Path, expected_kind: Option<EventKind>) -> Result<LoadResult, LoadError> {
    let file = File::open(path)?;
    parse_csv(BufReader::new(file), expected_kind)
}

fn parse_csv<R: Read>(
    reader: R,
    expected_kind: Option<EventKind>,
) -> Result<LoadResult, LoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers().map_err(csv_io_error)?.clone();
    let col = |name: &'static str| -> Result<usize, LoadError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(LoadError::MissingColumn(name))
    };
    let c_ts = col("timestamp")?;
    let c_eq = col("equipment_id")?;
    let c_kind = col("kind")?;
    let c_x = col("x")?;
    let c_y = col("y")?;
    let c_speed = col("speed_mps")?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (row_idx, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_io_error)?;
        let line = row
            .position()
            .map(|p| p.line())
            .unwrap_or(row_idx as u64 + 2);
        match parse_row(&row, c_ts, c_eq, c_kind, c_x, c_y, c_speed, expected_kind) {
            Ok(rec) => records.push(rec),
            Err(reason) => rejects.push(RejectedRow { line, reason }),
        }
    }

    Ok(LoadResult {
        stream: EventStream::new(records),
        rejects,
    })
}

// The csv crate wraps I/O failures; surface those as LoadError::Io and let
// anything row-shaped fall through to the per-row reject path instead.
fn csv_io_error(e: csv::Error) -> LoadError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LoadError::Io(io),
        other => LoadError::Io(std::io::Error::other(format!("csv error: {other:?}"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn parse_row(
    row: &csv::StringRecord,
    c_ts: usize,
    c_eq: usize,
    c_kind: usize,
    c_x: usize,
    c_y: usize,
    c_speed: usize,
    expected_kind: Option<EventKind>,
) -> Result<TelemetryRecord, String> {
    let field = |i: usize, name: &str| -> Result<&str, String> {
        row.get(i).ok_or_else(|| format!("missing field `{name}`"))
    };

    let ts_raw = field(c_ts, "timestamp")?.trim();
    let timestamp = DateTime::parse_from_rfc3339(ts_raw)
        .map_err(|_| format!("unparseable timestamp `{ts_raw}`"))?
        .with_timezone(&Utc);

    let equipment_id = field(c_eq, "equipment_id")?.trim().to_string();
    if equipment_id.is_empty() {
        return Err("empty equipment_id".to_string());
    }

    let kind_raw = field(c_kind, "kind")?.trim();
    let kind =
        EventKind::parse(kind_raw).ok_or_else(|| format!("unknown kind `{kind_raw}`"))?;
    if let Some(expected) = expected_kind {
        if kind != expected {
            return Err(format!(
                "kind `{}` where `{}` was expected",
                kind.as_str(),
                expected.as_str()
            ));
        }
    }

    let parse_coord = |i: usize, name: &str| -> Result<f64, String> {
        let raw = field(i, name)?.trim();
        let v: f64 = raw
            .parse()
            .map_err(|_| format!("non-numeric {name} `{raw}`"))?;
        if !v.is_finite() {
            return Err(format!("non-finite {name} `{raw}`"));
        }
        Ok(v)
    };
    let x = parse_coord(c_x, "x")?;
    let y = parse_coord(c_y, "y")?;

    let speed_raw = row.get(c_speed).unwrap_or("").trim();
    let speed_mps = if speed_raw.is_empty() {
        None
    } else {
        let v: f64 = speed_raw
            .parse()
            .map_err(|_| format!("non-numeric speed_mps `{speed_raw}`"))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!("invalid speed_mps `{speed_raw}`"));
        }
        Some(v)
    };

    Ok(TelemetryRecord {
        timestamp,
        equipment_id,
        kind,
        position: Point2::new(x, y),
        speed_mps,
    })
}

/// Keep only truck pings that represent a parked truck.
///
/// A record with a reported speed stays when `speed <= threshold`. A
/// record without one falls back to positional stillness: it stays when
/// the most recent retained record of the same equipment within 10 s sits
/// within 1 m, or when there is no retained record that recent (nothing to
/// measure drift against). Comparing against the retained chain rather
/// than the raw predecessor makes the filter idempotent: running it twice
/// leaves the first pass's output unchanged.
pub fn filter_stationary_dumps(stream: &EventStream, speed_threshold: f64) -> EventStream {
    const STILL_WINDOW: TimeDelta = TimeDelta::seconds(10);
    const STILL_RADIUS_M: f64 = 1.0;

    let mut kept: Vec<TelemetryRecord> = Vec::with_capacity(stream.len());
    // Last retained record index per equipment, into `kept`.
    let mut last_kept: std::collections::HashMap<String, usize> = std::collections::HashMap::new();

    for rec in stream.records() {
        let retain = match rec.speed_mps {
            Some(v) => v <= speed_threshold,
            None => match last_kept.get(rec.equipment_id.as_str()) {
                Some(&k) => {
                    let prev = &kept[k];
                    if rec.timestamp - prev.timestamp <= STILL_WINDOW {
                        rec.position.dist(&prev.position) <= STILL_RADIUS_M
                    } else {
                        true
                    }
                }
                None => true,
            },
        };
        if retain {
            kept.push(rec.clone());
            last_kept.insert(rec.equipment_id.clone(), kept.len() - 1);
        }
    }

    EventStream { records: kept }
}
