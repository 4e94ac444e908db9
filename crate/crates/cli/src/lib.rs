//! Command-line pipeline: telemetry CSVs in, GeoJSON/SVG snapshots and a
//! run manifest out.
//!
//! Exit codes: 0 success, 1 configuration error (bad flags or values),
//! 2 I/O error (unreadable input, unwritable output). All inputs are loaded
//! and validated before the first output file is created, so a failed run
//! leaves no partial results.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use stockpile_core::clustering::DbscanParams;
use stockpile_core::emit::{emit_geojson, emit_svg, model_label};
use stockpile_core::events::{
    filter_stationary_dumps, load_csv, EventKind, EventStream, LoadError, RejectedRow, WindowSpec,
};
use stockpile_core::geometry::AlphaParam;
use stockpile_core::synth;
use stockpile_core::tracker::{
    defaults, run_algorithm1, run_algorithm2, Algorithm1Mode, Algorithm2Streams, PolygonModel,
    Snapshot, TrackerConfig,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "stockpile", version, about = "Track in-pit stockpile geometry from telemetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tracking pipeline over telemetry CSVs.
    Track(TrackArgs),
    /// Generate synthetic telemetry scenarios as CSVs.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Dump,
    Reclaim,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Convex,
    Alpha,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Geojson,
    Svg,
    Both,
}

#[derive(clap::Args)]
pub struct TrackArgs {
    /// Pipeline: 1 = independent windowed snapshots, 2 = persistent dump
    /// ledger with reclaim removal.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value_t = 1)]
    algorithm: u8,

    /// Event family for algorithm 1 (ignored by algorithm 2).
    #[arg(long, value_enum, default_value_t = Mode::Dump)]
    mode: Mode,

    /// Truck GPS telemetry CSV.
    #[arg(long)]
    dumps: Option<PathBuf>,

    /// Bucket reclaim position CSV.
    #[arg(long)]
    buckets: Option<PathBuf>,

    /// Digger GPS telemetry CSV (reclaim fallback).
    #[arg(long)]
    diggers: Option<PathBuf>,

    /// Polygon model wrapped around each cluster.
    #[arg(long, value_enum, default_value_t = ModelKind::Convex)]
    model: ModelKind,

    /// Alpha edge-length threshold in meters; required with --model alpha.
    #[arg(long)]
    alpha: Option<f64>,

    /// DBSCAN neighborhood radius in meters.
    #[arg(long, default_value_t = defaults::EPS_M)]
    eps: f64,

    /// DBSCAN core-point threshold (a point counts itself).
    #[arg(long, default_value_t = defaults::MIN_PTS)]
    min_pts: usize,

    /// Window length in hours, fractional allowed. Defaults: 2 for dump
    /// snapshots, 0.5 for reclaim snapshots, 24 for the ledger.
    #[arg(long)]
    window_hours: Option<f64>,

    /// ISO 8601 start of the first window; defaults to the earliest event.
    #[arg(long)]
    start: Option<String>,

    /// ISO 8601 end of the run (exclusive); defaults to just past the
    /// latest event.
    #[arg(long)]
    end: Option<String>,

    /// DX,DY in meters added to digger positions before reclaim use.
    #[arg(long, default_value = "0,0")]
    digger_offset: String,

    /// Trucks moving faster than this (m/s) are not dumping.
    #[arg(long, default_value_t = defaults::STATIONARY_SPEED_MPS)]
    stationary_speed: f64,

    /// Never substitute digger GPS for missing bucket data.
    #[arg(long)]
    no_digger_fallback: bool,

    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Geojson)]
    format: Format,

    /// Label echoed as the local_crs member of every GeoJSON document.
    #[arg(long, default_value = "local-grid")]
    crs: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    /// Fifteen 2-hour windows, one fresh dump blob each.
    Progressive,
    /// Two dump days, a bucket reclaim day, a digger reclaim day.
    LedgerDemo,
}

#[derive(clap::Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
}

/// Entry point shared by the binary and the tests. Returns the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Track(args) => cmd_track(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

struct LoadedInput {
    stream: EventStream,
    rejects: Vec<RejectedRow>,
    digest: Option<String>,
}

impl LoadedInput {
    fn absent() -> Self {
        LoadedInput {
            stream: EventStream::new(Vec::new()),
            rejects: Vec::new(),
            digest: None,
        }
    }
}

fn load_input(path: Option<&Path>, kind: EventKind) -> Result<LoadedInput, CliError> {
    let Some(path) = path else {
        return Ok(LoadedInput::absent());
    };
    let loaded = load_csv(path, Some(kind)).map_err(|e| match e {
        LoadError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Io(format!("{}: {other}", path.display())),
    })?;
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    Ok(LoadedInput {
        stream: loaded.stream,
        rejects: loaded.rejects,
        digest: Some(digest),
    })
}

fn parse_timestamp(flag: &str, value: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::Config(format!("--{flag}: not an ISO 8601 timestamp ({e})")))
}

fn parse_offset(value: &str) -> Result<(f64, f64), CliError> {
    let err = || {
        CliError::Config(format!(
            "--digger-offset: expected DX,DY in meters, got `{value}`"
        ))
    };
    let (dx, dy) = value.split_once(',').ok_or_else(err)?;
    let dx: f64 = dx.trim().parse().map_err(|_| err())?;
    let dy: f64 = dy.trim().parse().map_err(|_| err())?;
    if !(dx.is_finite() && dy.is_finite()) {
        return Err(err());
    }
    Ok((dx, dy))
}

pub fn cmd_track(args: &TrackArgs) -> Result<(), CliError> {
    let started = Instant::now();

    // Everything is read and validated before the first write.
    let dumps = load_input(args.dumps.as_deref(), EventKind::TruckGps)?;
    let buckets = load_input(args.buckets.as_deref(), EventKind::BucketReclaim)?;
    let diggers = load_input(args.diggers.as_deref(), EventKind::DiggerGps)?;

    let model = match args.model {
        ModelKind::Convex => PolygonModel::Convex,
        ModelKind::Alpha => {
            let alpha = args.alpha.ok_or_else(|| {
                CliError::Config("--model alpha requires --alpha METERS".to_string())
            })?;
            PolygonModel::Alpha(AlphaParam::finite(alpha).map_err(|_| {
                CliError::Config(format!("--alpha must be > 0 and finite, got {alpha}"))
            })?)
        }
    };

    let dbscan = DbscanParams::new(args.eps, args.min_pts).map_err(|e| {
        CliError::Config(format!("invalid clustering parameters: {e}"))
    })?;

    let window_hours = args.window_hours.unwrap_or(match (args.algorithm, args.mode) {
        (1, Mode::Dump) => defaults::DUMP_WINDOW_HOURS,
        (1, Mode::Reclaim) => defaults::RECLAIM_WINDOW_HOURS,
        _ => defaults::LEDGER_WINDOW_HOURS,
    });
    if !(window_hours.is_finite() && window_hours > 0.0) {
        return Err(CliError::Config(format!(
            "--window-hours must be a positive number of hours, got {window_hours}"
        )));
    }
    let duration = TimeDelta::milliseconds((window_hours * 3_600_000.0).round() as i64);
    if duration <= TimeDelta::zero() {
        return Err(CliError::Config(
            "--window-hours is too small to form a window".to_string(),
        ));
    }

    let filtered_dumps = filter_stationary_dumps(&dumps.stream, args.stationary_speed);

    let range = [&filtered_dumps, &buckets.stream, &diggers.stream]
        .iter()
        .filter_map(|s| s.time_range())
        .fold(None::<(DateTime<Utc>, DateTime<Utc>)>, |acc, (lo, hi)| {
            Some(match acc {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            })
        });
    let start = match &args.start {
        Some(s) => parse_timestamp("start", s)?,
        None => {
            range
                .ok_or_else(|| {
                    CliError::Config(
                        "no input events to infer a time range from; pass --start and --end"
                            .to_string(),
                    )
                })?
                .0
        }
    };
    let end = match &args.end {
        Some(s) => parse_timestamp("end", s)?,
        None => {
            range
                .ok_or_else(|| {
                    CliError::Config(
                        "no input events to infer a time range from; pass --start and --end"
                            .to_string(),
                    )
                })?
                .1
                + TimeDelta::milliseconds(1)
        }
    };

    let window = WindowSpec::new(start, duration, end)
        .map_err(|e| CliError::Config(format!("invalid window layout: {e}")))?;

    let mut cfg = TrackerConfig::new(window, model, dbscan.clone(), dbscan);
    cfg.digger_offset = parse_offset(&args.digger_offset)?;
    cfg.stationary_speed = args.stationary_speed;
    cfg.digger_fallback = !args.no_digger_fallback;
    cfg.validate()
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;

    let snapshots = match args.algorithm {
        1 => {
            let (stream, mode) = match args.mode {
                Mode::Dump => (&filtered_dumps, Algorithm1Mode::DumpOnly),
                Mode::Reclaim => (&buckets.stream, Algorithm1Mode::ReclaimOnly),
            };
            run_algorithm1(stream, &cfg, mode)
        }
        _ => run_algorithm2(
            Algorithm2Streams {
                dumps: &filtered_dumps,
                buckets: &buckets.stream,
                diggers: &diggers.stream,
            },
            &cfg,
        )
        .map(|(snaps, _ledger)| snaps),
    }
    .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;

    write_outputs(args, &cfg, &snapshots, [&dumps, &buckets, &diggers], started)
}

fn write_outputs(
    args: &TrackArgs,
    cfg: &TrackerConfig,
    snapshots: &[Snapshot],
    inputs: [&LoadedInput; 3],
    started: Instant,
) -> Result<(), CliError> {
    let out = &args.out;
    let io_err = |path: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;

    let label = model_label(&cfg.model);
    if args.format != Format::Svg {
        for snap in snapshots {
            let path = out.join(format!("snapshot_{:05}.geojson", snap.window.index));
            std::fs::write(&path, emit_geojson(snap, &args.crs, &label))
                .map_err(|e| io_err(&path, e))?;
        }
    }
    if args.format != Format::Geojson {
        let path = out.join("run.svg");
        std::fs::write(&path, emit_svg(snapshots)).map_err(|e| io_err(&path, e))?;
    }

    let [dumps, buckets, diggers] = inputs;
    for (name, input) in [("dumps", dumps), ("buckets", buckets), ("diggers", diggers)] {
        if input.rejects.is_empty() {
            continue;
        }
        let path = out.join(format!("rejects_{name}.csv"));
        let mut body = String::from("line,reason\n");
        for r in &input.rejects {
            body.push_str(&format!("{},\"{}\"\n", r.line, r.reason.replace('"', "\"\"")));
        }
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        eprintln!(
            "warning: {} malformed rows in the {name} input, see {}",
            input.rejects.len(),
            path.display()
        );
    }

    let manifest = render_manifest(args, cfg, snapshots, inputs, started);
    let path = out.join("manifest.txt");
    std::fs::write(&path, manifest).map_err(|e| io_err(&path, e))?;

    println!(
        "wrote {} snapshot(s) to {}",
        snapshots.len(),
        out.display()
    );
    Ok(())
}

fn render_manifest(
    args: &TrackArgs,
    cfg: &TrackerConfig,
    snapshots: &[Snapshot],
    inputs: [&LoadedInput; 3],
    started: Instant,
) -> String {
    let [dumps, buckets, diggers] = inputs;
    let mut m = String::new();
    let mut line = |k: &str, v: String| {
        m.push_str(k);
        m.push_str(": ");
        m.push_str(&v);
        m.push('\n');
    };

    line("algorithm", args.algorithm.to_string());
    line(
        "mode",
        match (args.algorithm, args.mode) {
            (1, Mode::Dump) => "dump".to_string(),
            (1, Mode::Reclaim) => "reclaim".to_string(),
            _ => "-".to_string(),
        },
    );
    line("model", model_label(&cfg.model));
    line("eps_m", cfg.dump_dbscan.eps().to_string());
    line("min_pts", cfg.dump_dbscan.min_pts().to_string());
    let hours = cfg.window.duration().num_milliseconds() as f64 / 3_600_000.0;
    line("window_hours", hours.to_string());
    line(
        "start",
        cfg.window.start().to_rfc3339_opts(SecondsFormat::Millis, true),
    );
    line(
        "end",
        cfg.window.stop().to_rfc3339_opts(SecondsFormat::Millis, true),
    );
    line(
        "digger_offset",
        format!("{},{}", cfg.digger_offset.0, cfg.digger_offset.1),
    );
    line("stationary_speed_mps", cfg.stationary_speed.to_string());
    line("digger_fallback", cfg.digger_fallback.to_string());
    line("crs", args.crs.clone());
    line(
        "format",
        match args.format {
            Format::Geojson => "geojson",
            Format::Svg => "svg",
            Format::Both => "both",
        }
        .to_string(),
    );
    for (name, input) in [("dumps", dumps), ("buckets", buckets), ("diggers", diggers)] {
        line(
            &format!("sha256_{name}"),
            input.digest.clone().unwrap_or_else(|| "-".to_string()),
        );
    }
    for (name, input) in [("dumps", dumps), ("buckets", buckets), ("diggers", diggers)] {
        line(&format!("rejects_{name}"), input.rejects.len().to_string());
    }
    line("windows", snapshots.len().to_string());
    let mut features_total = 0usize;
    for snap in snapshots {
        features_total += snap.dump_features.len() + snap.reclaim_features.len();
        line(
            &format!("window_{:05}", snap.window.index),
            format!(
                "dumps={} reclaims={} degenerate={} removed={}",
                snap.dump_features.len(),
                snap.reclaim_features.len(),
                snap.degenerate_clusters,
                snap.removed_this_window,
            ),
        );
    }
    line("features_total", features_total.to_string());
    line("duration_ms", started.elapsed().as_millis().to_string());
    m
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let io_err = |path: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let mut written = Vec::new();
    match args.scenario {
        Scenario::Progressive => {
            let path = args.out.join("dumps.csv");
            synth::write_csv(&path, &synth::progressive_dump_records(args.seed))
                .map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
        Scenario::LedgerDemo => {
            let (dumps, buckets, diggers) = synth::ledger_demo_records(args.seed);
            for (name, records) in [
                ("dumps.csv", &dumps),
                ("buckets.csv", &buckets),
                ("diggers.csv", &diggers),
            ] {
                let path = args.out.join(name);
                synth::write_csv(&path, records).map_err(|e| io_err(&path, e))?;
                written.push(path);
            }
        }
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
