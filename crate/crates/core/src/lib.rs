//! Reconstruction of time-varying stockpile geometry from fleet telemetry.
//!
//! Haul trucks report GPS positions while dumping; loaders report bucket
//! positions (or plain machine GPS) while reclaiming. This crate turns
//! those event streams into per-window polygons: events are clustered
//! with DBSCAN, clusters are wrapped with a convex hull or an alpha
//! shape, and a point-level dump ledger lets reclaim polygons carve
//! material back out over time.
//!
//! Modules, bottom to top:
//! * [`geometry`]: hulls, Delaunay, alpha shapes, containment, areas.
//! * [`clustering`]: deterministic DBSCAN.
//! * [`events`]: CSV ingestion, stationarity filtering, time windows.
//! * [`tracker`]: the windowed and ledger-based reconstruction passes.
//! * [`emit`]: GeoJSON and SVG serialization of snapshots.
//! * [`synth`]: seeded scenario generators for demos and tests.

pub mod clustering;
pub mod emit;
pub mod events;
pub mod geometry;
pub mod synth;
pub mod tracker;
