//! Snapshot serialization: GeoJSON per window, one SVG per run.
//!
//! Output must be byte-identical across runs and platforms, so JSON is
//! written by hand with a fixed key order and a fixed float format
//! (shortest string within 9 decimal places) instead of going through a
//! serializer with its own ideas.

mod geojson;
mod svg;

pub use geojson::{emit_geojson, model_label};
pub use svg::emit_svg;

/// Shortest decimal representation with at most 9 fractional digits.
/// Negative zero and values rounding to it collapse to "0".
pub(crate) fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v:.9}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}
