//! RFC 7946 FeatureCollection writer.

use super::fmt_f64;
use crate::geometry::AlphaParam;
use crate::tracker::{PolygonFeature, PolygonModel, Snapshot};

/// Stable text form of the polygon model, echoed into feature properties.
pub fn model_label(model: &PolygonModel) -> String {
    match model {
        PolygonModel::Convex => "convex".to_string(),
        PolygonModel::Alpha(AlphaParam::Infinite) => "alpha(infinite)".to_string(),
        PolygonModel::Alpha(AlphaParam::Finite(a)) => format!("alpha({})", fmt_f64(*a)),
    }
}

/// One FeatureCollection per snapshot. Dump features precede reclaim
/// features; rings are closed (first coordinate repeated last) and CCW.
/// Coordinates stay in the local metric grid; the `local_crs` foreign
/// member names it.
pub fn emit_geojson(snapshot: &Snapshot, crs_label: &str, model_label: &str) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str("{\"type\":\"FeatureCollection\",\"local_crs\":");
    push_json_string(&mut out, crs_label);
    out.push_str(",\"features\":[");
    let mut first = true;
    for feature in snapshot
        .dump_features
        .iter()
        .chain(snapshot.reclaim_features.iter())
    {
        if !first {
            out.push(',');
        }
        first = false;
        out.push('\n');
        push_feature(&mut out, snapshot, feature, model_label);
    }
    if !first {
        out.push('\n');
    }
    out.push_str("]}\n");
    out
}

fn push_feature(out: &mut String, snapshot: &Snapshot, f: &PolygonFeature, model_label: &str) {
    out.push_str("{\"type\":\"Feature\",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[");
    let verts = f.polygon.exterior().vertices();
    for v in verts.iter().chain(std::iter::once(&verts[0])) {
        if !out.ends_with("[[") {
            out.push(',');
        }
        out.push('[');
        out.push_str(&fmt_f64(v.x));
        out.push(',');
        out.push_str(&fmt_f64(v.y));
        out.push(']');
    }
    out.push_str("]]},\"properties\":{");
    out.push_str(&format!("\"window_index\":{}", f.window_index));
    out.push_str(",\"t_start\":");
    push_json_string(out, &rfc3339(snapshot.window.start));
    out.push_str(",\"t_end\":");
    push_json_string(out, &rfc3339(snapshot.window.end));
    out.push_str(",\"role\":");
    push_json_string(out, f.role.as_str());
    out.push_str(",\"source\":");
    push_json_string(out, f.source.as_str());
    out.push_str(",\"cluster_id\":");
    match f.cluster_id {
        Some(id) => out.push_str(&id.to_string()),
        None => out.push_str("null"),
    }
    out.push_str(",\"model\":");
    push_json_string(out, model_label);
    out.push_str(",\"area_m2\":");
    out.push_str(&fmt_f64(f.area_m2));
    out.push_str("}}");
}

fn rfc3339(t: chrono::DateTime<chrono::Utc>) -> String {
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}
