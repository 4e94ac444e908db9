//! Single-document SVG overview of a run.
//!
//! All polygons from all snapshots are drawn into one picture. Fill color
//! encodes window age through a ramp whose red channel strictly increases
//! with window index (oldest dark blue, latest warm yellow); dumps are
//! stroked solid, reclaims dashed. A legend maps indices to colors. The
//! y axis is flipped so north stays up.

use super::fmt_f64;
use crate::tracker::{PolygonFeature, Snapshot};

const RAMP_FROM: (u8, u8, u8) = (0x20, 0x38, 0x80);
const RAMP_TO: (u8, u8, u8) = (0xf8, 0xd8, 0x30);

/// Color for window `index` out of `count` windows, as `#rrggbb`.
fn ramp_color(index: usize, count: usize) -> String {
    let t = if count <= 1 {
        1.0
    } else {
        index as f64 / (count - 1) as f64
    };
    let mix = |a: u8, b: u8| -> u8 { (a as f64 + t * (b as f64 - a as f64)).round() as u8 };
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(RAMP_FROM.0, RAMP_TO.0),
        mix(RAMP_FROM.1, RAMP_TO.1),
        mix(RAMP_FROM.2, RAMP_TO.2)
    )
}

/// Render every snapshot's polygons into one SVG document.
pub fn emit_svg(snapshots: &[Snapshot]) -> String {
    let window_count = snapshots.len().max(1);

    // Data bounding box over every vertex; y negated for SVG.
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for f in all_features(snapshots) {
        for v in f.polygon.exterior().vertices() {
            any = true;
            lo.0 = lo.0.min(v.x);
            lo.1 = lo.1.min(-v.y);
            hi.0 = hi.0.max(v.x);
            hi.1 = hi.1.max(-v.y);
        }
    }
    if !any {
        lo = (0.0, 0.0);
        hi = (1.0, 1.0);
    }
    let w = (hi.0 - lo.0).max(1e-6);
    let h = (hi.1 - lo.1).max(1e-6);
    let margin = 0.05 * w.max(h);
    let view = (lo.0 - margin, lo.1 - margin, w + 2.0 * margin, h + 2.0 * margin);
    let stroke = 0.004 * w.max(h);

    let mut out = String::with_capacity(8192);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        fmt_f64(view.0),
        fmt_f64(view.1),
        fmt_f64(view.2),
        fmt_f64(view.3)
    ));
    out.push_str(&format!(
        "<style>.dump{{stroke:#101010;stroke-width:{sw};fill-opacity:0.55}}\
         .reclaim{{stroke:#101010;stroke-width:{sw};stroke-dasharray:{d1} {d2};fill-opacity:0.35}}</style>\n",
        sw = fmt_f64(stroke),
        d1 = fmt_f64(stroke * 3.0),
        d2 = fmt_f64(stroke * 2.0),
    ));

    for snapshot in snapshots {
        let color = ramp_color(snapshot.window.index, window_count);
        for f in snapshot
            .dump_features
            .iter()
            .chain(snapshot.reclaim_features.iter())
        {
            out.push_str(&format!(
                "<path class=\"{}\" fill=\"{}\" d=\"",
                f.role.as_str(),
                color
            ));
            let verts = f.polygon.exterior().vertices();
            for (i, v) in verts.iter().enumerate() {
                out.push_str(if i == 0 { "M" } else { " L" });
                out.push_str(&format!("{} {}", fmt_f64(v.x), fmt_f64(-v.y)));
            }
            out.push_str(" Z\"/>\n");
        }
    }

    // Legend: one swatch per window, stacked down the left edge.
    let box_h = view.3 / (window_count as f64 * 1.5 + 1.0);
    let box_w = box_h * 1.6;
    let font = box_h * 0.7;
    out.push_str("<g>\n");
    for k in 0..window_count {
        let x = view.0 + box_w * 0.25;
        let y = view.1 + box_h * 0.5 + 1.5 * box_h * k as f64;
        out.push_str(&format!(
            "<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(box_w),
            fmt_f64(box_h),
            ramp_color(k, window_count)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\">window {}</text>\n",
            fmt_f64(x + box_w * 1.25),
            fmt_f64(y + box_h * 0.8),
            fmt_f64(font),
            k
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn all_features(snapshots: &[Snapshot]) -> impl Iterator<Item = &PolygonFeature> {
    snapshots.iter().flat_map(|s| {
        s.dump_features
            .iter()
            .chain(s.reclaim_features.iter())
    })
}
