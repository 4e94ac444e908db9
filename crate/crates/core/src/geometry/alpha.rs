//! Alpha shapes over the Delaunay triangulation.
//!
//! A triangle survives when all three of its edges are no longer than the
//! alpha parameter; the shape is the union of surviving triangles. The
//! boundary is recovered by walking directed edges whose reverse never
//! occurs, so interior structure vanishes and only outer rings (and holes,
//! which are discarded) remain.

use super::delaunay::triangulate_canonical;
use super::hull::dedup_points;
use super::predicates::{all_collinear, collinear};
use super::{AlphaParam, GeometryError, MultiPolygon, Point2, Polygon, Ring};

use std::collections::BTreeMap;

/// Alpha shape of a point set, one polygon per connected component.
///
/// `AlphaParam::Infinite` keeps every Delaunay triangle and therefore
/// returns the convex hull (same vertex set as [`super::convex_hull`]).
/// A finite alpha that filters out every triangle yields an empty
/// `MultiPolygon`, not an error. Interior holes are dropped; each returned
/// part is a simple CCW polygon. Parts are ordered by their starting
/// vertex, each ring starting at its lexicographically smallest vertex.
pub fn alpha_shape(points: &[Point2], alpha: AlphaParam) -> Result<MultiPolygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::DegenerateInput("non-finite coordinate"));
    }
    let pts = dedup_points(points);
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "fewer than 3 distinct points",
        ));
    }
    if all_collinear(&pts) {
        return Err(GeometryError::DegenerateInput("all points collinear"));
    }

    let max_len = alpha.max_edge_len();
    let max_len2 = if max_len.is_finite() {
        max_len * max_len
    } else {
        f64::INFINITY
    };

    let kept: Vec<[usize; 3]> = triangulate_canonical(&pts)?
        .into_iter()
        .filter(|&[a, b, c]| {
            pts[a].dist2(&pts[b]) <= max_len2
                && pts[b].dist2(&pts[c]) <= max_len2
                && pts[c].dist2(&pts[a]) <= max_len2
        })
        .collect();
    if kept.is_empty() {
        return Ok(MultiPolygon::empty());
    }

    // Directed boundary edges: present in one kept triangle, reverse in
    // none. Kept triangles are CCW, so the region lies left of each edge.
    let mut directed: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for &[a, b, c] in &kept {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            directed.insert((u, v), ());
        }
    }
    let mut outgoing: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut boundary: Vec<(usize, usize)> = Vec::new();
    for &(u, v) in directed.keys() {
        if !directed.contains_key(&(v, u)) {
            boundary.push((u, v));
            outgoing.entry(u).or_default().push(v);
        }
    }

    let mut used: BTreeMap<(usize, usize), bool> =
        boundary.iter().map(|&e| (e, false)).collect();
    let mut parts: Vec<Polygon> = Vec::new();
    for &start in &boundary {
        if used[&start] {
            continue;
        }
        let walk = trace_ring(&pts, start, &outgoing, &mut used);
        // The walk can revisit a vertex where the region pinches to a
        // point; boundary edges never cross, so splitting at revisited
        // vertices is enough to recover simple loops.
        for piece in split_simple_loops(&walk) {
            if let Some(poly) = finish_ring(&pts, &piece)? {
                parts.push(poly);
            }
        }
    }

    parts.sort_by(|a, b| a.exterior().vertices()[0].lex_cmp(&b.exterior().vertices()[0]));
    Ok(MultiPolygon::new(parts))
}

/// Walk the boundary from `start` until the cycle closes. At a pinch
/// vertex with several outgoing edges, take the edge making the largest
/// counter-clockwise turn from the reversed incoming direction; that stays
/// on the current component instead of crossing into the next one.
fn trace_ring(
    pts: &[Point2],
    start: (usize, usize),
    outgoing: &BTreeMap<usize, Vec<usize>>,
    used: &mut BTreeMap<(usize, usize), bool>,
) -> Vec<usize> {
    let mut ring = vec![start.0];
    let (mut u, mut v) = start;
    used.insert(start, true);
    while v != start.0 {
        ring.push(v);
        let candidates = &outgoing[&v];
        let back = Point2::new(pts[u].x - pts[v].x, pts[u].y - pts[v].y);
        let next = candidates
            .iter()
            .copied()
            .filter(|&w| !used[&(v, w)])
            .max_by(|&w1, &w2| {
                let a1 = ccw_angle(back, dir(pts[v], pts[w1]));
                let a2 = ccw_angle(back, dir(pts[v], pts[w2]));
                a1.total_cmp(&a2)
            });
        let Some(w) = next else { break };
        used.insert((v, w), true);
        u = v;
        v = w;
    }
    ring
}

/// Cut a closed walk into vertex-disjoint simple loops. Every time the walk
/// reaches a vertex already on the pending stack, the cycle since that
/// first visit is extracted as one loop and the walk resumes from the
/// pinch vertex; the leftover stack is the final loop.
fn split_simple_loops(walk: &[usize]) -> Vec<Vec<usize>> {
    let mut loops = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in walk {
        if let Some(&at) = pos.get(&v) {
            let piece: Vec<usize> = stack.drain(at..).collect();
            for w in &piece {
                pos.remove(w);
            }
            pos.insert(v, stack.len());
            stack.push(v);
            loops.push(piece);
        } else {
            pos.insert(v, stack.len());
            stack.push(v);
        }
    }
    loops.push(stack);
    loops
}

/// Drop holes (negative area), strip collinear vertices, rotate to the
/// lexicographic minimum. `None` for rings that degenerate on the way.
fn finish_ring(pts: &[Point2], ring_idx: &[usize]) -> Result<Option<Polygon>, GeometryError> {
    if ring_idx.len() < 3 {
        return Ok(None);
    }
    let verts: Vec<Point2> = ring_idx.iter().map(|&i| pts[i]).collect();
    if signed_area(&verts) <= 0.0 {
        return Ok(None);
    }
    let mut verts = simplify_collinear(verts);
    if verts.len() < 3 {
        return Ok(None);
    }
    let min_at = verts
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.lex_cmp(b))
        .map(|(i, _)| i)
        .unwrap();
    verts.rotate_left(min_at);
    let ring = Ring::new(verts)
        .map_err(|_| GeometryError::InvalidRing("alpha boundary is not a simple ring"))?;
    Ok(Some(Polygon::new(ring)))
}

fn simplify_collinear(mut verts: Vec<Point2>) -> Vec<Point2> {
    loop {
        let n = verts.len();
        if n < 3 {
            return verts;
        }
        let keep: Vec<Point2> = (0..n)
            .filter(|&i| {
                !collinear(verts[(i + n - 1) % n], verts[i], verts[(i + 1) % n])
            })
            .map(|i| verts[i])
            .collect();
        if keep.len() == n {
            return verts;
        }
        verts = keep;
    }
}

fn signed_area(verts: &[Point2]) -> f64 {
    let n = verts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

fn dir(from: Point2, to: Point2) -> Point2 {
    Point2::new(to.x - from.x, to.y - from.y)
}

/// Counter-clockwise angle from vector `a` to vector `b` in (0, 2*pi].
fn ccw_angle(a: Point2, b: Point2) -> f64 {
    let ang = (a.x * b.y - a.y * b.x).atan2(a.x * b.x + a.y * b.y);
    if ang <= 0.0 {
        ang + std::f64::consts::TAU
    } else {
        ang
    }
}
