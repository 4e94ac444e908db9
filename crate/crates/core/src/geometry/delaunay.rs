//! Bowyer-Watson Delaunay triangulation with deterministic tie handling.
//!
//! Construction is incremental inside an oversized bounding triangle whose
//! vertices are discarded at the end. Two post-passes make the result
//! canonical: a Lawson legalization pass repairs any edge left non-Delaunay
//! by floating-point slack near the bounding triangle, and a tie pass
//! resolves exactly-cocircular quads by flipping their shared edge onto the
//! diagonal that contains the lowest-index vertex (indices taken in the
//! canonical lexicographic point order). Output therefore depends only on
//! the distinct point set, never on input order.

use std::collections::BTreeMap;

use super::hull::{convex_hull, dedup_points};
use super::ops::polygon_area;
use super::predicates::{all_collinear, incircle_norm, orient_norm, PREDICATE_EPS};
use super::{GeometryError, Point2, Triangle};

/// Bounding-triangle scale ladder, in multiples of the data extent. The
/// first rung handles everything but near-degenerate inputs whose
/// circumcircles reach the bounding vertices; a failed coverage check
/// escalates to the next rung. Larger scales are not usable: they push the
/// normalized incircle determinant for mixed real/bounding tests below the
/// degeneracy threshold.
const SUPER_SCALES: [f64; 3] = [64.0, 4096.0, 262_144.0];

const MAX_FLIP_PASSES: usize = 256;

/// Delaunay triangulation of a point set.
///
/// Every returned triangle is counter-clockwise and its circumcircle
/// contains no other input point (beyond the degeneracy threshold, see
/// [`circumcircle_value`]). Triangles are listed in a canonical order.
/// Fails with `DegenerateInput` for fewer than three distinct points or a
/// fully collinear set.
pub fn delaunay_triangulate(points: &[Point2]) -> Result<Vec<Triangle>, GeometryError> {
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
    let tris = triangulate_canonical(&pts)?;
    Ok(tris
        .into_iter()
        .map(|[a, b, c]| Triangle {
            a: pts[a],
            b: pts[b],
            c: pts[c],
        })
        .collect())
}

/// Signed, magnitude-normalized incircle value of `p` against the
/// circumcircle of `t`: positive strictly inside, negative strictly
/// outside, within `1e-12` of zero when the four points count as
/// cocircular. This is the exact predicate the triangulation is built
/// with, exposed so results can be validated externally.
pub fn circumcircle_value(t: &Triangle, p: Point2) -> f64 {
    if t.signed_area() >= 0.0 {
        incircle_norm(t.a, t.b, t.c, p)
    } else {
        incircle_norm(t.a, t.c, t.b, p)
    }
}

/// Triangulation over an already canonical (lex-sorted, deduplicated,
/// non-collinear) point slice. Returns CCW index triples, each rotated so
/// its smallest index comes first, sorted lexicographically.
pub(crate) fn triangulate_canonical(pts: &[Point2]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let hull_area = polygon_area(&convex_hull(pts)?);
    let mut last = GeometryError::DegenerateInput("triangulation failed");
    for &scale in &SUPER_SCALES {
        match attempt(pts, scale, hull_area) {
            Ok(tris) => return Ok(tris),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn attempt(pts: &[Point2], scale: f64, hull_area: f64) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = pts.len();
    let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
    let (mut hi_x, mut hi_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    let cx = (lo_x + hi_x) / 2.0;
    let cy = (lo_y + hi_y) / 2.0;
    let r = scale * (hi_x - lo_x).max(hi_y - lo_y).max(1.0);

    // Bounding vertices get indices n, n+1, n+2; CCW equilateral layout.
    let mut all: Vec<Point2> = pts.to_vec();
    all.push(Point2::new(cx, cy + 2.0 * r));
    all.push(Point2::new(cx - 3f64.sqrt() * r, cy - r));
    all.push(Point2::new(cx + 3f64.sqrt() * r, cy - r));

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for pi in 0..n {
        insert_point(&all, &mut tris, pi)?;
    }

    let mut real: Vec<[usize; 3]> = tris
        .into_iter()
        .filter(|t| t.iter().all(|&v| v < n))
        .collect();
    if real.is_empty() {
        return Err(GeometryError::DegenerateInput("triangulation collapsed"));
    }

    legalize(&all, &mut real)?;
    canonicalize_ties(&all, &mut real);

    // Coverage check: the triangles must tile exactly the convex hull.
    let mut covered = 0.0;
    for &[a, b, c] in &real {
        if orient_norm(all[a], all[b], all[c]) <= PREDICATE_EPS {
            return Err(GeometryError::DegenerateInput("degenerate triangle"));
        }
        covered += raw_signed_area(all[a], all[b], all[c]);
    }
    if (covered - hull_area).abs() > 1e-9 * hull_area + 1e-12 {
        return Err(GeometryError::DegenerateInput("hull coverage gap"));
    }

    for t in &mut real {
        rotate_min_first(t);
    }
    real.sort_unstable();
    Ok(real)
}

fn insert_point(
    all: &[Point2],
    tris: &mut Vec<[usize; 3]>,
    pi: usize,
) -> Result<(), GeometryError> {
    let p = all[pi];
    // Raw-sign incircle classification. A thresholded test can miss the
    // triangle the point sits in: a sliver against a bounding vertex has an
    // enormous circumcircle, and an interior point's normalized incircle
    // value may fall under any fixed epsilon even though its sign is sound.
    let mut bad: Vec<usize> = (0..tris.len())
        .filter(|&ti| {
            let [a, b, c] = tris[ti];
            incircle_norm(all[a], all[b], all[c], p) > 0.0
        })
        .collect();

    // The triangle containing the point belongs to the cavity whatever its
    // incircle value says; it seeds the connected-component restriction
    // that keeps stray ill-conditioned positives elsewhere from being torn
    // out of the mesh.
    let seed = (0..tris.len()).find(|&ti| tri_contains(all, tris[ti], p));
    let cavity = match seed {
        Some(s) => {
            if !bad.contains(&s) {
                bad.push(s);
            }
            connected_component(tris, &bad, s)
        }
        None if bad.is_empty() => {
            return Err(GeometryError::DegenerateInput("insertion found no cavity"));
        }
        None => bad,
    };

    let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &ti in &cavity {
        for (u, v) in directed_edges(tris[ti]) {
            *edge_count.entry(undirected(u, v)).or_insert(0) += 1;
        }
    }

    // Boundary edges are retriangulated on the raw orientation sign: a
    // skipped edge would leave a hole, so only an exactly-degenerate
    // triangle is ever dropped.
    let mut fresh: Vec<[usize; 3]> = Vec::new();
    for &ti in &cavity {
        for (u, v) in directed_edges(tris[ti]) {
            if edge_count[&undirected(u, v)] == 1 && orient_norm(all[u], all[v], p) > 0.0 {
                fresh.push([u, v, pi]);
            }
        }
    }

    let mut drop = vec![false; tris.len()];
    for &ti in &cavity {
        drop[ti] = true;
    }
    let mut keep_idx = 0;
    tris.retain(|_| {
        let d = drop[keep_idx];
        keep_idx += 1;
        !d
    });
    tris.extend(fresh);
    Ok(())
}

/// Lawson flips until every interior edge is locally Delaunay.
fn legalize(all: &[Point2], tris: &mut [[usize; 3]]) -> Result<(), GeometryError> {
    for _ in 0..MAX_FLIP_PASSES {
        if !flip_pass(all, tris, |val| val > PREDICATE_EPS, |_, _| true) {
            return Ok(());
        }
    }
    Err(GeometryError::DegenerateInput("legalization did not settle"))
}

/// Cocircular quads are flipped onto the diagonal holding the lowest
/// canonical vertex index, making tie resolution input-order independent.
fn canonicalize_ties(all: &[Point2], tris: &mut [[usize; 3]]) {
    for _ in 0..MAX_FLIP_PASSES {
        let flipped = flip_pass(
            all,
            tris,
            |val| val.abs() <= PREDICATE_EPS,
            |shared, opposite| {
                let m = shared
                    .iter()
                    .chain(opposite.iter())
                    .copied()
                    .min()
                    .unwrap();
                opposite.contains(&m)
            },
        );
        if !flipped {
            return;
        }
    }
}

/// One deterministic sweep over interior edges in sorted order. An edge is
/// flipped when `trigger(incircle value of the far vertex)` holds, the
/// resulting quad is strictly convex, and `want(shared, opposite)` agrees.
/// Returns whether anything changed.
fn flip_pass(
    all: &[Point2],
    tris: &mut [[usize; 3]],
    trigger: impl Fn(f64) -> bool,
    want: impl Fn([usize; 2], [usize; 2]) -> bool,
) -> bool {
    let mut owners: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for (u, v) in directed_edges(*t) {
            let w = opposite_vertex(*t, u, v);
            owners.entry(undirected(u, v)).or_default().push((ti, w));
        }
    }

    let mut touched = vec![false; tris.len()];
    let mut flipped = false;
    for (&(u, v), pair) in &owners {
        if pair.len() != 2 {
            continue;
        }
        let ((t1, w1), (t2, w2)) = (pair[0], pair[1]);
        if touched[t1] || touched[t2] {
            continue;
        }
        let [a, b, c] = tris[t1];
        let val = incircle_norm(all[a], all[b], all[c], all[w2]);
        if !trigger(val) || !want([u, v], [w1, w2]) {
            continue;
        }
        // Orient the shared edge so t1 = (eu, ev, w1) is CCW, then check
        // the post-flip triangles are strictly CCW (convex quad).
        let (eu, ev) = if orient_norm(all[u], all[v], all[w1]) > 0.0 {
            (u, v)
        } else {
            (v, u)
        };
        if orient_norm(all[w1], all[eu], all[w2]) <= PREDICATE_EPS
            || orient_norm(all[w2], all[ev], all[w1]) <= PREDICATE_EPS
        {
            continue;
        }
        tris[t1] = [w1, eu, w2];
        tris[t2] = [w2, ev, w1];
        touched[t1] = true;
        touched[t2] = true;
        flipped = true;
    }
    flipped
}

fn connected_component(tris: &[[usize; 3]], bad: &[usize], seed: usize) -> Vec<usize> {
    let mut edge_owner: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for &ti in bad {
        for (u, v) in directed_edges(tris[ti]) {
            edge_owner.entry(undirected(u, v)).or_default().push(ti);
        }
    }
    let mut component = vec![seed];
    let mut queue = vec![seed];
    while let Some(ti) = queue.pop() {
        for (u, v) in directed_edges(tris[ti]) {
            for &other in &edge_owner[&undirected(u, v)] {
                if !component.contains(&other) {
                    component.push(other);
                    queue.push(other);
                }
            }
        }
    }
    component
}

fn tri_contains(all: &[Point2], t: [usize; 3], p: Point2) -> bool {
    let [a, b, c] = t;
    orient_norm(all[a], all[b], p) >= -PREDICATE_EPS
        && orient_norm(all[b], all[c], p) >= -PREDICATE_EPS
        && orient_norm(all[c], all[a], p) >= -PREDICATE_EPS
}

fn directed_edges(t: [usize; 3]) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
}

fn opposite_vertex(t: [usize; 3], u: usize, v: usize) -> usize {
    *t.iter().find(|&&w| w != u && w != v).unwrap()
}

fn undirected(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn raw_signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2.0
}

fn rotate_min_first(t: &mut [usize; 3]) {
    let k = (0..3).min_by_key(|&i| t[i]).unwrap();
    t.rotate_left(k);
}
