//! Orientation and incircle predicates with magnitude-normalized epsilons.
//!
//! Raw determinant values scale with coordinate magnitude (the orientation
//! determinant with the square, the incircle determinant with the fourth
//! power), so a fixed absolute epsilon would be meaningless across sites
//! whose grids differ by kilometers. Both predicates divide by those scale
//! factors before comparing against `PREDICATE_EPS`.

use super::Point2;

/// Threshold on normalized determinants below which a configuration is
/// treated as degenerate (collinear / cocircular).
pub const PREDICATE_EPS: f64 = 1e-12;

/// Distance within which a query point counts as lying on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Normalized orientation of c relative to the directed line a->b.
/// Positive: left turn (CCW). Negative: right turn. Near zero: collinear.
pub(crate) fn orient_norm(a: Point2, b: Point2, c: Point2) -> f64 {
    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let m = max_abs_coord(&[a, b, c]);
    if m == 0.0 {
        return 0.0;
    }
    det / (m * m)
}

#[cfg(test)]
pub(crate) fn is_ccw(a: Point2, b: Point2, c: Point2) -> bool {
    orient_norm(a, b, c) > PREDICATE_EPS
}

pub(crate) fn collinear(a: Point2, b: Point2, c: Point2) -> bool {
    orient_norm(a, b, c).abs() <= PREDICATE_EPS
}

/// Normalized incircle test for point d against the circumcircle of the CCW
/// triangle (a, b, c). Positive means strictly inside the circle.
pub(crate) fn incircle_norm(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    let adx = a.x - d.x;
    let ady = a.y - d.y;
    let bdx = b.x - d.x;
    let bdy = b.y - d.y;
    let cdx = c.x - d.x;
    let cdy = c.y - d.y;

    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;

    let det = adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy);

    let m = max_abs_coord(&[a, b, c, d]);
    if m == 0.0 {
        return 0.0;
    }
    det / (m * m * m * m)
}

/// True when every point in the slice lies on one line (or there are fewer
/// than three points). Uses the two farthest-apart points as the axis so a
/// cluster of near-duplicates does not mask a genuine offset.
pub(crate) fn all_collinear(points: &[Point2]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let (mut i0, mut i1, mut best) = (0usize, 1usize, 0.0f64);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2 = points[i].dist2(&points[j]);
            if d2 > best {
                best = d2;
                i0 = i;
                i1 = j;
            }
        }
    }
    if best == 0.0 {
        return true;
    }
    points
        .iter()
        .all(|p| collinear(points[i0], points[i1], *p))
}

/// Euclidean distance from p to the closed segment ab.
pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab2 = a.dist2(&b);
    if ab2 == 0.0 {
        return p.dist(&a);
    }
    let t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / ab2;
    let t = t.clamp(0.0, 1.0);
    let proj = Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    p.dist(&proj)
}

/// Proper or improper intersection of closed segments ab and cd, used for
/// ring simplicity checks. Shared endpoints of adjacent edges are excluded
/// by the caller, so any contact reported here is a genuine defect.
pub(crate) fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient_norm(c, d, a);
    let d2 = orient_norm(c, d, b);
    let d3 = orient_norm(a, b, c);
    let d4 = orient_norm(a, b, d);

    if ((d1 > PREDICATE_EPS && d2 < -PREDICATE_EPS) || (d1 < -PREDICATE_EPS && d2 > PREDICATE_EPS))
        && ((d3 > PREDICATE_EPS && d4 < -PREDICATE_EPS)
            || (d3 < -PREDICATE_EPS && d4 > PREDICATE_EPS))
    {
        return true;
    }
    (d1.abs() <= PREDICATE_EPS && on_segment(c, d, a))
        || (d2.abs() <= PREDICATE_EPS && on_segment(c, d, b))
        || (d3.abs() <= PREDICATE_EPS && on_segment(a, b, c))
        || (d4.abs() <= PREDICATE_EPS && on_segment(a, b, d))
}

// p assumed collinear with segment ab; checks the bounding box.
fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn max_abs_coord(points: &[Point2]) -> f64 {
    points
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(0.0, f64::max)
}
