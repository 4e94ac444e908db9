//! Monotone-chain convex hull.

use super::predicates::{orient_norm, PREDICATE_EPS};
use super::{GeometryError, Point2, Polygon, Ring};

/// Canonical form of a point set: exact duplicates removed, lexicographic
/// (x, then y) order. Shared by every construction in this module so that
/// input ordering can never influence an output.
pub(crate) fn dedup_points(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    pts
}

/// Strict convex hull of a point set.
///
/// The result ring starts at the lexicographically smallest vertex and runs
/// counter-clockwise. Points interior to the hull or lying on a hull edge
/// (collinear with two hull vertices) are not vertices of the result.
/// Fails with `DegenerateInput` when fewer than three distinct points remain
/// or all points are collinear.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::DegenerateInput("non-finite coordinate"));
    }
    let pts = dedup_points(points);
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "fewer than 3 distinct points",
        ));
    }

    // Build lower and upper chains, popping anything that is not a strict
    // left turn; collinear points drop out here.
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2
            && orient_norm(lower[lower.len() - 2], lower[lower.len() - 1], p) <= PREDICATE_EPS
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && orient_norm(upper[upper.len() - 2], upper[upper.len() - 1], p) <= PREDICATE_EPS
        {
            upper.pop();
        }
        upper.push(p);
    }

    // Chain endpoints are shared; drop each chain's last vertex.
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() < 3 {
        return Err(GeometryError::DegenerateInput("all points collinear"));
    }
    let ring = Ring::new(lower).map_err(|_| GeometryError::DegenerateInput("all points collinear"))?;
    Ok(Polygon::new(ring))
}
