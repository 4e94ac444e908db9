//! Area, containment, and convex clipping.

use super::predicates::{orient_norm, point_segment_distance, BOUNDARY_TOL, PREDICATE_EPS};
use super::{GeometryError, Point2, Polygon};

/// Where a query point sits relative to a polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Unsigned area of the polygon's exterior ring (square meters).
pub fn polygon_area(poly: &Polygon) -> f64 {
    poly.exterior().signed_area().abs()
}

/// Point-in-polygon with an explicit boundary band: any point within
/// `1e-9` m of an edge reports `Boundary`, everything else is classified by
/// crossing parity. The boundary check runs first so parity ambiguities at
/// edges and vertices never surface.
pub fn point_in_polygon(point: Point2, poly: &Polygon) -> Containment {
    for (a, b) in poly.exterior().edges() {
        if point_segment_distance(point, a, b) <= BOUNDARY_TOL {
            return Containment::Boundary;
        }
    }
    let v = poly.exterior().vertices();
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        if (v[i].y > point.y) != (v[j].y > point.y) {
            let x_cross = (v[j].x - v[i].x) * (point.y - v[i].y) / (v[j].y - v[i].y) + v[i].x;
            if point.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// True when every boundary turn is a left turn or straight. Rings are
/// validated CCW on construction, so right turns are the only reflex signal.
pub fn is_convex(poly: &Polygon) -> bool {
    let v = poly.exterior().vertices();
    let n = v.len();
    (0..n).all(|i| orient_norm(v[i], v[(i + 1) % n], v[(i + 2) % n]) >= -PREDICATE_EPS)
}

/// Area of the intersection of two convex polygons via Sutherland-Hodgman
/// clipping. Returns 0 for empty or measure-zero overlap. `NotConvex` if
/// either input has a reflex vertex.
pub fn convex_intersection_area(a: &Polygon, b: &Polygon) -> Result<f64, GeometryError> {
    if !is_convex(a) || !is_convex(b) {
        return Err(GeometryError::NotConvex);
    }
    let mut output: Vec<Point2> = a.exterior().vertices().to_vec();
    for (ca, cb) in b.exterior().edges() {
        if output.is_empty() {
            break;
        }
        let input = std::mem::take(&mut output);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let nxt = input[(i + 1) % n];
            // Raw cross products: the clip edge is CCW, so >= 0 is inside.
            let side_cur = cross(ca, cb, cur);
            let side_nxt = cross(ca, cb, nxt);
            if side_cur >= 0.0 {
                output.push(cur);
                if side_nxt < 0.0 {
                    output.push(line_intersection(ca, cb, cur, nxt));
                }
            } else if side_nxt >= 0.0 {
                output.push(line_intersection(ca, cb, cur, nxt));
            }
        }
    }
    if output.len() < 3 {
        return Ok(0.0);
    }
    let n = output.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = output[i];
        let q = output[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    Ok((acc / 2.0).abs())
}

fn cross(a: Point2, b: Point2, p: Point2) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

// Intersection of infinite line ab with segment cd's supporting line; the
// clipping loop only calls this when the segment genuinely crosses.
fn line_intersection(a: Point2, b: Point2, c: Point2, d: Point2) -> Point2 {
    let a1 = b.y - a.y;
    let b1 = a.x - b.x;
    let c1 = a1 * a.x + b1 * a.y;
    let a2 = d.y - c.y;
    let b2 = c.x - d.x;
    let c2 = a2 * c.x + b2 * c.y;
    let det = a1 * b2 - a2 * b1;
    Point2::new((b2 * c1 - b1 * c2) / det, (a1 * c2 - a2 * c1) / det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ring;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn poly(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(Ring::new(pts.iter().map(|&(x, y)| p(x, y)).collect()).unwrap())
    }

    #[test]
    fn unit_square_area() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(polygon_area(&sq), 1.0);
    }

    #[test]
    fn triangle_area() {
        let t = poly(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        assert_eq!(polygon_area(&t), 6.0);
    }

    #[test]
    fn containment_in_unit_square() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(point_in_polygon(p(0.5, 0.5), &sq), Containment::Inside);
        assert_eq!(point_in_polygon(p(1.5, 0.5), &sq), Containment::Outside);
        assert_eq!(point_in_polygon(p(1.0, 0.5), &sq), Containment::Boundary);
        assert_eq!(point_in_polygon(p(0.0, 0.0), &sq), Containment::Boundary);
        // Within the tolerance band of an edge.
        assert_eq!(
            point_in_polygon(p(1.0 + 5e-10, 0.5), &sq),
            Containment::Boundary
        );
    }

    #[test]
    fn containment_nonconvex() {
        // L-shape: (2.5, 2.5) sits in the notch, outside the polygon.
        let l = poly(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 2.0),
            (2.0, 2.0),
            (2.0, 4.0),
            (0.0, 4.0),
        ]);
        assert_eq!(point_in_polygon(p(1.0, 1.0), &l), Containment::Inside);
        assert_eq!(point_in_polygon(p(2.5, 2.5), &l), Containment::Outside);
        assert_eq!(point_in_polygon(p(2.0, 3.0), &l), Containment::Boundary);
    }

    #[test]
    fn convexity_detection() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!(is_convex(&sq));
        let l = poly(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 2.0),
            (2.0, 2.0),
            (2.0, 4.0),
            (0.0, 4.0),
        ]);
        assert!(!is_convex(&l));
    }

    #[test]
    fn overlapping_squares_intersection() {
        // Unit squares offset by 0.5 overlap in a 0.5 x 0.5 square.
        let a = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let b = poly(&[(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)]);
        let area = convex_intersection_area(&a, &b).unwrap();
        assert!((area - 0.25).abs() < 1e-12);
    }

    #[test]
    fn disjoint_and_edge_touching() {
        let a = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let far = poly(&[(5.0, 5.0), (6.0, 5.0), (6.0, 6.0), (5.0, 6.0)]);
        assert_eq!(convex_intersection_area(&a, &far).unwrap(), 0.0);
        // Sharing only an edge: measure-zero overlap.
        let touch = poly(&[(1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0)]);
        assert_eq!(convex_intersection_area(&a, &touch).unwrap(), 0.0);
    }

    #[test]
    fn contained_polygon_intersection_is_inner_area() {
        let outer = poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
        let inner = poly(&[(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]);
        let area = convex_intersection_area(&outer, &inner).unwrap();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_input_rejected() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let l = poly(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 2.0),
            (2.0, 2.0),
            (2.0, 4.0),
            (0.0, 4.0),
        ]);
        assert_eq!(
            convex_intersection_area(&sq, &l).unwrap_err(),
            GeometryError::NotConvex
        );
    }
}
