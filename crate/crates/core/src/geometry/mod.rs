//! Planar geometry kernel: convex hulls, Delaunay triangulation, alpha
//! shapes, containment and area computations.
//!
//! All coordinates live in a projected metric plane (easting/northing in
//! meters). Every operation is a pure function of its inputs and is
//! deterministic regardless of input ordering: point sets are canonically
//! sorted and deduplicated before any construction.

mod alpha;
mod delaunay;
mod hull;
mod ops;
mod predicates;

pub use alpha::alpha_shape;
pub use delaunay::{circumcircle_value, delaunay_triangulate};
pub use hull::convex_hull;
pub use ops::{convex_intersection_area, is_convex, point_in_polygon, polygon_area, Containment};
pub use predicates::{BOUNDARY_TOL, PREDICATE_EPS};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    /// Fewer than three distinct points, or all points collinear.
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    /// A convex-only operation was handed a non-convex polygon.
    #[error("polygon is not convex")]
    NotConvex,
    #[error("invalid ring: {0}")]
    InvalidRing(&'static str),
}

/// A position in the local metric grid (meters easting, meters northing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn dist2(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Lexicographic (x, then y) total order used for canonical sorting.
    pub(crate) fn lex_cmp(&self, other: &Point2) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

/// A simple closed boundary: at least 3 distinct vertices, counter-clockwise,
/// no self-intersections, closure implicit (first vertex not repeated).
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    vertices: Vec<Point2>,
}

impl Ring {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidRing("fewer than 3 vertices"));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidRing("non-finite vertex"));
        }
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                if vertices[i] == vertices[j] {
                    return Err(GeometryError::InvalidRing("repeated vertex"));
                }
            }
        }
        let ring = Ring { vertices };
        if ring.signed_area() <= 0.0 {
            return Err(GeometryError::InvalidRing(
                "vertices are not in counter-clockwise order",
            ));
        }
        if !ring.is_simple() {
            return Err(GeometryError::InvalidRing("self-intersecting boundary"));
        }
        Ok(ring)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace signed area; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        acc / 2.0
    }

    /// Edge iterator over consecutive vertex pairs, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    // No pair of non-adjacent edges may touch. O(n^2); rings here are small.
    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if predicates::segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

/// A dump or reclaim footprint. Holes are not supported.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Ring,
}

impl Polygon {
    pub fn new(exterior: Ring) -> Self {
        Polygon { exterior }
    }

    pub fn exterior(&self) -> &Ring {
        &self.exterior
    }
}

/// A possibly disconnected footprint; parts are pairwise interior-disjoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiPolygon {
    parts: Vec<Polygon>,
}

impl MultiPolygon {
    pub fn new(parts: Vec<Polygon>) -> Self {
        MultiPolygon { parts }
    }

    pub fn empty() -> Self {
        MultiPolygon { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[Polygon] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn into_parts(self) -> Vec<Polygon> {
        self.parts
    }

    /// Sum of the part areas.
    pub fn area(&self) -> f64 {
        self.parts.iter().map(polygon_area).sum()
    }
}

/// One element of a Delaunay triangulation; never degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
}

impl Triangle {
    pub fn signed_area(&self) -> f64 {
        ((self.b.x - self.a.x) * (self.c.y - self.a.y)
            - (self.b.y - self.a.y) * (self.c.x - self.a.x))
            / 2.0
    }

    pub fn vertices(&self) -> [Point2; 3] {
        [self.a, self.b, self.c]
    }
}

/// The alpha-shape refinement parameter: the maximum edge length a Delaunay
/// triangle may have and still contribute to the shape. `Infinite` keeps
/// every triangle, which reduces the shape to the convex hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaParam {
    Finite(f64),
    Infinite,
}

impl AlphaParam {
    /// A finite alpha must be strictly positive.
    pub fn finite(alpha: f64) -> Result<Self, GeometryError> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(AlphaParam::Finite(alpha))
        } else {
            Err(GeometryError::DegenerateInput("alpha must be > 0"))
        }
    }

    pub fn max_edge_len(&self) -> f64 {
        match self {
            AlphaParam::Finite(a) => *a,
            AlphaParam::Infinite => f64::INFINITY,
        }
    }
}
