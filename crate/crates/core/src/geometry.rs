//! Planar primitives and the line-of-sight test between rooftops.
//!
//! Buildings are vertical cylinders (circular footprint, flat roof). No-fly
//! zones are polygons extruded to unbounded height. All boundary
//! comparisons are closed: touching counts as intersecting.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Absolute tolerance for boundary comparisons, in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;

    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// Twice the signed area of triangle `a b c`; positive when counter-clockwise.
fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Distance from `p` to the closed segment `a b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    p.distance(closest_on_segment(p, a, b).1)
}

/// Parameter in `[0, 1]` and location of the point of segment `a b` nearest to `p`.
pub fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> (f64, Point2) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (0.0, a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (t, a + ab.scale(t))
}

/// Distance between closed segments `p1 p2` and `q1 q2` (zero when they cross).
pub fn segment_distance(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> f64 {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

/// Simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl Polygon2 {
    /// Validates the ring and normalizes it to counter-clockwise order.
    ///
    /// A closing vertex equal to the first one is dropped.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidArgument(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidArgument(format!(
                "non-finite polygon vertex ({}, {})",
                p.x, p.y
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= EPS {
                return Err(GeometryError::InvalidArgument(format!(
                    "polygon has a zero-length edge at vertex {i}"
                )));
            }
        }
        // Non-adjacent edges must stay apart.
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let d = segment_distance(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]);
                if d <= EPS {
                    return Err(GeometryError::InvalidArgument(format!(
                        "polygon is self-intersecting (edges {i} and {j})"
                    )));
                }
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= EPS {
            return Err(GeometryError::InvalidArgument("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area (always positive for a valid polygon).
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let w = a.cross(b);
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let k = 1.0 / (6.0 * self.area());
        Point2::new(cx * k, cy * k)
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.boundary_distance(p) <= EPS {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

impl<'de> Deserialize<'de> for Polygon2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vertices = Vec::<Point2>::deserialize(d)?;
        Polygon2::new(vertices).map_err(serde::de::Error::custom)
    }
}

fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
    twice / 2.0
}

/// A rooftop: circular footprint of `radius` around `center`, flat roof at `height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub id: String,
    pub center: Point2,
    pub radius: f64,
    pub height: f64,
    pub recharge_pads: u32,
}

impl Building {
    pub fn new(
        id: impl Into<String>,
        center: Point2,
        radius: f64,
        height: f64,
        recharge_pads: u32,
    ) -> Result<Self, GeometryError> {
        let b = Self {
            id: id.into(),
            center,
            radius,
            height,
            recharge_pads,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !self.center.is_finite() {
            return Err(GeometryError::InvalidArgument(format!(
                "building {}: non-finite center",
                self.id
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(GeometryError::InvalidArgument(format!(
                "building {}: radius must be positive, got {}",
                self.id, self.radius
            )));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(GeometryError::InvalidArgument(format!(
                "building {}: height must be positive, got {}",
                self.id, self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoFlyZone {
    pub id: String,
    pub shape: Polygon2,
}

/// Rectangle of total width `width` centered on segment `a b`, counter-clockwise.
pub fn corridor_polygon(a: Point2, b: Point2, width: f64) -> Result<Polygon2, GeometryError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GeometryError::InvalidArgument(
            "corridor endpoints must be finite".into(),
        ));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(GeometryError::InvalidArgument(format!(
            "corridor width must be positive, got {width}"
        )));
    }
    let d = b - a;
    let len = d.norm();
    if len <= EPS {
        return Err(GeometryError::InvalidArgument("corridor endpoints coincide".into()));
    }
    let half = width / 2.0;
    // Left-hand normal of the travel direction.
    let n = Point2::new(-d.y / len * half, d.x / len * half);
    Polygon2::new(vec![a - n, b - n, b + n, a + n])
}

/// True iff the closed disk and the closed polygon share a point.
pub fn circle_intersects_polygon(center: Point2, radius: f64, poly: &Polygon2) -> bool {
    poly.contains(center) || poly.boundary_distance(center) <= radius + EPS
}

/// True iff the closed polygon regions overlap; shared boundary points count.
pub fn polygons_intersect(p: &Polygon2, q: &Polygon2) -> bool {
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segment_distance(a, b, c, d) <= EPS {
                return true;
            }
        }
    }
    p.contains(q.vertices[0]) || q.contains(p.vertices[0])
}

/// Height of the straight rooftop-to-rooftop flight line at the point of
/// the `a`→`b` track nearest to `p`.
pub fn flight_line_height(p: Point2, a: &Building, b: &Building) -> f64 {
    let (t, _) = closest_on_segment(p, a.center, b.center);
    a.height + t * (b.height - a.height)
}

/// True iff `candidate` rises above the flight line from `a` to `b`.
///
/// The roof is compared against the line height at the along-track position
/// nearest to the candidate's center. Equal heights do not block.
pub fn blocks_vertical(candidate: &Building, a: &Building, b: &Building) -> bool {
    candidate.height > flight_line_height(candidate.center, a, b) + EPS
}

/// Whether a swarm of lateral extent `width` can fly straight from roof `a` to roof `b`.
///
/// Builds the corridor rectangle, rejects it if any no-fly zone overlaps,
/// then keeps only buildings whose footprint touches the corridor and checks
/// each against the flight line.
pub fn line_of_sight(
    a: &Building,
    b: &Building,
    scene: &[Building],
    nfzs: &[NoFlyZone],
    width: f64,
) -> Result<bool, GeometryError> {
    let corridor = corridor_polygon(a.center, b.center, width)?;
    if nfzs.iter().any(|z| polygons_intersect(&corridor, &z.shape)) {
        return Ok(false);
    }
    let blocked = scene
        .iter()
        .filter(|c| c.id != a.id && c.id != b.id)
        .filter(|c| circle_intersects_polygon(c.center, c.radius, &corridor))
        .any(|c| blocks_vertical(c, a, b));
    Ok(!blocked)
}
