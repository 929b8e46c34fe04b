//! Planar primitives for compass-and-straightedge realizations.
//!
//! Lines are finite segments between their two defining points; circles are
//! given by a center and a radius. All arithmetic is `f64`.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for kernel identities (tangency collapse, endpoint inclusion).
pub const TOL_GEOM: f64 = 1e-9;
/// Tolerance for scene-level constraint checks.
pub const TOL_SCENE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid primitive: {0}")]
    InvalidPrimitive(&'static str),
}

/// A point in canvas units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Coord) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Coord) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Coord) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Coord {
        Coord::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lexicographic(&self, other: &Coord) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Coord {
    type Output = Coord;
    fn add(self, rhs: Coord) -> Coord {
        Coord::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Coord {
    type Output = Coord;
    fn sub(self, rhs: Coord) -> Coord {
        Coord::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Coord {
    type Output = Coord;
    fn mul(self, rhs: f64) -> Coord {
        Coord::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Coord {
    type Output = Coord;
    fn neg(self) -> Coord {
        Coord::new(-self.x, -self.y)
    }
}

/// Finite straight segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Coord,
    pub b: Coord,
}

impl Segment {
    pub const fn new(a: Coord, b: Coord) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn direction(&self) -> Coord {
        self.b - self.a
    }

    pub fn at(&self, t: f64) -> Coord {
        self.a + self.direction() * t
    }

    /// Parameter of the closest point, clamped to `[0, 1]`.
    pub fn project(&self, c: Coord) -> f64 {
        let d = self.direction();
        let len2 = d.dot(d);
        if len2 == 0.0 {
            return 0.0;
        }
        ((c - self.a).dot(d) / len2).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleShape {
    pub center: Coord,
    pub radius: f64,
}

impl CircleShape {
    pub const fn new(center: Coord, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Circle through `edge` centered at `center`, as drawn with a compass.
    pub fn through(center: Coord, edge: Coord) -> Self {
        Self::new(center, center.distance(edge))
    }

    pub fn at_angle(&self, theta: f64) -> Coord {
        self.center + Coord::new(theta.cos(), theta.sin()) * self.radius
    }
}

/// A drawable object: a segment or a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    #[serde(rename = "line")]
    Segment(Segment),
    Circle(CircleShape),
}

impl Primitive {
    pub fn segment(a: Coord, b: Coord) -> Self {
        Primitive::Segment(Segment::new(a, b))
    }

    pub fn circle(center: Coord, radius: f64) -> Self {
        Primitive::Circle(CircleShape::new(center, radius))
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        match self {
            Primitive::Segment(s) => {
                if !s.a.is_finite() || !s.b.is_finite() {
                    return Err(GeomError::InvalidPrimitive("non-finite segment endpoint"));
                }
                if s.length() <= TOL_GEOM {
                    return Err(GeomError::InvalidPrimitive("zero-length segment"));
                }
            }
            Primitive::Circle(c) => {
                if !c.center.is_finite() || !c.radius.is_finite() {
                    return Err(GeomError::InvalidPrimitive("non-finite circle"));
                }
                if c.radius <= TOL_GEOM {
                    return Err(GeomError::InvalidPrimitive("zero-radius circle"));
                }
            }
        }
        Ok(())
    }

    /// Segment length or circle radius.
    pub fn size(&self) -> f64 {
        match self {
            Primitive::Segment(s) => s.length(),
            Primitive::Circle(c) => c.radius,
        }
    }

    /// Euclidean distance from `c` to the nearest point of the primitive.
    pub fn distance_to(&self, c: Coord) -> f64 {
        match self {
            Primitive::Segment(s) => s.at(s.project(c)).distance(c),
            Primitive::Circle(circle) => (circle.center.distance(c) - circle.radius).abs(),
        }
    }

    /// Uniform sample by arc length (circle) or length (segment).
    pub fn sample_on<R: Rng + ?Sized>(&self, rng: &mut R) -> Coord {
        match self {
            Primitive::Segment(s) => s.at(rng.gen::<f64>()),
            Primitive::Circle(c) => c.at_angle(rng.gen::<f64>() * TAU),
        }
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Coord, Coord) {
        match self {
            Primitive::Segment(s) => (
                Coord::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y)),
                Coord::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y)),
            ),
            Primitive::Circle(c) => {
                let r = Coord::new(c.radius, c.radius);
                (c.center - r, c.center + r)
            }
        }
    }
}

/// Zero, one or two intersection points, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntersectionSet {
    points: Vec<Coord>,
}

impl IntersectionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    fn from_points(mut points: Vec<Coord>) -> Self {
        points.sort_by(Coord::lexicographic);
        Self { points }
    }

    pub fn points(&self) -> &[Coord] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl IntoIterator for IntersectionSet {
    type Item = Coord;
    type IntoIter = std::vec::IntoIter<Coord>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.into_iter()
    }
}

/// All intersection points of two primitives.
///
/// Segments are finite. Tangent contacts (within [`TOL_GEOM`]) collapse to a
/// single point; parallel segments, including collinear overlaps, and
/// concentric circles yield the empty set.
pub fn intersect(p: &Primitive, q: &Primitive) -> Result<IntersectionSet, GeomError> {
    p.validate()?;
    q.validate()?;
    let points = match (p, q) {
        (Primitive::Segment(s), Primitive::Segment(t)) => segment_segment(s, t),
        (Primitive::Segment(s), Primitive::Circle(c))
        | (Primitive::Circle(c), Primitive::Segment(s)) => segment_circle(s, c),
        (Primitive::Circle(c), Primitive::Circle(d)) => circle_circle(c, d),
    };
    Ok(IntersectionSet::from_points(points))
}

pub fn distance_to(p: &Primitive, c: Coord) -> f64 {
    p.distance_to(c)
}

pub fn sample_on<R: Rng + ?Sized>(p: &Primitive, rng: &mut R) -> Coord {
    p.sample_on(rng)
}

fn in_unit(t: f64, slack: f64) -> bool {
    (-slack..=1.0 + slack).contains(&t)
}

fn segment_segment(s: &Segment, t: &Segment) -> Vec<Coord> {
    let r = s.direction();
    let q = t.direction();
    let denom = r.cross(q);
    if denom.abs() <= TOL_GEOM * r.norm() * q.norm() {
        return Vec::new();
    }
    let w = t.a - s.a;
    let ts = w.cross(q) / denom;
    let tt = w.cross(r) / denom;
    if in_unit(ts, TOL_GEOM / r.norm()) && in_unit(tt, TOL_GEOM / q.norm()) {
        vec![s.at(ts.clamp(0.0, 1.0))]
    } else {
        Vec::new()
    }
}

fn segment_circle(s: &Segment, c: &CircleShape) -> Vec<Coord> {
    let d = s.direction();
    let len = d.norm();
    let t0 = (c.center - s.a).dot(d) / (len * len);
    let foot = s.at(t0);
    let dist = foot.distance(c.center);
    let slack = TOL_GEOM / len;
    if dist > c.radius + TOL_GEOM {
        return Vec::new();
    }
    if (dist - c.radius).abs() <= TOL_GEOM {
        return if in_unit(t0, slack) {
            vec![s.at(t0.clamp(0.0, 1.0))]
        } else {
            Vec::new()
        };
    }
    let dt = (c.radius * c.radius - dist * dist).max(0.0).sqrt() / len;
    [t0 - dt, t0 + dt]
        .into_iter()
        .filter(|&t| in_unit(t, slack))
        .map(|t| s.at(t.clamp(0.0, 1.0)))
        .collect()
}

fn circle_circle(c: &CircleShape, e: &CircleShape) -> Vec<Coord> {
    let delta = e.center - c.center;
    let d = delta.norm();
    if d <= TOL_GEOM {
        return Vec::new();
    }
    let outer = c.radius + e.radius;
    let inner = (c.radius - e.radius).abs();
    if d > outer + TOL_GEOM || d < inner - TOL_GEOM {
        return Vec::new();
    }
    let u = delta * (1.0 / d);
    let a = (d * d + c.radius * c.radius - e.radius * e.radius) / (2.0 * d);
    let base = c.center + u * a;
    if (d - outer).abs() <= TOL_GEOM || (d - inner).abs() <= TOL_GEOM {
        return vec![base];
    }
    let h = (c.radius * c.radius - a * a).max(0.0).sqrt();
    vec![base + u.perp() * h, base - u.perp() * h]
}
