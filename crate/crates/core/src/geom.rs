//! Planar points, segments and the tolerance-aware predicates every other
//! module builds on.
//!
//! All predicates work in plain `f64` with absolute tolerances taken from a
//! [`Tolerance`]. Near-degenerate cases are resolved toward reporting contact,
//! so that a caller testing for non-intersection never accepts a crossing it
//! could not rule out.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("tolerance values must be finite and strictly positive (got eps_len={eps_len}, eps_ang={eps_ang})")]
    InvalidTolerance { eps_len: f64, eps_ang: f64 },
    #[error("segment endpoints coincide within tolerance at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("ray endpoint coincides with its vertex")]
    DegenerateRay,
    #[error("circle radius must be strictly positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("line is undefined: both points coincide")]
    DegenerateLine,
    #[error("quadrilateral is not simple")]
    NonSimpleQuadrilateral,
    #[error("non-finite coordinate")]
    NonFinite,
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Point at distance `r` from the origin in direction `angle` (radians).
    pub fn polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point2::new(r * c, r * s)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counterclockwise from `self`.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn unit(self) -> Option<Point2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Point2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    /// Direction angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotation about the origin by `angle` radians counterclockwise.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotation about `center`.
    pub fn rotate_about(self, center: Point2, angle: f64) -> Point2 {
        center + (self - center).rotate(angle)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic total order, used to break ties deterministically.
    fn lex_cmp(self, other: Point2) -> std::cmp::Ordering {
        self.x.total_cmp(&other.x).then_with(|| self.y.total_cmp(&other.y))
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Absolute tolerances for lengths and angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    eps_len: f64,
    eps_ang: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_len: 1e-9,
            eps_ang: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(eps_len: f64, eps_ang: f64) -> Result<Self, GeomError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(eps_len) && ok(eps_ang) {
            Ok(Tolerance { eps_len, eps_ang })
        } else {
            Err(GeomError::InvalidTolerance { eps_len, eps_ang })
        }
    }

    pub fn eps_len(&self) -> f64 {
        self.eps_len
    }

    pub fn eps_ang(&self) -> f64 {
        self.eps_ang
    }
}

/// A closed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    a: Point2,
    b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2, tol: &Tolerance) -> Result<Self, GeomError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if a.dist(b) <= tol.eps_len {
            return Err(GeomError::DegenerateSegment { x: a.x, y: a.y });
        }
        Ok(Segment2 { a, b })
    }

    pub fn a(&self) -> Point2 {
        self.a
    }

    pub fn b(&self) -> Point2 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn distance_to_point(&self, p: Point2) -> f64 {
        point_segment_distance(p, self.a, self.b)
    }

    /// Canonical key so that pairwise decisions do not depend on argument order.
    fn key(&self) -> (f64, Point2, Point2) {
        (self.length(), self.a, self.b)
    }
}

/// How two closed segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum SegmentRelation {
    Disjoint,
    /// The segments share a single point lying within `eps_len` of an
    /// endpoint of at least one of them.
    TouchAtPoint(Point2),
    /// The interiors cross transversally.
    ProperCross,
    /// The intersection has positive length.
    Overlap,
}

impl fmt::Display for SegmentRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentRelation::Disjoint => write!(f, "disjoint"),
            SegmentRelation::TouchAtPoint(p) => write!(f, "touch at {p}"),
            SegmentRelation::ProperCross => write!(f, "proper crossing"),
            SegmentRelation::Overlap => write!(f, "overlap"),
        }
    }
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len_sq = d.dot(d);
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len_sq).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Orthogonal projection of `p` onto the infinite line through `a` and `b`.
pub fn foot_of_perpendicular(p: Point2, a: Point2, b: Point2) -> Result<Point2, GeomError> {
    let d = b - a;
    let len_sq = d.dot(d);
    if len_sq == 0.0 {
        return Err(GeomError::DegenerateLine);
    }
    Ok(a + d * ((p - a).dot(d) / len_sq))
}

fn signed_line_distance(line_a: Point2, line_b: Point2, len: f64, p: Point2) -> f64 {
    (line_b - line_a).cross(p - line_a) / len
}

fn strictly_opposite(u: f64, v: f64) -> bool {
    (u > 0.0 && v < 0.0) || (u < 0.0 && v > 0.0)
}

/// Closest endpoint contact between two segments: the smallest distance from
/// an endpoint of either segment to the other segment, with the endpoint that
/// realizes it. Ties break lexicographically so the result is symmetric.
fn closest_endpoint_contact(s1: &Segment2, s2: &Segment2) -> (f64, Point2) {
    [
        (s2.distance_to_point(s1.a), s1.a),
        (s2.distance_to_point(s1.b), s1.b),
        (s1.distance_to_point(s2.a), s2.a),
        (s1.distance_to_point(s2.b), s2.b),
    ]
    .into_iter()
    .min_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.lex_cmp(y.1)))
    .expect("four candidates")
}

/// Euclidean distance between two closed segments (zero when they meet).
pub fn segment_distance(s1: &Segment2, s2: &Segment2) -> f64 {
    let (l1, l2) = (s1.length(), s2.length());
    let d2a = signed_line_distance(s1.a, s1.b, l1, s2.a);
    let d2b = signed_line_distance(s1.a, s1.b, l1, s2.b);
    let d1a = signed_line_distance(s2.a, s2.b, l2, s1.a);
    let d1b = signed_line_distance(s2.a, s2.b, l2, s1.b);
    if strictly_opposite(d2a, d2b) && strictly_opposite(d1a, d1b) {
        return 0.0;
    }
    closest_endpoint_contact(s1, s2).0
}

/// Classifies how two segments meet. Symmetric in its arguments.
///
/// Collinear segments whose extents meet end to end (overlap length within
/// `eps_len`) are reported as a touch at the shared endpoint; any positive
/// common length beyond `eps_len` is an overlap.
pub fn segment_relation(s1: &Segment2, s2: &Segment2, tol: &Tolerance) -> SegmentRelation {
    let eps = tol.eps_len;
    let (l1, l2) = (s1.length(), s2.length());
    let d2a = signed_line_distance(s1.a, s1.b, l1, s2.a);
    let d2b = signed_line_distance(s1.a, s1.b, l1, s2.b);
    let d1a = signed_line_distance(s2.a, s2.b, l2, s1.a);
    let d1b = signed_line_distance(s2.a, s2.b, l2, s1.b);

    if [d2a, d2b, d1a, d1b].iter().all(|d| d.abs() <= eps) {
        return collinear_relation(s1, s2, tol);
    }

    let (gap, contact) = closest_endpoint_contact(s1, s2);
    if gap <= eps {
        return SegmentRelation::TouchAtPoint(contact);
    }
    if strictly_opposite(d2a, d2b) && strictly_opposite(d1a, d1b) {
        return SegmentRelation::ProperCross;
    }
    SegmentRelation::Disjoint
}

fn collinear_relation(s1: &Segment2, s2: &Segment2, tol: &Tolerance) -> SegmentRelation {
    // Project both onto the direction of the canonically larger segment.
    let k1 = s1.key();
    let k2 = s2.key();
    let first_is_ref = match k1.0.total_cmp(&k2.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => k1.1.lex_cmp(k2.1).then_with(|| k1.2.lex_cmp(k2.2)) != std::cmp::Ordering::Greater,
    };
    let reference = if first_is_ref { s1 } else { s2 };
    let origin = reference.a;
    let dir = (reference.b - reference.a).unit().expect("segments are non-degenerate");
    let span = |s: &Segment2| {
        let (p, q) = ((s.a - origin).dot(dir), (s.b - origin).dot(dir));
        (p.min(q), p.max(q))
    };
    let (a0, a1) = span(s1);
    let (b0, b1) = span(s2);
    let overlap = a1.min(b1) - a0.max(b0);
    if overlap > tol.eps_len {
        SegmentRelation::Overlap
    } else if overlap < -tol.eps_len {
        SegmentRelation::Disjoint
    } else {
        SegmentRelation::TouchAtPoint(closest_endpoint_contact(s1, s2).1)
    }
}

/// Meets of the circle with the infinite line through `p` and `q`, ordered by
/// their parameter along `p → q`. A line within `eps_len` of tangency yields
/// the single tangency point.
pub fn circle_line_meet(
    center: Point2,
    radius: f64,
    p: Point2,
    q: Point2,
    tol: &Tolerance,
) -> Result<Vec<Point2>, GeomError> {
    if !(radius > 0.0) {
        return Err(GeomError::NonPositiveRadius(radius));
    }
    let dir = (q - p).unit().ok_or(GeomError::DegenerateLine)?;
    let along = (center - p).dot(dir);
    let foot = p + dir * along;
    let h = dir.cross(center - p).abs();
    if h > radius + tol.eps_len {
        Ok(Vec::new())
    } else if (h - radius).abs() <= tol.eps_len {
        Ok(vec![foot])
    } else {
        let half_chord = ((radius - h) * (radius + h)).sqrt();
        Ok(vec![dir * (along - half_chord) + p, dir * (along + half_chord) + p])
    }
}

/// Meets of the circle with the closed segment `p q`, ordered from `p`.
pub fn circle_segment_meet(
    center: Point2,
    radius: f64,
    p: Point2,
    q: Point2,
    tol: &Tolerance,
) -> Result<Vec<Point2>, GeomError> {
    let len = p.dist(q);
    let dir = (q - p).unit().ok_or(GeomError::DegenerateLine)?;
    Ok(circle_line_meet(center, radius, p, q, tol)?
        .into_iter()
        .filter(|x| {
            let t = (*x - p).dot(dir);
            t >= -tol.eps_len && t <= len + tol.eps_len
        })
        .collect())
}

/// Counterclockwise angle in `[0, 2π)` that rotates ray `vertex → from` onto
/// ray `vertex → to`.
pub fn angle_ccw(vertex: Point2, from: Point2, to: Point2) -> Result<f64, GeomError> {
    let u = from - vertex;
    let v = to - vertex;
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return Err(GeomError::DegenerateRay);
    }
    Ok(wrap_angle(u.cross(v).atan2(u.dot(v))))
}

/// Maps any finite angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed angle difference `to - from` wrapped into `(-π, π]`.
pub fn angle_delta(from: f64, to: f64) -> f64 {
    let d = wrap_angle(to - from);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadLocation {
    Inside,
    OnBoundary,
    Outside,
}

/// Locates `pt` relative to the quadrilateral with vertices `o, r, b, s` in
/// that cyclic order. Points within `eps_len` of an edge are on the boundary.
pub fn point_in_quadrilateral(
    pt: Point2,
    o: Point2,
    r: Point2,
    b: Point2,
    s: Point2,
    tol: &Tolerance,
) -> Result<QuadLocation, GeomError> {
    let verts = [o, r, b, s];
    let edges = [0, 1, 2, 3].map(|i| Segment2::new(verts[i], verts[(i + 1) % 4], tol));
    let mut segs = Vec::with_capacity(4);
    for e in edges {
        segs.push(e.map_err(|_| GeomError::NonSimpleQuadrilateral)?);
    }
    for (i, j) in [(0, 2), (1, 3)] {
        if segment_relation(&segs[i], &segs[j], tol) != SegmentRelation::Disjoint {
            return Err(GeomError::NonSimpleQuadrilateral);
        }
    }
    for i in 0..4 {
        if segment_relation(&segs[i], &segs[(i + 1) % 4], tol) == SegmentRelation::Overlap {
            return Err(GeomError::NonSimpleQuadrilateral);
        }
    }

    if segs.iter().any(|e| e.distance_to_point(pt) <= tol.eps_len) {
        return Ok(QuadLocation::OnBoundary);
    }
    // even-odd rule with a horizontal ray
    let mut inside = false;
    for i in 0..4 {
        let (p, q) = (verts[i], verts[(i + 1) % 4]);
        if (p.y > pt.y) != (q.y > pt.y) {
            let x = p.x + (pt.y - p.y) * (q.x - p.x) / (q.y - p.y);
            if pt.x < x {
                inside = !inside;
            }
        }
    }
    Ok(if inside {
        QuadLocation::Inside
    } else {
        QuadLocation::Outside
    })
}
