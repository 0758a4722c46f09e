//! Planar geometry shared by every stage of the layout pipeline.

mod frechet;
mod segment;

pub use frechet::{
    integral_frechet, partial_frechet, wrapped_angle_diff, DirectionProfile, MatchResult,
    DEFAULT_SAMPLES,
};
pub use segment::{
    closest_point_on_segment, count_crossings, crossing_pairs, point_segment_distance,
    segment_intersection_point, segments_intersect, Segment, SharedEndpoint,
};

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or vector) in abstract map units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Direction angle in (-π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise rotation by 90°.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, s: f64) -> Point {
        Point::new(self.x / s, self.y / s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of_points<I: IntoIterator<Item = Point>>(points: I) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BBox {
            min: first,
            max: first,
        };
        for p in it {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(mut self, o: BBox) -> BBox {
        self.include(o.min);
        self.include(o.max);
        self
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, margin: f64) -> BBox {
        BBox {
            min: self.min - Point::new(margin, margin),
            max: self.max + Point::new(margin, margin),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }
}

/// Uniform scale followed by translation: `p ↦ scale·p + offset`. No rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub offset: Point,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        offset: Point::ZERO,
    };

    pub fn apply(&self, p: Point) -> Point {
        p * self.scale + self.offset
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            scale: self.scale * inner.scale,
            offset: self.apply(inner.offset),
        }
    }
}

/// Similarity mapping `source` onto `target`: uniform scale equal to the smaller
/// axis ratio, centers coincide.
pub fn bbox_align(source: &BBox, target: &BBox) -> Result<Similarity> {
    if source.is_degenerate() {
        return Err(Error::DegenerateBBox("shape"));
    }
    if target.is_degenerate() {
        return Err(Error::DegenerateBBox("target"));
    }
    let scale = (target.width() / source.width()).min(target.height() / source.height());
    let offset = target.center() - source.center() * scale;
    Ok(Similarity { scale, offset })
}

/// An open or closed polyline. Closed polylines do not repeat the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        let mut vertices = vertices;
        if closed && vertices.len() > 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 2 {
            return Err(Error::DegeneratePolyline(format!(
                "{} vertices, need at least 2",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegeneratePolyline("non-finite vertex".into()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::DegeneratePolyline(format!(
                "repeated vertex at index {}",
                i + 1
            )));
        }
        if closed && vertices.len() < 3 {
            return Err(Error::DegeneratePolyline(
                "closed polyline needs at least 3 vertices".into(),
            ));
        }
        Ok(Self { vertices, closed })
    }

    /// Builds a polyline after dropping consecutive duplicate vertices.
    pub fn new_dedup(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        let mut v: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if v.last() != Some(&p) {
                v.push(p);
            }
        }
        if closed {
            while v.len() > 1 && v.first() == v.last() {
                v.pop();
            }
        }
        Self::new(v, closed)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..self.segment_count()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(self.vertices.iter().copied()).expect("non-empty polyline")
    }

    pub fn transformed(&self, t: &Similarity) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|&p| t.apply(p)).collect(),
            closed: self.closed,
        }
    }

    /// Vertex sequence with the closing vertex repeated for closed polylines.
    pub fn unrolled(&self) -> Vec<Point> {
        let mut v = self.vertices.clone();
        if self.closed {
            v.push(self.vertices[0]);
        }
        v
    }

    /// Closest point on the polyline, with its arc-length fraction in [0, 1].
    pub fn closest_point(&self, p: Point) -> (Point, f64) {
        let total = self.length();
        let mut best = (self.vertices[0], 0.0, f64::INFINITY);
        let mut acc = 0.0;
        for (a, b) in self.segments() {
            let (q, t) = closest_point_on_segment(p, a, b);
            let d = q.dist(p);
            let seg = a.dist(b);
            if d < best.2 {
                best = (q, acc + t * seg, d);
            }
            acc += seg;
        }
        (best.0, if total > 0.0 { best.1 / total } else { 0.0 })
    }

    /// Splits every segment longer than `max_seg` into equal parts; input vertices are kept.
    pub fn resample(&self, max_seg: f64) -> Result<Polyline> {
        resample(self, max_seg)
    }
}

/// Subdivides segments so that none is longer than `max_seg`, preserving all vertices.
pub fn resample(line: &Polyline, max_seg: f64) -> Result<Polyline> {
    if !(max_seg > 0.0) || !max_seg.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "resample spacing must be positive, got {max_seg}"
        )));
    }
    let mut out = Vec::with_capacity(line.vertices.len());
    for (a, b) in line.segments() {
        out.push(a);
        let len = a.dist(b);
        let parts = (len / max_seg).ceil().max(1.0) as usize;
        for k in 1..parts {
            out.push(a.lerp(b, k as f64 / parts as f64));
        }
    }
    if !line.closed {
        out.push(*line.vertices.last().unwrap());
    }
    Polyline::new(out, line.closed)
}

/// Wraps an angle into [-π, π).
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = (theta + PI).rem_euclid(TAU) - PI;
    if t >= PI {
        t -= TAU;
    }
    t
}
