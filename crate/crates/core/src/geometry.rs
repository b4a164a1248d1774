//! Planar points, segments and polylines in world meters.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn distance_sq(self, o: Self) -> T {
        let d = self - o;
        d.dot(d)
    }

    /// Linear interpolation, `t = 0` gives `self`.
    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        Self::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    /// Total order on (x, y), used for deterministic output ordering.
    pub fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn cast<U: Scalar>(self) -> Point<U> {
        Point::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Parameter of the orthogonal projection of `p` onto segment `a`-`b`,
/// clamped to `[0, 1]`.
#[inline]
pub fn project_param<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq <= T::zero() {
        return T::zero();
    }
    ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one())
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
#[inline]
pub fn point_segment_distance<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let t = project_param(p, a, b);
    p.distance(a.lerp(b, t))
}

/// Outcome of intersecting two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentIntersection<T> {
    None,
    Point(Point<T>),
    /// Collinear overlap between the two points.
    Overlap(Point<T>, Point<T>),
}

/// Intersect closed segments `p0`-`p1` and `q0`-`q1`.
pub fn segment_intersection<T: Scalar>(
    p0: Point<T>,
    p1: Point<T>,
    q0: Point<T>,
    q1: Point<T>,
) -> SegmentIntersection<T> {
    let eps = T::geom_eps();
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    let qp = q0 - p0;
    let scale = r.norm().max(s.norm()).max(T::one());
    if denom.abs() <= eps * scale * scale {
        // parallel
        if qp.cross(r).abs() > eps * scale * scale {
            return SegmentIntersection::None;
        }
        let rr = r.dot(r);
        if rr <= T::zero() {
            if point_segment_distance(p0, q0, q1) <= eps {
                return SegmentIntersection::Point(p0);
            }
            return SegmentIntersection::None;
        }
        let t0 = qp.dot(r) / rr;
        let t1 = (q1 - p0).dot(r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(T::zero());
        let hi = hi.min(T::one());
        let tol = eps / rr.sqrt();
        if lo > hi + tol {
            return SegmentIntersection::None;
        }
        let a = endpoint_or_lerp(p0, p1, q0, q1, lo);
        let b = endpoint_or_lerp(p0, p1, q0, q1, hi);
        if a == b || (hi - lo) <= tol {
            return SegmentIntersection::Point(a);
        }
        return SegmentIntersection::Overlap(a, b);
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let tol_t = eps / r.norm().max(eps);
    let tol_u = eps / s.norm().max(eps);
    if t < -tol_t || t > T::one() + tol_t || u < -tol_u || u > T::one() + tol_u {
        return SegmentIntersection::None;
    }
    // Prefer exact shared endpoints to keep noding stable.
    for cand in [p0, p1, q0, q1] {
        let on_p = point_segment_distance(cand, p0, p1) <= eps;
        let on_q = point_segment_distance(cand, q0, q1) <= eps;
        if on_p && on_q {
            return SegmentIntersection::Point(cand);
        }
    }
    SegmentIntersection::Point(p0.lerp(p1, t.max(T::zero()).min(T::one())))
}

fn endpoint_or_lerp<T: Scalar>(
    p0: Point<T>,
    p1: Point<T>,
    q0: Point<T>,
    q1: Point<T>,
    t: T,
) -> Point<T> {
    let pt = p0.lerp(p1, t);
    let eps = T::geom_eps();
    for cand in [p0, p1, q0, q1] {
        if cand.distance(pt) <= eps {
            return cand;
        }
    }
    pt
}

/// Ordered chain of world points with at least two vertices and no
/// consecutive duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline<T> {
    pub id: u64,
    vertices: Vec<Point<T>>,
}

impl<T: Scalar> Polyline<T> {
    /// Builds a polyline, dropping consecutive duplicate vertices.
    pub fn new(id: u64, vertices: Vec<Point<T>>) -> Result<Self> {
        let mut clean: Vec<Point<T>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::Parameter("non-finite polyline vertex".into()));
            }
            if clean.last() != Some(&v) {
                clean.push(v);
            }
        }
        if clean.len() < 2 {
            return Err(Error::Parameter(
                "polyline needs at least two distinct vertices".into(),
            ));
        }
        Ok(Self { id, vertices: clean })
    }

    pub fn from_xy(id: u64, xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            id,
            xy.iter()
                .map(|&(x, y)| Point::new(T::lit(x), T::lit(y)))
                .collect(),
        )
    }

    #[inline]
    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point<T>> {
        self.vertices
    }

    #[inline]
    pub fn start(&self) -> Point<T> {
        self.vertices[0]
    }

    #[inline]
    pub fn end(&self) -> Point<T> {
        *self.vertices.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> T {
        self.segments()
            .fold(T::zero(), |acc, (a, b)| acc + a.distance(b))
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { id: self.id, vertices: v }
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }

    /// Distance from `p` to the nearest point on this polyline.
    pub fn distance_to(&self, p: Point<T>) -> T {
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    /// Points every `step` meters along the line, both ends included.
    pub fn sample(&self, step: T) -> Vec<Point<T>> {
        let mut out = vec![self.start()];
        for (a, b) in self.segments() {
            let len = a.distance(b);
            let n = (len / step).ceil().to_usize().unwrap_or(1).max(1);
            let nt = T::from_usize(n).unwrap();
            for i in 1..=n {
                out.push(a.lerp(b, T::from_usize(i).unwrap() / nt));
            }
        }
        out
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::of_points(&self.vertices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> BBox<T> {
    pub fn empty() -> Self {
        Self {
            min: Point::new(T::infinity(), T::infinity()),
            max: Point::new(T::neg_infinity(), T::neg_infinity()),
        }
    }

    pub fn of_points(pts: &[Point<T>]) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.include(*p);
        }
        b
    }

    pub fn include(&mut self, p: Point<T>) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, o: &Self) -> Self {
        let mut b = *self;
        b.include(o.min);
        b.include(o.max);
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn expand(&self, d: T) -> Self {
        Self {
            min: Point::new(self.min.x - d, self.min.y - d),
            max: Point::new(self.max.x + d, self.max.y + d),
        }
    }

    pub fn intersects(&self, o: &Self) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }
}

/// Uniform grid bucket index over segment bounding boxes.
pub(crate) struct SegmentGrid<T> {
    origin: Point<T>,
    cell: T,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl<T: Scalar> SegmentGrid<T> {
    pub fn build(segs: &[(Point<T>, Point<T>)], cell_hint: T) -> Self {
        let mut bb = BBox::empty();
        for (a, b) in segs {
            bb.include(*a);
            bb.include(*b);
        }
        if bb.is_empty() {
            bb = BBox { min: Point::default(), max: Point::default() };
        }
        let w = (bb.max.x - bb.min.x).max(T::geom_eps());
        let h = (bb.max.y - bb.min.y).max(T::geom_eps());
        // about 4 segments per cell on average, bounded grid size
        let target = T::from_usize(segs.len().max(1)).unwrap() / T::lit(4.0);
        let mut cell = (w * h / target.max(T::one())).sqrt().max(cell_hint);
        let max_cells = T::lit(1.0e6);
        while (w / cell) * (h / cell) > max_cells {
            cell = cell * T::lit(2.0);
        }
        let nx = (w / cell).floor().to_usize().unwrap_or(0) + 1;
        let ny = (h / cell).floor().to_usize().unwrap_or(0) + 1;
        let mut grid = Self {
            origin: bb.min,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (i, (a, b)) in segs.iter().enumerate() {
            let sb = BBox::of_points(&[*a, *b]);
            let (x0, y0, x1, y1) = grid.cell_range(&sb);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    grid.cells[cy * nx + cx].push(i);
                }
            }
        }
        grid
    }

    fn cell_range(&self, b: &BBox<T>) -> (usize, usize, usize, usize) {
        let f = |v: T, o: T, n: usize| -> usize {
            let c = ((v - o) / self.cell).floor();
            if c < T::zero() {
                0
            } else {
                c.to_usize().unwrap_or(usize::MAX).min(n - 1)
            }
        };
        (
            f(b.min.x, self.origin.x, self.nx),
            f(b.min.y, self.origin.y, self.ny),
            f(b.max.x, self.origin.x, self.nx),
            f(b.max.y, self.origin.y, self.ny),
        )
    }

    /// Indices of segments whose cells overlap `b`, sorted and unique.
    pub fn query(&self, b: &BBox<T>) -> Vec<usize> {
        let (x0, y0, x1, y1) = self.cell_range(b);
        let mut out = Vec::new();
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                out.extend_from_slice(&self.cells[cy * self.nx + cx]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
