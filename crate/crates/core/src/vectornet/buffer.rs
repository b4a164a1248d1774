//! Keep the parts of candidate lines that lie near a reference layer.

use rayon::prelude::*;

use crate::geometry::{BBox, Point, Polyline, SegmentGrid};
use crate::scalar::Scalar;

/// Output of [`buffer_filter`].
#[derive(Debug, Clone, PartialEq)]
pub struct BufferFiltered<T> {
    pub lines: Vec<Polyline<T>>,
    /// Set when the reference layer was empty and nothing could be kept.
    pub warning: Option<String>,
}

/// `[lo, hi]` with `lo <= hi`, or `None`.
type Interval<T> = Option<(T, T)>;

/// Parameter range where `f0 + f1 t` lies in `[lo, hi]`.
fn linear_range<T: Scalar>(f0: T, f1: T, lo: T, hi: T) -> Interval<T> {
    if f1.abs() <= T::epsilon() {
        return if f0 >= lo && f0 <= hi {
            Some((T::neg_infinity(), T::infinity()))
        } else {
            None
        };
    }
    let a = (lo - f0) / f1;
    let b = (hi - f0) / f1;
    Some((a.min(b), a.max(b)))
}

/// Parameter range where `|p + t d - c| <= r`.
fn disk_range<T: Scalar>(p: Point<T>, d: Point<T>, c: Point<T>, r: T) -> Interval<T> {
    let f = p - c;
    let a = d.dot(d);
    let b = f.dot(d);
    let cc = f.dot(f) - r * r;
    let disc = b * b - a * cc;
    if disc < T::zero() || a <= T::zero() {
        return None;
    }
    let s = disc.sqrt();
    Some(((-b - s) / a, (-b + s) / a))
}

fn intersect<T: Scalar>(x: Interval<T>, y: Interval<T>) -> Interval<T> {
    match (x, y) {
        (Some((a, b)), Some((c, d))) => {
            let lo = a.max(c);
            let hi = b.min(d);
            (lo <= hi).then_some((lo, hi))
        }
        _ => None,
    }
}

/// Parameters of segment `p`-`q` within distance `r` of segment `a`-`b`.
/// The capsule is convex, so the result is a single interval.
pub(crate) fn capsule_range<T: Scalar>(p: Point<T>, q: Point<T>, a: Point<T>, b: Point<T>, r: T) -> Interval<T> {
    let d = q - p;
    let mut parts = vec![disk_range(p, d, a, r), disk_range(p, d, b, r)];
    let ab = b - a;
    let len = ab.norm();
    if len > T::zero() {
        let u = ab * (T::one() / len);
        let rel = p - a;
        let along = linear_range(rel.dot(u), d.dot(u), T::zero(), len);
        let across = linear_range(u.cross(rel), u.cross(d), -r, r);
        parts.push(intersect(along, across));
    }
    let hull = parts.into_iter().flatten().fold(None, |acc: Interval<T>, (lo, hi)| match acc {
        None => Some((lo, hi)),
        Some((a, b)) => Some((a.min(lo), b.max(hi))),
    })?;
    let lo = hull.0.max(T::zero());
    let hi = hull.1.min(T::one());
    (lo <= hi).then_some((lo, hi))
}

fn merge_intervals<T: Scalar>(mut v: Vec<(T, T)>) -> Vec<(T, T)> {
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(T, T)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Split each candidate line where it leaves the `radius` buffer around
/// the reference lines and keep the inside pieces.
pub fn buffer_filter<T: Scalar>(
    slic_lines: &[Polyline<T>],
    gpb_lines: &[Polyline<T>],
    radius: T,
) -> BufferFiltered<T> {
    if gpb_lines.is_empty() {
        log::warn!("buffer filter: empty reference layer, nothing kept");
        return BufferFiltered {
            lines: Vec::new(),
            warning: Some("empty reference layer".into()),
        };
    }
    if radius.is_infinite() {
        return BufferFiltered { lines: slic_lines.to_vec(), warning: None };
    }
    let r = radius.max(T::zero()) + T::geom_eps();
    let segs: Vec<(Point<T>, Point<T>)> = gpb_lines.iter().flat_map(|l| l.segments()).collect();
    let grid = SegmentGrid::build(&segs, r);

    let pieces: Vec<Vec<Vec<Point<T>>>> = slic_lines
        .par_iter()
        .map(|line| {
            let mut out: Vec<Vec<Point<T>>> = Vec::new();
            let mut open: Option<Vec<Point<T>>> = None;
            for (p, q) in line.segments() {
                let query = BBox::of_points(&[p, q]).expand(r);
                let mut cover = Vec::new();
                for k in grid.query(&query) {
                    let (a, b) = segs[k];
                    if let Some(iv) = capsule_range(p, q, a, b, r) {
                        let full = iv.0 <= T::zero() && iv.1 >= T::one();
                        cover.push(iv);
                        if full {
                            break;
                        }
                    }
                }
                let cover = merge_intervals(cover);
                let at = |t: T| -> Point<T> {
                    if t <= T::zero() {
                        p
                    } else if t >= T::one() {
                        q
                    } else {
                        p.lerp(q, t)
                    }
                };
                if cover.first().map_or(true, |iv| iv.0 > T::zero()) {
                    if let Some(done) = open.take() {
                        out.push(done);
                    }
                }
                for (lo, hi) in cover {
                    let mut cur = match open.take() {
                        Some(c) if lo <= T::zero() => c,
                        Some(c) => {
                            out.push(c);
                            vec![at(lo)]
                        }
                        None => vec![at(lo)],
                    };
                    cur.push(at(hi));
                    if hi >= T::one() {
                        open = Some(cur);
                    } else {
                        out.push(cur);
                    }
                }
            }
            if let Some(done) = open {
                out.push(done);
            }
            out
        })
        .collect();

    let lines = pieces
        .into_iter()
        .flatten()
        .filter_map(|pts| Polyline::new(0, pts).ok())
        // crossings at a point leave slivers of width ~eps
        .filter(|l| l.length() > T::lit(4.0) * T::geom_eps())
        .enumerate()
        .map(|(i, l)| l.with_id(i as u64))
        .collect();
    BufferFiltered { lines, warning: None }
}
