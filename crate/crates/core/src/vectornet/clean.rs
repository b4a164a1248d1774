//! Snapping, noding, deduplication and dangle removal.

use std::collections::HashSet;

use crate::geometry::{segment_intersection, BBox, Point, Polyline, SegmentGrid, SegmentIntersection};
use crate::scalar::Scalar;

use super::graph::{pkey, SegGraph};

const MAX_NODING_ROUNDS: usize = 8;

fn snap<T: Scalar>(p: Point<T>, tol: T) -> Point<T> {
    if tol <= T::zero() {
        return p;
    }
    Point::new((p.x / tol).round() * tol, (p.y / tol).round() * tol)
}

fn dedupe<T: Scalar>(segs: Vec<(Point<T>, Point<T>)>) -> Vec<(Point<T>, Point<T>)> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(segs.len());
    for (a, b) in segs {
        if pkey(a) == pkey(b) {
            continue;
        }
        let (ka, kb) = (pkey(a), pkey(b));
        if seen.insert(if ka < kb { (ka, kb) } else { (kb, ka) }) {
            out.push((a, b));
        }
    }
    out
}

/// One noding round; returns the split segments and whether anything
/// changed.
fn node_round<T: Scalar>(segs: &[(Point<T>, Point<T>)], tol: T) -> (Vec<(Point<T>, Point<T>)>, bool) {
    let grid = SegmentGrid::build(segs, tol.max(T::geom_eps()));
    let mut cuts: Vec<Vec<Point<T>>> = vec![Vec::new(); segs.len()];
    for (i, &(a, b)) in segs.iter().enumerate() {
        let bb = BBox::of_points(&[a, b]).expand(T::geom_eps());
        for j in grid.query(&bb) {
            if j <= i {
                continue;
            }
            let (c, d) = segs[j];
            let pts = match segment_intersection(a, b, c, d) {
                SegmentIntersection::None => continue,
                SegmentIntersection::Point(p) => vec![p],
                SegmentIntersection::Overlap(p, q) => vec![p, q],
            };
            for p in pts {
                let p = snap(p, tol);
                if pkey(p) != pkey(a) && pkey(p) != pkey(b) {
                    cuts[i].push(p);
                }
                if pkey(p) != pkey(c) && pkey(p) != pkey(d) {
                    cuts[j].push(p);
                }
            }
        }
    }
    let mut changed = false;
    let mut out = Vec::with_capacity(segs.len());
    for (i, &(a, b)) in segs.iter().enumerate() {
        if cuts[i].is_empty() {
            out.push((a, b));
            continue;
        }
        changed = true;
        let mut pts = std::mem::take(&mut cuts[i]);
        let d = b - a;
        pts.sort_by(|p, q| (*p - a).dot(d).partial_cmp(&(*q - a).dot(d)).unwrap());
        let mut prev = a;
        for p in pts.into_iter().chain(std::iter::once(b)) {
            if pkey(p) != pkey(prev) {
                out.push((prev, p));
                prev = p;
            }
        }
    }
    (dedupe(out), changed)
}

/// Snap to a `snap_tol` lattice, node at all intersections, drop
/// zero-length and duplicate segments, prune short dangles to a fixpoint
/// and merge the result into maximal chains.
pub fn clean_topology<T: Scalar>(lines: &[Polyline<T>], snap_tol: T, min_dangle: T) -> Vec<Polyline<T>> {
    let tol = snap_tol.max(T::zero());
    let mut segs: Vec<(Point<T>, Point<T>)> = lines
        .iter()
        .flat_map(|l| l.segments())
        .map(|(a, b)| (snap(a, tol), snap(b, tol)))
        .collect();
    segs = dedupe(segs);
    for _ in 0..MAX_NODING_ROUNDS {
        let (next, changed) = node_round(&segs, tol);
        segs = next;
        if !changed {
            break;
        }
    }

    // dangle pruning
    loop {
        let g = SegGraph::build(&segs);
        let degree = |v: usize| g.adj[v].len();
        let chains = g.chains(&|v| degree(v) != 2);
        let mut drop: HashSet<(usize, usize)> = HashSet::new();
        for c in &chains {
            let (s, e) = (c[0], *c.last().unwrap());
            let dangling = degree(s) == 1 || degree(e) == 1;
            if dangling && g.chain_length(c) < min_dangle {
                for w in c.windows(2) {
                    drop.insert((w[0].min(w[1]), w[0].max(w[1])));
                }
            }
        }
        if drop.is_empty() {
            let mut out: Vec<Vec<Point<T>>> = chains
                .into_iter()
                .map(|c| g.canonical(c).into_iter().map(|v| g.pts[v]).collect())
                .collect();
            out.sort_by(|a: &Vec<Point<T>>, b| {
                a.iter()
                    .zip(b.iter())
                    .map(|(p, q)| p.lex_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(a.len().cmp(&b.len()))
            });
            return out
                .into_iter()
                .filter_map(|pts| Polyline::new(0, pts).ok())
                .enumerate()
                .map(|(i, l)| l.with_id(i as u64))
                .collect();
        }
        let mut kept = Vec::with_capacity(segs.len());
        let mut index = std::collections::HashMap::new();
        for (i, p) in g.pts.iter().enumerate() {
            index.insert(pkey(*p), i);
        }
        for (a, b) in segs {
            let (ia, ib) = (index[&pkey(a)], index[&pkey(b)]);
            if !drop.contains(&(ia.min(ib), ia.max(ib))) {
                kept.push((a, b));
            }
        }
        segs = kept;
    }
}
