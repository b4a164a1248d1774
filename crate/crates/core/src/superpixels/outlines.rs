//! Crack (pixel-edge) outlines between differing labels.

use std::collections::HashSet;

use crate::geometry::{Point, Polyline};
use crate::raster::LabelMap;

/// Crack graph on the (w+1) x (h+1) lattice of pixel corners.
pub(crate) struct CrackGraph {
    cw: usize,
    ch: usize,
    /// Edge to the right neighbour corner / to the corner below.
    right: Vec<bool>,
    down: Vec<bool>,
}

impl CrackGraph {
    pub(crate) fn new(labels: &LabelMap) -> Self {
        let (w, h) = (labels.width, labels.height);
        let (cw, ch) = (w + 1, h + 1);
        let mut right = vec![false; cw * ch];
        let mut down = vec![false; cw * ch];
        for cy in 1..h {
            for cx in 0..w {
                if labels.at(cx, cy - 1) != labels.at(cx, cy) {
                    right[cy * cw + cx] = true;
                }
            }
        }
        for cy in 0..h {
            for cx in 1..w {
                if labels.at(cx - 1, cy) != labels.at(cx, cy) {
                    down[cy * cw + cx] = true;
                }
            }
        }
        Self { cw, ch, right, down }
    }

    pub(crate) fn neighbors(&self, v: usize) -> Vec<usize> {
        let (x, y) = (v % self.cw, v / self.cw);
        let mut out = Vec::with_capacity(4);
        if self.right[v] {
            out.push(v + 1);
        }
        if self.down[v] {
            out.push(v + self.cw);
        }
        if x > 0 && self.right[v - 1] {
            out.push(v - 1);
        }
        if y > 0 && self.down[v - self.cw] {
            out.push(v - self.cw);
        }
        out
    }
}

/// Trace label-discontinuity cracks into polylines. Shared boundaries are
/// emitted once; polylines break at corners where the crack graph does not
/// simply pass through (junctions and image border ends). Collinear
/// intermediate corners are dropped.
pub fn superpixel_outlines(labels: &LabelMap) -> Vec<Polyline<f64>> {
    let g = CrackGraph::new(labels);
    let n = g.cw * g.ch;
    let nbrs: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v)).collect();
    let is_node = |v: usize| !nbrs[v].is_empty() && nbrs[v].len() != 2;
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut chains: Vec<Vec<usize>> = Vec::new();

    let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| {
        let mut chain = vec![start, first];
        used.insert(key(start, first));
        let (mut prev, mut cur) = (start, first);
        while !is_node(cur) && cur != start {
            let Some(next) = nbrs[cur].iter().copied().find(|&x| x != prev && !used.contains(&key(cur, x))) else {
                break;
            };
            used.insert(key(cur, next));
            chain.push(next);
            prev = cur;
            cur = next;
        }
        chain
    };

    for v in 0..n {
        if !is_node(v) {
            continue;
        }
        for &u in &nbrs[v] {
            if !used.contains(&key(v, u)) {
                chains.push(walk(v, u, &mut used));
            }
        }
    }
    for v in 0..n {
        if nbrs[v].len() == 2 {
            if let Some(&u) = nbrs[v].iter().find(|&&u| !used.contains(&key(v, u))) {
                chains.push(walk(v, u, &mut used));
            }
        }
    }

    let t = labels.transform;
    let cw = g.cw;
    chains
        .into_iter()
        .enumerate()
        .filter_map(|(id, chain)| {
            let corners: Vec<(usize, usize)> = chain.iter().map(|&v| (v % cw, v / cw)).collect();
            let mut keep = vec![corners[0]];
            for k in 1..corners.len() - 1 {
                let (a, b, c) = (corners[k - 1], corners[k], corners[k + 1]);
                let collinear = (a.0 == b.0 && b.0 == c.0) || (a.1 == b.1 && b.1 == c.1);
                if !collinear {
                    keep.push(b);
                }
            }
            keep.push(*corners.last().unwrap());
            let pts: Vec<Point<f64>> = keep
                .into_iter()
                .map(|(x, y)| t.corner_to_world(x as f64, y as f64))
                .collect();
            Polyline::new(id as u64, pts).ok()
        })
        .collect()
}
