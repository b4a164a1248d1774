//! Vertex/segment graph shared by cleaning and network construction.

use std::collections::{HashMap, HashSet};

use crate::geometry::Point;
use crate::scalar::Scalar;

pub(crate) type PKey = (u64, u64);

#[inline]
pub(crate) fn pkey<T: Scalar>(p: Point<T>) -> PKey {
    // + 0.0 folds -0.0 into 0.0
    ((p.x.as_f64() + 0.0).to_bits(), (p.y.as_f64() + 0.0).to_bits())
}

pub(crate) struct SegGraph<T> {
    pub pts: Vec<Point<T>>,
    pub adj: Vec<Vec<usize>>,
}

impl<T: Scalar> SegGraph<T> {
    /// Graph over unique, non-degenerate segments.
    pub fn build(segs: &[(Point<T>, Point<T>)]) -> Self {
        let mut index: HashMap<PKey, usize> = HashMap::new();
        let mut pts = Vec::new();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut id = |p: Point<T>, pts: &mut Vec<Point<T>>, adj: &mut Vec<Vec<usize>>| -> usize {
            *index.entry(pkey(p)).or_insert_with(|| {
                pts.push(p);
                adj.push(Vec::new());
                pts.len() - 1
            })
        };
        for &(a, b) in segs {
            let ia = id(a, &mut pts, &mut adj);
            let ib = id(b, &mut pts, &mut adj);
            if ia == ib {
                continue;
            }
            let k = (ia.min(ib), ia.max(ib));
            if seen.insert(k) {
                adj[ia].push(ib);
                adj[ib].push(ia);
            }
        }
        Self { pts, adj }
    }

    /// Maximal chains between vertices flagged by `is_node`; cycles with
    /// no node vertex start at their lexicographically lowest vertex.
    pub fn chains(&self, is_node: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut used: HashSet<(usize, usize)> = HashSet::new();
        let mut out = Vec::new();
        let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| {
            let mut chain = vec![start, first];
            used.insert(key(start, first));
            let (mut prev, mut cur) = (start, first);
            while !is_node(cur) && cur != start {
                let Some(next) = self.adj[cur]
                    .iter()
                    .copied()
                    .find(|&x| x != prev && !used.contains(&key(cur, x)))
                else {
                    break;
                };
                used.insert(key(cur, next));
                chain.push(next);
                prev = cur;
                cur = next;
            }
            chain
        };
        let mut order: Vec<usize> = (0..self.pts.len()).collect();
        order.sort_by(|&a, &b| self.pts[a].lex_cmp(&self.pts[b]));
        for &v in &order {
            if !is_node(v) {
                continue;
            }
            for &u in &self.adj[v] {
                if !used.contains(&key(v, u)) {
                    out.push(walk(v, u, &mut used));
                }
            }
        }
        for &v in &order {
            if let Some(&u) = self.adj[v].iter().find(|&&u| !used.contains(&key(v, u))) {
                out.push(walk(v, u, &mut used));
            }
        }
        out
    }

    pub fn chain_length(&self, chain: &[usize]) -> T {
        chain
            .windows(2)
            .fold(T::zero(), |acc, w| acc + self.pts[w[0]].distance(self.pts[w[1]]))
    }

    /// Orient a chain canonically: open chains start at the smaller end,
    /// closed chains start at their node (or lowest vertex) and run toward
    /// the smaller neighbour.
    pub fn canonical(&self, mut chain: Vec<usize>) -> Vec<usize> {
        let n = chain.len();
        let lt = |a: usize, b: usize| self.pts[a].lex_cmp(&self.pts[b]) == std::cmp::Ordering::Less;
        if chain[0] != chain[n - 1] {
            if lt(chain[n - 1], chain[0]) {
                chain.reverse();
            }
            return chain;
        }
        if n > 2 && lt(chain[n - 2], chain[1]) {
            chain.reverse();
        }
        chain
    }
}
