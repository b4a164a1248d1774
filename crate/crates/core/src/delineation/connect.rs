//! Shortest paths and approximate Steiner trees on a line network.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};
use crate::scalar::Scalar;
use crate::vectornet::LineNetwork;

use super::{classify_sinuosity, simplify_line, sinuosity, TrafficLight};

/// Candidate boundary produced by [`connect_nodes`]. A path has one part;
/// a branching tree has one part per branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLine<T> {
    pub parts: Vec<Polyline<T>>,
    pub terminals: Vec<usize>,
    /// Network edges used, sorted.
    pub edges: Vec<usize>,
    /// Line the sinuosity is measured on: the whole path, or the longest
    /// terminal-to-terminal path of a tree.
    pub scored: Polyline<T>,
    pub sinuosity: T,
    pub color: TrafficLight,
    pub simplified: bool,
}

impl<T: Scalar> CandidateLine<T> {
    pub(crate) fn from_parts(parts: Vec<Polyline<T>>, scored: Polyline<T>, terminals: Vec<usize>, edges: Vec<usize>) -> Result<Self> {
        let s = sinuosity(&scored)?;
        Ok(Self {
            parts,
            terminals,
            edges,
            scored,
            sinuosity: s,
            color: classify_sinuosity(s)?,
            simplified: false,
        })
    }

    pub fn is_path(&self) -> bool {
        self.parts.len() == 1
    }

    pub fn length(&self) -> T {
        self.parts.iter().fold(T::zero(), |a, p| a + p.length())
    }

    /// Douglas-Peucker on every part; sinuosity and color are recomputed.
    pub fn simplify(&mut self, tolerance: T) -> Result<()> {
        self.parts = self.parts.iter().map(|p| simplify_line(p, tolerance)).collect();
        self.scored = if self.is_path() { self.parts[0].clone() } else { simplify_line(&self.scored, tolerance) };
        self.rescore()?;
        self.simplified = true;
        Ok(())
    }

    /// Swap in user-edited geometry; terminals are kept as metadata.
    pub fn replace_geometry(&mut self, line: Polyline<T>) -> Result<()> {
        let s = sinuosity(&line)?;
        self.parts = vec![line.clone()];
        self.scored = line;
        self.sinuosity = s;
        self.color = classify_sinuosity(s)?;
        Ok(())
    }

    fn rescore(&mut self) -> Result<()> {
        self.sinuosity = sinuosity(&self.scored)?;
        self.color = classify_sinuosity(self.sinuosity)?;
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry<T> {
    dist: T,
    node: usize,
}

impl<T: Scalar> Eq for Entry<T> {}

impl<T: Scalar> Ord for Entry<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (dist, node)
        o.dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| o.node.cmp(&self.node))
    }
}

impl<T: Scalar> PartialOrd for Entry<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Single-source Dijkstra tree.
struct Tree<T> {
    dist: Vec<Option<T>>,
    /// (previous node, edge) on the shortest path.
    pred: Vec<Option<(usize, usize)>>,
}

fn dijkstra<T: Scalar>(adj: &[Vec<(usize, usize)>], net: &LineNetwork<T>, src: usize) -> Tree<T> {
    let n = adj.len();
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(T::zero());
    heap.push(Entry { dist: T::zero(), node: src });
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(e, v) in &adj[u] {
            if v == u || done[v] {
                continue;
            }
            let nd = d + net.edges[e].length;
            if dist[v].map_or(true, |old| nd < old) {
                dist[v] = Some(nd);
                pred[v] = Some((u, e));
                heap.push(Entry { dist: nd, node: v });
            }
        }
    }
    Tree { dist, pred }
}

impl<T: Scalar> Tree<T> {
    /// Edges from the source to `to`, in walking order.
    fn edges_to(&self, to: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = to;
        while let Some((prev, e)) = self.pred[cur] {
            out.push(e);
            cur = prev;
        }
        out.reverse();
        out
    }
}

/// Shortest path between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult<T> {
    pub length: T,
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

fn check_terminals<T: Scalar>(net: &LineNetwork<T>, terminals: &[usize]) -> Result<()> {
    if let Some(&bad) = terminals.iter().find(|&&t| t >= net.nodes.len()) {
        return Err(Error::UnknownNode(bad));
    }
    Ok(())
}

/// Dijkstra by edge length; `None` if `b` is unreachable from `a`.
pub fn shortest_path<T: Scalar>(net: &LineNetwork<T>, a: usize, b: usize) -> Result<Option<PathResult<T>>> {
    check_terminals(net, &[a, b])?;
    let tree = dijkstra(&net.adjacency(), net, a);
    Ok(tree.dist[b].map(|length| {
        let edges = tree.edges_to(b);
        let mut nodes = vec![a];
        for &e in &edges {
            nodes.push(net.edges[e].other(*nodes.last().unwrap()));
        }
        PathResult { length, nodes, edges }
    }))
}

/// Concatenate edges walked from `start`.
fn walk_polyline<T: Scalar>(net: &LineNetwork<T>, start: usize, edges: &[usize]) -> Result<Polyline<T>> {
    let mut pts: Vec<Point<T>> = vec![net.nodes[start].point];
    let mut cur = start;
    for &e in edges {
        let g = net.edges[e].oriented_from(cur);
        pts.extend_from_slice(&g.vertices()[1..]);
        cur = net.edges[e].other(cur);
    }
    Polyline::new(0, pts)
}

/// Connect terminals along the network. Two terminals give the shortest
/// path; more give a shortest-path-metric MST expanded to network edges,
/// re-spanned and stripped of non-terminal leaves.
pub fn connect_nodes<T: Scalar>(net: &LineNetwork<T>, terminals: &[usize]) -> Result<CandidateLine<T>> {
    check_terminals(net, terminals)?;
    let distinct: BTreeSet<usize> = terminals.iter().copied().collect();
    if terminals.len() < 2 || distinct.len() != terminals.len() {
        return Err(Error::Parameter("need at least two distinct terminal nodes".into()));
    }
    let adj = net.adjacency();
    let trees: Vec<Tree<T>> = terminals.iter().map(|&t| dijkstra(&adj, net, t)).collect();
    let k = terminals.len();
    let mut unreachable = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if trees[i].dist[terminals[j]].is_none() {
                unreachable.push((terminals[i], terminals[j]));
            }
        }
    }
    if !unreachable.is_empty() {
        return Err(Error::NoPath(unreachable));
    }

    if k == 2 {
        let edges = trees[0].edges_to(terminals[1]);
        let line = walk_polyline(net, terminals[0], &edges)?;
        let mut sorted = edges;
        sorted.sort_unstable();
        return CandidateLine::from_parts(vec![line.clone()], line, terminals.to_vec(), sorted);
    }

    // Prim on the terminal metric closure
    let metric = |i: usize, j: usize| trees[i].dist[terminals[j]].unwrap();
    let mut in_tree = vec![false; k];
    let mut best: Vec<(T, usize)> = (0..k).map(|j| (metric(0, j), 0)).collect();
    in_tree[0] = true;
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for _ in 1..k {
        let j = (0..k)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| best[a].0.partial_cmp(&best[b].0).unwrap().then(a.cmp(&b)))
            .unwrap();
        in_tree[j] = true;
        union.extend(trees[best[j].1].edges_to(terminals[j]));
        for m in 0..k {
            if !in_tree[m] && metric(j, m) < best[m].0 {
                best[m] = (metric(j, m), j);
            }
        }
    }

    // Kruskal over the union subgraph, then prune non-terminal leaves
    let mut order: Vec<usize> = union.into_iter().collect();
    order.sort_by(|&a, &b| net.edges[a].length.partial_cmp(&net.edges[b].length).unwrap().then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..net.nodes.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree_edges: BTreeSet<usize> = BTreeSet::new();
    for e in order {
        let (a, b) = (find(&mut parent, net.edges[e].node_a), find(&mut parent, net.edges[e].node_b));
        if a != b {
            parent[a] = b;
            tree_edges.insert(e);
        }
    }
    let degree = |edges: &BTreeSet<usize>, v: usize| {
        edges.iter().filter(|&&e| net.edges[e].node_a == v || net.edges[e].node_b == v).count()
    };
    loop {
        let leaf_edge = tree_edges.iter().copied().find(|&e| {
            let ed = &net.edges[e];
            [ed.node_a, ed.node_b]
                .iter()
                .any(|&v| !distinct.contains(&v) && degree(&tree_edges, v) == 1)
        });
        match leaf_edge {
            Some(e) => {
                tree_edges.remove(&e);
            }
            None => break,
        }
    }
    build_tree_candidate(net, terminals, tree_edges)
}

fn build_tree_candidate<T: Scalar>(net: &LineNetwork<T>, terminals: &[usize], tree_edges: BTreeSet<usize>) -> Result<CandidateLine<T>> {
    let mut local: Vec<Vec<(usize, usize)>> = vec![Vec::new(); net.nodes.len()];
    for &e in &tree_edges {
        let ed = &net.edges[e];
        local[ed.node_a].push((e, ed.node_b));
        local[ed.node_b].push((e, ed.node_a));
    }
    let edges: Vec<usize> = tree_edges.iter().copied().collect();

    // longest terminal-to-terminal path (tree paths are unique)
    let mut longest: Option<(T, usize, Vec<usize>)> = None;
    for (i, &t) in terminals.iter().enumerate() {
        let tree = dijkstra(&local, net, t);
        for &u in &terminals[i + 1..] {
            let d = tree.dist[u].unwrap();
            if longest.as_ref().map_or(true, |(l, _, _)| d > *l) {
                longest = Some((d, t, tree.edges_to(u)));
            }
        }
    }
    let (_, from, path) = longest.unwrap();
    let scored = walk_polyline(net, from, &path)?;

    let is_path = local.iter().all(|l| l.len() <= 2);
    if is_path {
        // orient from whichever end comes first in the selection
        let ends: Vec<usize> = (0..local.len()).filter(|&v| local[v].len() == 1).collect();
        let rank = |v: usize| terminals.iter().position(|&t| t == v).unwrap_or(usize::MAX);
        let start = *ends.iter().min_by_key(|&&v| (rank(v), v)).unwrap();
        let walk = walk_edges(&local, start);
        let line = walk_polyline(net, start, &walk)?;
        return CandidateLine::from_parts(vec![line.clone()], line, terminals.to_vec(), edges);
    }

    // branches: chains between leaves and branch points
    let is_stop = |v: usize| local[v].len() != 2;
    let mut used = BTreeSet::new();
    let mut parts = Vec::new();
    for v in 0..local.len() {
        if local[v].is_empty() || !is_stop(v) {
            continue;
        }
        for &(e0, _) in &local[v] {
            if used.contains(&e0) {
                continue;
            }
            let mut chain = vec![e0];
            used.insert(e0);
            let mut cur = net.edges[e0].other(v);
            while !is_stop(cur) {
                let &(e, _) = local[cur].iter().find(|(e, _)| !used.contains(e)).unwrap();
                used.insert(e);
                chain.push(e);
                cur = net.edges[e].other(cur);
            }
            parts.push(walk_polyline(net, v, &chain)?);
        }
    }
    CandidateLine::from_parts(parts, scored, terminals.to_vec(), edges)
}

fn walk_edges(local: &[Vec<(usize, usize)>], start: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut prev_edge, mut cur) = (usize::MAX, start);
    while let Some(&(e, v)) = local[cur].iter().find(|(e, _)| *e != prev_edge) {
        out.push(e);
        prev_edge = e;
        cur = v;
    }
    out
}
