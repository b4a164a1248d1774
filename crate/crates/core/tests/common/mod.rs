//! Independent oracles and random instance generators.
#![allow(dead_code)]

use boundline::assessment::{AssessmentConfig, BinaryRaster, Confusion};
use boundline::geometry::{Point, Polyline};
use boundline::vectornet::{Edge, LineNetwork, Node};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random graph with straight edges between random points; it need not
/// be planar or connected.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize) -> LineNetwork<f64> {
    let n = rng.random_range(2..=max_nodes);
    let nodes: Vec<Node<f64>> = (0..n)
        .map(|id| Node { id, point: Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)) })
        .collect();
    let p = rng.random_range(0.2..0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                // occasionally bend the edge through a detour vertex
                let mut pts = vec![nodes[a].point];
                if rng.random_bool(0.3) {
                    pts.push(Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)));
                }
                pts.push(nodes[b].point);
                let geometry = Polyline::new(0, pts).unwrap();
                let length = geometry.length();
                edges.push(Edge { id: edges.len(), node_a: a, node_b: b, geometry, length });
            }
        }
    }
    LineNetwork { nodes, edges }
}

/// Length of the shortest simple path, by enumerating all of them.
pub fn brute_shortest(net: &LineNetwork<f64>, a: usize, b: usize) -> Option<f64> {
    fn dfs(net: &LineNetwork<f64>, cur: usize, goal: usize, seen: &mut Vec<bool>, len: f64, best: &mut Option<f64>) {
        if cur == goal {
            if best.map_or(true, |b| len < b) {
                *best = Some(len);
            }
            return;
        }
        for e in &net.edges {
            let next = if e.node_a == cur {
                e.node_b
            } else if e.node_b == cur {
                e.node_a
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                dfs(net, next, goal, seen, len + e.length, best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; net.nodes.len()];
    seen[a] = true;
    let mut best = None;
    dfs(net, a, b, &mut seen, 0.0, &mut best);
    best
}

/// Optimal Steiner tree length: the best MST of the metric closure over
/// the terminals plus any subset of the other nodes.
pub fn brute_steiner(net: &LineNetwork<f64>, terminals: &[usize]) -> Option<f64> {
    let n = net.nodes.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in &net.edges {
        let (a, b) = (e.node_a, e.node_b);
        d[a][b] = d[a][b].min(e.length);
        d[b][a] = d[a][b];
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let others: Vec<usize> = (0..n).filter(|v| !terminals.contains(v)).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << others.len()) {
        let mut set: Vec<usize> = terminals.to_vec();
        set.extend(others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v));
        // Prim on the closure restricted to `set`
        let mut in_tree = vec![false; set.len()];
        let mut key = vec![f64::INFINITY; set.len()];
        key[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..set.len() {
            let u = (0..set.len()).filter(|&i| !in_tree[i]).min_by(|&x, &y| key[x].partial_cmp(&key[y]).unwrap()).unwrap();
            in_tree[u] = true;
            total += key[u];
            for v in 0..set.len() {
                if !in_tree[v] {
                    key[v] = key[v].min(d[set[u]][set[v]]);
                }
            }
        }
        if total.is_finite() && best.map_or(true, |b| total < b) {
            best = Some(total);
        }
    }
    best
}

pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryRaster {
    let mut r = BinaryRaster::empty(w, h);
    for row in 0..h {
        for col in 0..w {
            if rng.random_bool(density) {
                r.set(col as i64, row as i64);
            }
        }
    }
    r
}

/// Squared pixel distance from every pixel to the nearest set pixel of
/// `to`, by scanning all of them.
pub fn brute_sq_distances(to: &BinaryRaster) -> Vec<Option<i64>> {
    let set: Vec<(i64, i64)> = (0..to.width * to.height)
        .filter(|&i| to.data[i])
        .map(|i| ((i % to.width) as i64, (i / to.width) as i64))
        .collect();
    (0..to.width * to.height)
        .map(|i| {
            let (x, y) = ((i % to.width) as i64, (i / to.width) as i64);
            set.iter().map(|&(sx, sy)| (sx - x).pow(2) + (sy - y).pow(2)).min()
        })
        .collect()
}

/// Confusion counts straight from the definitions, with distances
/// compared in meters.
pub fn brute_confusion(del: &BinaryRaster, refr: &BinaryRaster, cfg: &AssessmentConfig) -> Vec<Confusion> {
    let gsd = cfg.grid.transform.gsd();
    let to_ref = brute_sq_distances(refr);
    let to_del = brute_sq_distances(del);
    let total = del.width * del.height;
    let within = |sq: Option<i64>, d: f64| sq.is_some_and(|s| (s as f64).sqrt() * gsd <= d + 1e-9);
    cfg.distances
        .iter()
        .map(|&d| {
            let mut c = Confusion { tp: 0, fp: 0, fn_: 0, tn: 0 };
            for i in 0..total {
                if del.data[i] {
                    if within(to_ref[i], d) {
                        c.tp += 1;
                    } else {
                        c.fp += 1;
                    }
                } else if refr.data[i] && !within(to_del[i], d) {
                    c.fn_ += 1;
                }
            }
            c.tn = total - c.tp - c.fp - c.fn_;
            c
        })
        .collect()
}

/// Random polyline with 2..=max_vertices vertices in a 100 m square.
pub fn random_polyline(rng: &mut ChaCha8Rng, max_vertices: usize) -> Polyline<f64> {
    loop {
        let n = rng.random_range(2..=max_vertices);
        let pts = (0..n).map(|_| Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))).collect();
        if let Ok(p) = Polyline::new(0, pts) {
            return p;
        }
    }
}

/// Straight polyline with interior vertices placed in order along it.
pub fn random_straight_polyline(rng: &mut ChaCha8Rng, max_vertices: usize) -> Polyline<f64> {
    let a = Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
    let b = Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
    let n = rng.random_range(2..=max_vertices);
    let mut ts: Vec<f64> = (0..n - 2).map(|_| rng.random_range(0.0..1.0)).collect();
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut pts = vec![a];
    pts.extend(ts.into_iter().map(|t| a.lerp(b, t)));
    pts.push(b);
    Polyline::new(0, pts).unwrap()
}

/// Minimum distance from `p` to any of `lines`.
pub fn distance_to_lines(p: Point<f64>, lines: &[Polyline<f64>]) -> f64 {
    lines.iter().map(|l| l.distance_to(p)).fold(f64::INFINITY, f64::min)
}

/// A few short lines on a half-meter lattice, so crossings, overlaps and
/// shared vertices are common.
pub fn random_lattice_lines(rng: &mut ChaCha8Rng, max_lines: usize) -> Vec<Polyline<f64>> {
    let n = rng.random_range(1..=max_lines);
    let mut out = Vec::new();
    while out.len() < n {
        let k = rng.random_range(2..=4);
        let pts = (0..k)
            .map(|_| Point::new(rng.random_range(0..12) as f64 * 0.5, rng.random_range(0..12) as f64 * 0.5))
            .collect();
        if let Ok(p) = Polyline::new(out.len() as u64, pts) {
            out.push(p);
        }
    }
    out
}
