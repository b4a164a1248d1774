//! Trace thinned boundary pixels into world polylines.

use std::collections::HashSet;

use crate::geometry::{Point, Polyline};

use super::BinaryBoundaryMap;

/// Neighbors under mixed adjacency: 4-neighbors always, diagonal
/// neighbors only when neither shared 4-neighbor is set.
pub(crate) fn m_neighbors(b: &[bool], w: usize, h: usize, i: usize) -> Vec<usize> {
    let (c, r) = ((i % w) as isize, (i / w) as isize);
    let set = |cc: isize, rr: isize| cc >= 0 && rr >= 0 && cc < w as isize && rr < h as isize && b[rr as usize * w + cc as usize];
    let idx = |cc: isize, rr: isize| rr as usize * w + cc as usize;
    let mut out = Vec::with_capacity(8);
    for (dc, dr) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
        if set(c + dc, r + dr) {
            out.push(idx(c + dc, r + dr));
        }
    }
    for (dc, dr) in [(1, 1), (-1, 1), (-1, -1), (1, -1)] {
        if set(c + dc, r + dr) && !set(c + dc, r) && !set(c, r + dr) {
            out.push(idx(c + dc, r + dr));
        }
    }
    out
}

/// Chains of boundary pixels between junctions (3+ neighbors) and ends.
/// Closed loops without junctions start at their first pixel in raster
/// order. Isolated single pixels produce no polyline.
pub fn vectorize_boundaries(bin: &BinaryBoundaryMap) -> Vec<Polyline<f64>> {
    let (w, h) = (bin.width, bin.height);
    let b = &bin.boundary;
    let nbrs: Vec<Vec<usize>> = (0..w * h)
        .map(|i| if b[i] { m_neighbors(b, w, h, i) } else { Vec::new() })
        .collect();
    let is_node = |i: usize| b[i] && nbrs[i].len() != 2;
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let ekey = |a: usize, c: usize| if a < c { (a, c) } else { (c, a) };
    let mut chains: Vec<Vec<usize>> = Vec::new();

    let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| -> Vec<usize> {
        let mut chain = vec![start, first];
        used.insert(ekey(start, first));
        let mut prev = start;
        let mut cur = first;
        while !is_node(cur) && cur != start {
            let next = nbrs[cur].iter().copied().find(|&n| n != prev && !used.contains(&ekey(cur, n)));
            let Some(next) = next else { break };
            used.insert(ekey(cur, next));
            chain.push(next);
            prev = cur;
            cur = next;
        }
        chain
    };

    for i in 0..w * h {
        if !is_node(i) {
            continue;
        }
        for &n in &nbrs[i] {
            if used.contains(&ekey(i, n)) {
                continue;
            }
            chains.push(walk(i, n, &mut used));
        }
    }
    // junction-free loops
    for i in 0..w * h {
        if !b[i] || is_node(i) {
            continue;
        }
        if let Some(&n) = nbrs[i].iter().find(|&&n| !used.contains(&ekey(i, n))) {
            chains.push(walk(i, n, &mut used));
        }
    }

    let t = bin.transform;
    chains
        .into_iter()
        .enumerate()
        .filter_map(|(id, chain)| {
            let pts: Vec<Point<f64>> = chain
                .iter()
                .map(|&i| t.pixel_to_world((i % w) as f64, (i / w) as f64))
                .collect();
            Polyline::new(id as u64, pts).ok()
        })
        .collect()
}
