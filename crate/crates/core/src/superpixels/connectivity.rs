use std::collections::{BTreeSet, VecDeque};

use crate::raster::LabelMap;

/// 4-connected components; returns component id per pixel (numbered in
/// raster order of first pixel) and component sizes.
pub(crate) fn components(labels: &[u32], w: usize, h: usize) -> (Vec<u32>, Vec<usize>) {
    let mut comp = vec![u32::MAX; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..w * h {
        if comp[s] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let l = labels[s];
        comp[s] = id;
        queue.push_back(s);
        let mut n = 0;
        while let Some(i) = queue.pop_front() {
            n += 1;
            let (c, r) = (i % w, i / w);
            let mut visit = |j: usize| {
                if comp[j] == u32::MAX && labels[j] == l {
                    comp[j] = id;
                    queue.push_back(j);
                }
            };
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
        }
        sizes.push(n);
    }
    (comp, sizes)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Split labels into 4-connected components, merge components smaller
/// than `min_region_size` into their largest adjacent component, and
/// renumber densely in raster order.
pub fn enforce_connectivity(labels: &LabelMap, min_region_size: usize) -> LabelMap {
    let (w, h) = (labels.width, labels.height);
    let (comp, sizes) = components(&labels.labels, w, h);
    let n = sizes.len();
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let a = comp[i];
            if c + 1 < w && comp[i + 1] != a {
                adj[a as usize].insert(comp[i + 1]);
                adj[comp[i + 1] as usize].insert(a);
            }
            if r + 1 < h && comp[i + w] != a {
                adj[a as usize].insert(comp[i + w]);
                adj[comp[i + w] as usize].insert(a);
            }
        }
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = sizes;
    loop {
        let mut changed = false;
        for k in 0..n as u32 {
            let root = find(&mut parent, k);
            if root != k || size[root as usize] >= min_region_size {
                continue;
            }
            // largest adjacent set; ties go to the lowest id
            let mut best: Option<u32> = None;
            for &nb in &adj[root as usize] {
                let nr = find(&mut parent, nb);
                if nr == root {
                    continue;
                }
                best = match best {
                    Some(b) if size[b as usize] > size[nr as usize]
                        || (size[b as usize] == size[nr as usize] && b < nr) => Some(b),
                    _ => Some(nr),
                };
            }
            let Some(target) = best else { continue };
            // union: target keeps its id, adjacency merged
            parent[root as usize] = target;
            size[target as usize] += size[root as usize];
            let moved = std::mem::take(&mut adj[root as usize]);
            let t = &mut adj[target as usize];
            t.extend(moved);
            t.remove(&target);
            t.remove(&root);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut remap = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut out = Vec::with_capacity(w * h);
    for &c in &comp {
        let root = find(&mut parent, c) as usize;
        if remap[root] == u32::MAX {
            remap[root] = next;
            next += 1;
        }
        out.push(remap[root]);
    }
    LabelMap { width: w, height: h, labels: out, transform: labels.transform }
}
