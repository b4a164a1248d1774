//! Greedy hierarchical boundary strength over watershed regions.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::raster::LabelMap;

use super::{BoundaryProbabilityMap, MapKind};

#[derive(Default, Clone)]
struct PairStat {
    sum: f64,
    count: usize,
    /// Original region pairs now represented by this pair.
    members: Vec<usize>,
}

impl PairStat {
    fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

struct Candidate {
    mean: f64,
    a: u32,
    b: u32,
    stamp: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.mean
            .total_cmp(&o.mean)
            .then((self.a, self.b).cmp(&(o.a, o.b)))
            .then(self.stamp.cmp(&o.stamp))
    }
}

#[inline]
fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b { (a, b) } else { (b, a) }
}

/// Boundary pixels of a label map: for every 4-adjacent pair with
/// different labels the pixel with the higher signal (ties: the lower
/// index) carries the boundary. Returns, per boundary pixel, the label
/// pairs it separates.
pub(crate) fn boundary_pixels(regions: &LabelMap, p: &[f64]) -> HashMap<usize, Vec<(u32, u32)>> {
    let (w, h) = (regions.width, regions.height);
    let mut out: HashMap<usize, Vec<(u32, u32)>> = HashMap::new();
    let mut mark = |i: usize, j: usize| {
        let (li, lj) = (regions.labels[i], regions.labels[j]);
        if li == lj {
            return;
        }
        let owner = if p[j] > p[i] { j } else { i };
        let k = key(li, lj);
        let e = out.entry(owner).or_default();
        if !e.contains(&k) {
            e.push(k);
        }
    };
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                mark(i, i + 1);
            }
            if r + 1 < h {
                mark(i, i + w);
            }
        }
    }
    out
}

/// Merge adjacent regions in increasing order of mean boundary signal and
/// record, per boundary pixel, the level at which it disappears.
pub fn boundary_strength(regions: &LabelMap, pb: &BoundaryProbabilityMap) -> Result<BoundaryProbabilityMap> {
    if (regions.width, regions.height) != (pb.width, pb.height) {
        return Err(Error::Dimension(format!(
            "regions {}x{} vs map {}x{}",
            regions.width, regions.height, pb.width, pb.height
        )));
    }
    let pixels = boundary_pixels(regions, &pb.p);
    let mut pair_index: HashMap<(u32, u32), usize> = HashMap::new();
    let mut pair_list: Vec<(u32, u32)> = Vec::new();
    let mut stats: HashMap<(u32, u32), PairStat> = HashMap::new();
    let mut sorted_px: Vec<_> = pixels.iter().collect();
    sorted_px.sort_by_key(|(i, _)| **i);
    for (&i, pairs) in &sorted_px {
        for &k in pairs.iter() {
            let idx = *pair_index.entry(k).or_insert_with(|| {
                pair_list.push(k);
                pair_list.len() - 1
            });
            let s = stats.entry(k).or_default();
            s.sum += pb.p[i];
            s.count += 1;
            if s.members.last() != Some(&idx) && !s.members.contains(&idx) {
                s.members.push(idx);
            }
        }
    }

    let n_regions = regions.count();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_regions];
    for &(a, b) in stats.keys() {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let mut alive = vec![true; n_regions];
    let mut stamp = 0u64;
    let mut current: HashMap<(u32, u32), u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut keys: Vec<_> = stats.keys().cloned().collect();
    keys.sort_unstable();
    for k in keys {
        current.insert(k, stamp);
        heap.push(Reverse(Candidate { mean: stats[&k].mean(), a: k.0, b: k.1, stamp }));
        stamp += 1;
    }

    let mut pair_level = vec![0.0f64; pair_list.len()];
    let mut level = 0.0f64;
    while let Some(Reverse(c)) = heap.pop() {
        let k = (c.a, c.b);
        if current.get(&k) != Some(&c.stamp) || !alive[c.a as usize] || !alive[c.b as usize] {
            continue;
        }
        level = level.max(c.mean);
        let merged = stats.remove(&k).unwrap();
        current.remove(&k);
        for m in merged.members {
            pair_level[m] = level;
        }
        // b is absorbed into a
        let (a, b) = (c.a, c.b);
        alive[b as usize] = false;
        let nb = std::mem::take(&mut adj[b as usize]);
        let na = std::mem::take(&mut adj[a as usize]);
        let mut neighbors: Vec<u32> = na.into_iter().chain(nb).filter(|&x| x != a && x != b).collect();
        neighbors.sort_unstable();
        neighbors.dedup();
        for &n in &neighbors {
            let mut s = stats.remove(&key(a, n)).unwrap_or_default();
            current.remove(&key(a, n));
            if let Some(sb) = stats.remove(&key(b, n)) {
                current.remove(&key(b, n));
                s.sum += sb.sum;
                s.count += sb.count;
                s.members.extend(sb.members);
            }
            let nk = key(a, n);
            heap.push(Reverse(Candidate { mean: s.mean(), a: nk.0, b: nk.1, stamp }));
            current.insert(nk, stamp);
            stamp += 1;
            stats.insert(nk, s);
            let an = &mut adj[n as usize];
            an.retain(|&x| x != b);
            if !an.contains(&a) {
                an.push(a);
            }
        }
        adj[a as usize] = neighbors;
    }

    let mut out = vec![0.0; pb.p.len()];
    for (i, pairs) in pixels {
        out[i] = pairs
            .iter()
            .map(|k| pair_level[pair_index[k]])
            .fold(0.0, f64::max)
            .clamp(0.0, 1.0);
    }
    Ok(BoundaryProbabilityMap {
        width: pb.width,
        height: pb.height,
        p: out,
        transform: pb.transform,
        kind: MapKind::Ucm,
    })
}
