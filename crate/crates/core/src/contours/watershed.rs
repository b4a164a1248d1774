//! Watershed by flooding from regional minima.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use crate::raster::LabelMap;

use super::BoundaryProbabilityMap;

const UNSET: u32 = u32::MAX;

#[derive(PartialEq)]
struct Entry {
    value: f64,
    seq: u64,
    idx: usize,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.value
            .total_cmp(&o.value)
            .then(self.seq.cmp(&o.seq))
    }
}

#[inline]
fn neighbors4(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (c, r) = (i % w, i / w);
    let mut out = [usize::MAX; 4];
    if c > 0 {
        out[0] = i - 1;
    }
    if c + 1 < w {
        out[1] = i + 1;
    }
    if r > 0 {
        out[2] = i - w;
    }
    if r + 1 < h {
        out[3] = i + w;
    }
    out.into_iter().filter(|&j| j != usize::MAX)
}

/// Label regional minima: 4-connected plateaus with no strictly lower
/// neighbor.
fn regional_minima(p: &[f64], w: usize, h: usize) -> (Vec<u32>, u32) {
    let mut plateau = vec![UNSET; w * h];
    let mut labels = vec![UNSET; w * h];
    let mut next = 0u32;
    let mut pid = 0u32;
    let mut queue = VecDeque::new();
    let mut members = Vec::new();
    for start in 0..w * h {
        if plateau[start] != UNSET {
            continue;
        }
        let v = p[start];
        let mut is_min = true;
        members.clear();
        plateau[start] = pid;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for j in neighbors4(i, w, h) {
                if p[j] < v {
                    is_min = false;
                } else if p[j] == v && plateau[j] == UNSET {
                    plateau[j] = pid;
                    queue.push_back(j);
                }
            }
        }
        if is_min {
            for &i in &members {
                labels[i] = next;
            }
            next += 1;
        }
        pid += 1;
    }
    (labels, next)
}

/// h-minima filter: reconstruction by erosion of `p + depth` over `p`,
/// which fills every basin shallower than `depth`.
fn fill_shallow_minima(p: &[f64], w: usize, h: usize, depth: f64) -> Vec<f64> {
    let mut r: Vec<f64> = p.iter().map(|v| v + depth).collect();
    let mut heap: BinaryHeap<Reverse<Entry>> =
        (0..w * h).map(|i| Reverse(Entry { value: r[i], seq: i as u64, idx: i })).collect();
    let mut seq = (w * h) as u64;
    while let Some(Reverse(e)) = heap.pop() {
        if e.value > r[e.idx] {
            continue;
        }
        for j in neighbors4(e.idx, w, h) {
            let cand = e.value.max(p[j]);
            if cand < r[j] {
                r[j] = cand;
                heap.push(Reverse(Entry { value: cand, seq, idx: j }));
                seq += 1;
            }
        }
    }
    r
}

/// Partition the map into catchment basins of its regional minima.
/// Minima shallower than `min_depth` are flooded first so ripples inside
/// a wide boundary response do not start their own basin.
pub fn close_contours(pb: &BoundaryProbabilityMap, min_depth: f64) -> LabelMap {
    let (w, h) = (pb.width, pb.height);
    let filled;
    let p = if min_depth > 0.0 {
        filled = fill_shallow_minima(&pb.p, w, h, min_depth);
        &filled
    } else {
        &pb.p
    };
    let (mut labels, _) = regional_minima(p, w, h);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for i in 0..w * h {
        if labels[i] != UNSET {
            heap.push(Reverse(Entry { value: p[i], seq, idx: i }));
            seq += 1;
        }
    }
    while let Some(Reverse(e)) = heap.pop() {
        let l = labels[e.idx];
        for j in neighbors4(e.idx, w, h) {
            if labels[j] == UNSET {
                labels[j] = l;
                heap.push(Reverse(Entry { value: p[j].max(e.value), seq, idx: j }));
                seq += 1;
            }
        }
    }
    LabelMap { width: w, height: h, labels, transform: pb.transform }
}
