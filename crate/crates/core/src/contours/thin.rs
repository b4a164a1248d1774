//! Thresholding and morphological thinning to one-pixel curves.

use super::{BinaryBoundaryMap, BoundaryProbabilityMap};

/// Neighbors P2..P9 clockwise from north, as in Zhang-Suen.
#[inline]
fn ring(b: &[bool], w: usize, h: usize, c: usize, r: usize) -> [bool; 8] {
    let get = |dc: isize, dr: isize| -> bool {
        let cc = c as isize + dc;
        let rr = r as isize + dr;
        cc >= 0 && rr >= 0 && (cc as usize) < w && (rr as usize) < h && b[rr as usize * w + cc as usize]
    };
    [
        get(0, -1),
        get(1, -1),
        get(1, 0),
        get(1, 1),
        get(0, 1),
        get(-1, 1),
        get(-1, 0),
        get(-1, -1),
    ]
}

fn transitions(n: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !n[k] && n[(k + 1) % 8]).count()
}

/// Number of 8-connected foreground components in the ring around a
/// pixel, counting 4-adjacent ring members as linked through corners.
fn ring_components(n: &[bool; 8]) -> usize {
    let count = n.iter().filter(|&&v| v).count();
    if count == 0 {
        return 0;
    }
    if count == 8 {
        return 1;
    }
    // corners (odd indices) bridge their two edge neighbours; an edge
    // neighbour also touches the next edge neighbour diagonally
    let mut seen = [false; 8];
    let mut comps = 0;
    for s in 0..8 {
        if !n[s] || seen[s] {
            continue;
        }
        comps += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(k) = stack.pop() {
            let mut adj = vec![(k + 1) % 8, (k + 7) % 8];
            if k % 2 == 0 {
                adj.push((k + 2) % 8);
                adj.push((k + 6) % 8);
            }
            for a in adj {
                if n[a] && !seen[a] {
                    seen[a] = true;
                    stack.push(a);
                }
            }
        }
    }
    comps
}

/// Zhang-Suen thinning followed by removal of pixels left in 2x2 blocks
/// when that does not change local 8-connectivity.
pub fn thin(b: &mut [bool], w: usize, h: usize) {
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut del = Vec::new();
            for r in 0..h {
                for c in 0..w {
                    if !b[r * w + c] {
                        continue;
                    }
                    let n = ring(b, w, h, c, r);
                    let bn = n.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&bn) || transitions(&n) != 1 {
                        continue;
                    }
                    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                    let ok = if step == 0 {
                        !(p2 && p4 && p6) && !(p4 && p6 && p8)
                    } else {
                        !(p2 && p4 && p8) && !(p2 && p6 && p8)
                    };
                    if ok {
                        del.push(r * w + c);
                    }
                }
            }
            changed |= !del.is_empty();
            for i in del {
                b[i] = false;
            }
        }
        if !changed {
            break;
        }
    }
    // residual 2x2 blocks
    loop {
        let mut changed = false;
        for r in 0..h.saturating_sub(1) {
            for c in 0..w.saturating_sub(1) {
                let block = [r * w + c, r * w + c + 1, (r + 1) * w + c, (r + 1) * w + c + 1];
                if !block.iter().all(|&i| b[i]) {
                    continue;
                }
                for &i in &block {
                    let n = ring(b, w, h, i % w, i / w);
                    let bn = n.iter().filter(|&&v| v).count();
                    if bn >= 2 && ring_components(&n) == 1 {
                        b[i] = false;
                        changed = true;
                        break;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Mark pixels with positive strength at or above `threshold`, then thin.
pub fn binary_boundary_map(strength: &BoundaryProbabilityMap, threshold: f64) -> BinaryBoundaryMap {
    let (w, h) = (strength.width, strength.height);
    let mut b: Vec<bool> = strength.p.iter().map(|&v| v > 0.0 && v >= threshold).collect();
    thin(&mut b, w, h);
    BinaryBoundaryMap { width: w, height: h, boundary: b, transform: strength.transform }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_2x2(b: &[bool], w: usize, h: usize) -> bool {
        for r in 0..h - 1 {
            for c in 0..w - 1 {
                if b[r * w + c] && b[r * w + c + 1] && b[(r + 1) * w + c] && b[(r + 1) * w + c + 1] {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn thick_bar_becomes_thin() {
        let (w, h) = (20, 9);
        let mut b: Vec<bool> = (0..w * h).map(|i| (3..6).contains(&(i / w)) && (2..18).contains(&(i % w))).collect();
        thin(&mut b, w, h);
        assert!(no_2x2(&b, w, h));
        assert!(b.iter().filter(|&&v| v).count() >= 10);
    }

    #[test]
    fn ring_components_counts() {
        assert_eq!(ring_components(&[true, false, false, false, true, false, false, false]), 2);
        assert_eq!(ring_components(&[true, true, true, false, false, false, false, false]), 1);
        assert_eq!(ring_components(&[false; 8]), 0);
    }
}
