//! Half-disc histogram gradients.

use rayon::prelude::*;

/// Per-pixel bin indices of a quantized channel.
#[derive(Debug, Clone)]
pub struct BinnedChannel {
    pub width: usize,
    pub height: usize,
    pub bins: Vec<u16>,
    pub nbins: usize,
}

impl BinnedChannel {
    /// Quantize `values` into `nbins` equal bins over `[lo, hi]`.
    pub fn quantize(values: &[f64], width: usize, height: usize, lo: f64, hi: f64, nbins: usize) -> Self {
        let nbins = nbins.max(1);
        let span = (hi - lo).max(f64::EPSILON);
        let bins = values
            .iter()
            .map(|&v| {
                let b = ((v - lo) / span * nbins as f64).floor();
                b.clamp(0.0, (nbins - 1) as f64) as u16
            })
            .collect();
        Self { width, height, bins, nbins }
    }

    pub fn from_ids(ids: &[u32], width: usize, height: usize, nbins: usize) -> Self {
        Self {
            width,
            height,
            bins: ids.iter().map(|&i| i as u16).collect(),
            nbins: nbins.max(1),
        }
    }
}

/// Offsets of one half disc, and the offsets that enter and leave it when
/// the disc moves one column to the right.
struct HalfDisc {
    all: Vec<(isize, isize)>,
    enter: Vec<(isize, isize)>,
    leave: Vec<(isize, isize)>,
}

/// Half discs for every orientation, ordered `[o0+, o0-, o1+, o1-, ...]`.
/// Offsets on the splitting diameter belong to neither half.
fn half_discs(radius: usize, orientations: &[f64]) -> Vec<HalfDisc> {
    let r = radius as isize;
    let r2 = (radius * radius) as isize;
    let mut out = Vec::with_capacity(orientations.len() * 2);
    for &theta in orientations {
        for sign in [1.0, -1.0] {
            let inside = |dx: isize, dy: isize| {
                if dx * dx + dy * dy > r2 || (dx == 0 && dy == 0) {
                    return false;
                }
                // diameter direction (cos, sin) in (col, row) coordinates
                let side = theta.cos() * dy as f64 - theta.sin() * dx as f64;
                sign * side > 1e-9
            };
            let mut half = HalfDisc { all: Vec::new(), enter: Vec::new(), leave: Vec::new() };
            for dy in -r..=r {
                for dx in -r..=r {
                    if inside(dx, dy) {
                        half.all.push((dx, dy));
                        if !inside(dx + 1, dy) {
                            half.enter.push((dx, dy));
                        }
                        if !inside(dx - 1, dy) {
                            half.leave.push((dx, dy));
                        }
                    }
                }
            }
            out.push(half);
        }
    }
    out
}

/// Chi-squared histogram distance, halved so disjoint histograms give 1.
#[inline]
pub fn chi_squared_half(g: &[f64], h: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in g.iter().zip(h) {
        let d = a + b;
        if d > 0.0 {
            s += (a - b) * (a - b) / d;
        }
    }
    0.5 * s
}

/// Oriented gradient maps of one channel, one map per orientation.
///
/// Orientation `theta` is the direction of the splitting diameter in
/// (column, row) coordinates; `theta = pi/2` separates left from right
/// and so responds to vertical edges. Discs are clipped at the border.
pub fn oriented_gradients(ch: &BinnedChannel, radius: usize, orientations: &[f64]) -> Vec<Vec<f64>> {
    let (w, h) = (ch.width, ch.height);
    let no = orientations.len();
    let nb = ch.nbins;
    let halves = half_discs(radius, orientations);
    let bin_at = |c: isize, r: isize| -> Option<usize> {
        (c >= 0 && r >= 0 && c < w as isize && r < h as isize).then(|| ch.bins[r as usize * w + c as usize] as usize)
    };
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|row| {
            let row = row as isize;
            let mut out = vec![0.0; no * w];
            let mut hist = vec![0u32; halves.len() * nb];
            let mut counts = vec![0u32; halves.len()];
            for (k, half) in halves.iter().enumerate() {
                for &(dx, dy) in &half.all {
                    if let Some(b) = bin_at(dx, row + dy) {
                        hist[k * nb + b] += 1;
                        counts[k] += 1;
                    }
                }
            }
            for col in 0..w {
                if col > 0 {
                    let c = col as isize;
                    for (k, half) in halves.iter().enumerate() {
                        for &(dx, dy) in &half.leave {
                            if let Some(b) = bin_at(c - 1 + dx, row + dy) {
                                hist[k * nb + b] -= 1;
                                counts[k] -= 1;
                            }
                        }
                        for &(dx, dy) in &half.enter {
                            if let Some(b) = bin_at(c + dx, row + dy) {
                                hist[k * nb + b] += 1;
                                counts[k] += 1;
                            }
                        }
                    }
                }
                for o in 0..no {
                    let (cp, cn) = (counts[2 * o], counts[2 * o + 1]);
                    if cp == 0 || cn == 0 {
                        continue;
                    }
                    let (cp, cn) = (cp as f64, cn as f64);
                    let hp = &hist[2 * o * nb..(2 * o + 1) * nb];
                    let hn = &hist[(2 * o + 1) * nb..(2 * o + 2) * nb];
                    let mut s = 0.0;
                    for (&a, &b) in hp.iter().zip(hn) {
                        if a | b != 0 {
                            let a = a as f64 / cp;
                            let b = b as f64 / cn;
                            s += (a - b) * (a - b) / (a + b);
                        }
                    }
                    out[o * w + col] = (0.5 * s).clamp(0.0, 1.0);
                }
            }
            out
        })
        .collect();
    let mut maps = vec![vec![0.0; w * h]; no];
    for (row, data) in rows.into_iter().enumerate() {
        for (o, map) in maps.iter_mut().enumerate() {
            map[row * w..(row + 1) * w].copy_from_slice(&data[o * w..(o + 1) * w]);
        }
    }
    maps
}

/// Single-orientation convenience wrapper.
pub fn oriented_gradient(ch: &BinnedChannel, radius: usize, orientation: f64) -> Vec<f64> {
    oriented_gradients(ch, radius, &[orientation]).pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn step_edge(w: usize, h: usize, split: usize) -> BinnedChannel {
        let v: Vec<f64> = (0..w * h)
            .map(|i| if i % w < split { 10.0 } else { 90.0 })
            .collect();
        BinnedChannel::quantize(&v, w, h, 0.0, 100.0, 25)
    }

    #[test]
    fn constant_channel_is_zero() {
        let ch = BinnedChannel::quantize(&vec![42.0; 400], 20, 20, 0.0, 100.0, 25);
        for g in oriented_gradients(&ch, 4, &[0.0, 0.7, FRAC_PI_2]) {
            assert!(g.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn chi_squared_of_disjoint_histograms_is_one() {
        assert_eq!(chi_squared_half(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(chi_squared_half(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }

    #[test]
    fn aligned_orientation_peaks_at_edge() {
        let (w, h, split) = (30, 30, 15);
        let ch = step_edge(w, h, split);
        let g = oriented_gradient(&ch, 5, FRAC_PI_2);
        let max = g.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12, "disjoint halves give 1, got {max}");
        for row in 0..h {
            let line = &g[row * w..(row + 1) * w];
            let best = line.iter().cloned().fold(0.0, f64::max);
            // pixel right of the split has the left half-disc fully in the other color
            assert!(line[split] >= 0.9 * max);
            assert_eq!(best, line[split]);
        }
    }

    #[test]
    fn perpendicular_orientation_is_weak() {
        let (w, h, split) = (30, 30, 15);
        let ch = step_edge(w, h, split);
        let aligned = oriented_gradient(&ch, 5, FRAC_PI_2);
        let perp = oriented_gradient(&ch, 5, 0.0);
        for row in 5..h - 5 {
            let i = row * w + split;
            assert!(perp[i] <= 0.2 * aligned[i], "row {row}: {} vs {}", perp[i], aligned[i]);
        }
    }

    #[test]
    fn sliding_histograms_match_direct_count() {
        use rand::{Rng, SeedableRng};
        let (w, h, r) = (23, 17, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.0..100.0)).collect();
        let ch = BinnedChannel::quantize(&v, w, h, 0.0, 100.0, 6);
        let thetas = [0.0, 0.4, FRAC_PI_2, 2.5];
        let maps = oriented_gradients(&ch, r, &thetas);
        for (o, &theta) in thetas.iter().enumerate() {
            for row in 0..h as isize {
                for col in 0..w as isize {
                    let (mut hp, mut hn) = (vec![0.0; 6], vec![0.0; 6]);
                    for dy in -4isize..=4 {
                        for dx in -4isize..=4 {
                            let (c, rr) = (col + dx, row + dy);
                            if dx * dx + dy * dy > 16 || c < 0 || rr < 0 || c >= w as isize || rr >= h as isize {
                                continue;
                            }
                            let side = theta.cos() * dy as f64 - theta.sin() * dx as f64;
                            let b = ch.bins[rr as usize * w + c as usize] as usize;
                            if side > 1e-9 {
                                hp[b] += 1.0;
                            } else if side < -1e-9 {
                                hn[b] += 1.0;
                            }
                        }
                    }
                    let (sp, sn): (f64, f64) = (hp.iter().sum(), hn.iter().sum());
                    hp.iter_mut().for_each(|x| *x /= sp);
                    hn.iter_mut().for_each(|x| *x /= sn);
                    let want = chi_squared_half(&hp, &hn);
                    let got = maps[o][row as usize * w + col as usize];
                    assert!((got - want).abs() < 1e-12, "{o} {row} {col}: {got} vs {want}");
                }
            }
        }
    }
}
