//! Filter-bank textons for the texture cue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::LabGrid;

use super::CueParams;

/// Texton id per pixel, dense in `[0, count)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextonMap {
    pub width: usize,
    pub height: usize,
    pub ids: Vec<u32>,
    pub count: usize,
}

const BANK_SIGMAS: [f64; 2] = [1.0, 2.0];
const BANK_ORIENTATIONS: usize = 4;
const ELONGATION: f64 = 2.0;
const KMEANS_SAMPLE: usize = 20_000;
const KMEANS_ITERS: usize = 15;

struct Kernel {
    radius: usize,
    taps: Vec<f64>,
}

fn oriented_kernel(sigma: f64, theta: f64, odd: bool) -> Kernel {
    let sl = sigma * ELONGATION;
    let radius = (3.0 * sl).ceil() as usize;
    let size = 2 * radius + 1;
    let (s, c) = theta.sin_cos();
    let mut taps = vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - radius as f64;
            let dy = y as f64 - radius as f64;
            // u across the filter orientation, v along it
            let u = -s * dx + c * dy;
            let v = c * dx + s * dy;
            let g = (-(u * u) / (2.0 * sigma * sigma) - (v * v) / (2.0 * sl * sl)).exp();
            taps[y * size + x] = if odd {
                -u / (sigma * sigma) * g
            } else {
                (u * u / (sigma * sigma) - 1.0) / (sigma * sigma) * g
            };
        }
    }
    normalize(&mut taps);
    Kernel { radius, taps }
}

fn center_surround(sigma: f64) -> Kernel {
    let radius = (3.0 * 2.0 * sigma).ceil() as usize;
    let size = 2 * radius + 1;
    let gauss = |s: f64, d2: f64| (-d2 / (2.0 * s * s)).exp() / (s * s);
    let mut taps = vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - radius as f64;
            let dy = y as f64 - radius as f64;
            let d2 = dx * dx + dy * dy;
            taps[y * size + x] = gauss(sigma, d2) - gauss(2.0 * sigma, d2);
        }
    }
    normalize(&mut taps);
    Kernel { radius, taps }
}

/// Zero mean, unit L1 norm.
fn normalize(taps: &mut [f64]) {
    let mean = taps.iter().sum::<f64>() / taps.len() as f64;
    taps.iter_mut().for_each(|t| *t -= mean);
    let l1: f64 = taps.iter().map(|t| t.abs()).sum();
    if l1 > 0.0 {
        taps.iter_mut().for_each(|t| *t /= l1);
    }
}

fn filter_bank() -> Vec<Kernel> {
    let mut bank = Vec::new();
    for &sigma in &BANK_SIGMAS {
        for k in 0..BANK_ORIENTATIONS {
            let theta = std::f64::consts::PI * k as f64 / BANK_ORIENTATIONS as f64;
            bank.push(oriented_kernel(sigma, theta, false));
            bank.push(oriented_kernel(sigma, theta, true));
        }
        bank.push(center_surround(sigma));
    }
    bank
}

/// Largest filter support (diameter in pixels) of the texton bank.
pub fn filter_support() -> usize {
    filter_bank().iter().map(|k| 2 * k.radius + 1).max().unwrap()
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i - 1;
    }
    if i >= n {
        i = 2 * n - i - 1;
    }
    i.clamp(0, n - 1) as usize
}

/// Copy of `plane` with a reflected border of `r` pixels.
fn pad_reflect(plane: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
    let pw = w + 2 * r;
    let mut out = vec![0.0; pw * (h + 2 * r)];
    for py in 0..h + 2 * r {
        let y = reflect(py as isize - r as isize, h);
        for px in 0..pw {
            out[py * pw + px] = plane[y * w + reflect(px as isize - r as isize, w)];
        }
    }
    out
}

fn convolve(padded: &[f64], pad: usize, w: usize, h: usize, k: &Kernel) -> Vec<f64> {
    let size = 2 * k.radius + 1;
    let pw = w + 2 * pad;
    let off = pad - k.radius;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(row, line)| {
        for ky in 0..size {
            let src = &padded[(row + off + ky) * pw + off..];
            let trow = &k.taps[ky * size..(ky + 1) * size];
            for (kx, &t) in trow.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                for (o, v) in line.iter_mut().zip(&src[kx..kx + w]) {
                    *o += t * v;
                }
            }
        }
    });
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], v: &[f64]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

/// k-means++ seeded Lloyd iterations on `samples`.
fn kmeans(samples: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let k = k.max(1).min(samples.len().max(1));
    let mut centers: Vec<Vec<f64>> = vec![samples[rng.random_range(0..samples.len())].clone()];
    let mut d2: Vec<f64> = samples.iter().map(|s| sq_dist(s, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            // every sample coincides with a center
            rng.random_range(0..samples.len())
        } else {
            let mut t = rng.random::<f64>() * total;
            let mut pick = samples.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if t < *d {
                    pick = i;
                    break;
                }
                t -= d;
            }
            pick
        };
        centers.push(samples[idx].clone());
        let c = centers.last().unwrap();
        for (s, d) in samples.iter().zip(d2.iter_mut()) {
            *d = d.min(sq_dist(s, c));
        }
    }
    let dim = samples[0].len();
    let mut assign = vec![usize::MAX; samples.len()];
    for _ in 0..KMEANS_ITERS {
        let new_assign: Vec<usize> = samples.par_iter().map(|s| nearest(&centers, s)).collect();
        let changed = new_assign != assign;
        assign = new_assign;
        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (s, &a) in samples.iter().zip(&assign) {
            counts[a] += 1;
            for (acc, v) in sums[a].iter_mut().zip(s) {
                *acc += v;
            }
        }
        for (c, (sum, n)) in centers.iter_mut().zip(sums.into_iter().zip(counts)) {
            if n > 0 {
                *c = sum.into_iter().map(|v| v / n as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    centers
}

/// Cluster filter-bank responses of the lightness channel into textons.
pub fn compute_textons(lab: &LabGrid, params: &CueParams) -> Result<TextonMap> {
    let (w, h) = (lab.width, lab.height);
    let bank = filter_bank();
    let support = bank.iter().map(|k| 2 * k.radius + 1).max().unwrap();
    if w < support || h < support {
        return Err(Error::TooSmall { width: w, height: h, min: support });
    }
    if params.texton_count == 0 {
        return Err(Error::Parameter("texton count must be at least 1".into()));
    }
    let plane: Vec<f64> = lab.l.iter().map(|v| v / 100.0).collect();
    let pad = bank.iter().map(|k| k.radius).max().unwrap();
    let padded = pad_reflect(&plane, w, h, pad);
    let responses: Vec<Vec<f64>> = bank.iter().map(|k| convolve(&padded, pad, w, h, k)).collect();
    let feature = |i: usize| -> Vec<f64> { responses.iter().map(|r| r[i]).collect() };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = w * h;
    let sample_idx: Vec<usize> = if n <= KMEANS_SAMPLE {
        (0..n).collect()
    } else {
        let mut idx: Vec<usize> = (0..KMEANS_SAMPLE).map(|_| rng.random_range(0..n)).collect();
        idx.sort_unstable();
        idx
    };
    let samples: Vec<Vec<f64>> = sample_idx.iter().map(|&i| feature(i)).collect();
    let centers = kmeans(&samples, params.texton_count, &mut rng);
    let raw: Vec<usize> = (0..n).into_par_iter().map(|i| nearest(&centers, &feature(i))).collect();

    // densify in order of first appearance
    let mut remap = vec![u32::MAX; centers.len()];
    let mut next = 0u32;
    let ids = raw
        .into_iter()
        .map(|c| {
            if remap[c] == u32::MAX {
                remap[c] = next;
                next += 1;
            }
            remap[c]
        })
        .collect();
    Ok(TextonMap { width: w, height: h, ids, count: next as usize })
}
