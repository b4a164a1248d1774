//! Spectral globalization of the local boundary signal.
//!
//! Pixels within a small radius are linked with intervening-contour
//! affinities, the leading eigenvectors of the normalized affinity matrix
//! are found with a fully reorthogonalized Lanczos iteration, and their
//! directional derivatives form the spectral boundary signal.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{box_resample, Downscale};

use super::{BoundaryProbabilityMap, CueParams, MapKind};

const AFFINITY_RADIUS: isize = 3;
const AFFINITY_RHO: f64 = 0.1;
const RESIDUAL_TOL: f64 = 1e-3;
const MAX_LANCZOS: usize = 300;

/// Symmetric sparse matrix in CSR form.
struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = s;
        });
    }
}

/// Integer points strictly between the origin and `(dx, dy)`.
fn intervening(dx: isize, dy: isize) -> Vec<(isize, isize)> {
    let steps = dx.abs().max(dy.abs());
    let mut pts = Vec::new();
    for s in 1..steps {
        let t = s as f64 / steps as f64;
        let p = ((dx as f64 * t).round() as isize, (dy as f64 * t).round() as isize);
        if p != (0, 0) && p != (dx, dy) && pts.last() != Some(&p) {
            pts.push(p);
        }
    }
    pts
}

fn affinity(pb: &[f64], w: usize, h: usize) -> Csr {
    let r = AFFINITY_RADIUS;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) && dx * dx + dy * dy <= r * r {
                offsets.push((dx, dy, intervening(dx, dy)));
            }
        }
    }
    let rows: Vec<Vec<(u32, f64)>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (c, rr) = ((i % w) as isize, (i / w) as isize);
            let mut row = Vec::with_capacity(offsets.len());
            for (dx, dy, mid) in &offsets {
                let (c2, r2) = (c + dx, rr + dy);
                if c2 < 0 || r2 < 0 || c2 >= w as isize || r2 >= h as isize {
                    continue;
                }
                let j = r2 as usize * w + c2 as usize;
                let mut m = pb[i].max(pb[j]);
                for (mx, my) in mid {
                    m = m.max(pb[(rr + my) as usize * w + (c + mx) as usize]);
                }
                row.push((j as u32, (-m / AFFINITY_RHO).exp()));
            }
            row
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(w * h + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for row in rows {
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Csr { n: w * h, row_ptr, cols, vals }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += a * xi);
}

/// Leading `k` eigenpairs of a symmetric operator of size `n`, largest
/// first. Without `strict`, the Ritz pairs after `max_steps` are returned
/// even if they have not converged.
fn lanczos_top(
    op: &(dyn Fn(&[f64], &mut [f64]) + Sync),
    n: usize,
    k: usize,
    seed: u64,
    max_steps: usize,
    strict: bool,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let k = k.min(n);
    let max_steps = max_steps.min(n).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; n];
    let check_from = (2 * k + 10).min(max_steps);
    loop {
        q.push(v.clone());
        let j = q.len() - 1;
        op(&q[j], &mut w);
        let a = dot(&q[j], &w);
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            let coeffs: Vec<f64> = q.iter().map(|qi| dot(qi, &w)).collect();
            for (qi, c) in q.iter().zip(coeffs) {
                axpy(&mut w, -c, qi);
            }
        }
        let mut b = dot(&w, &w).sqrt();
        let steps = q.len();
        let exhausted = b < 1e-10;
        if exhausted && steps < max_steps {
            // invariant subspace found; continue from a fresh orthogonal direction
            let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            for _ in 0..2 {
                let coeffs: Vec<f64> = q.iter().map(|qi| dot(qi, &fresh)).collect();
                for (qi, c) in q.iter().zip(coeffs) {
                    axpy(&mut fresh, -c, qi);
                }
            }
            let nf = dot(&fresh, &fresh).sqrt();
            fresh.iter_mut().for_each(|x| *x /= nf);
            w = fresh;
            b = 0.0;
        } else if !exhausted {
            w.iter_mut().for_each(|x| *x /= b);
        }

        if steps >= check_from && (steps % 10 == 0 || steps == max_steps || exhausted) {
            let t = DMatrix::from_fn(steps, steps, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
            let wanted = &order[..k];
            let converged = wanted.iter().all(|&i| {
                let res = (b * eig.eigenvectors[(steps - 1, i)]).abs();
                res <= RESIDUAL_TOL * eig.eigenvalues[i].abs().max(1.0)
            });
            if converged || (exhausted && steps == n) || (!strict && steps >= max_steps) {
                let out = wanted
                    .iter()
                    .map(|&i| {
                        let mut vec = vec![0.0; n];
                        for (s, qs) in q.iter().enumerate() {
                            axpy(&mut vec, eig.eigenvectors[(s, i)], qs);
                        }
                        (eig.eigenvalues[i], vec)
                    })
                    .collect();
                return Ok(out);
            }
            if steps >= max_steps {
                return Err(Error::EigenNoConvergence { iterations: steps });
            }
        }
        beta.push(b);
        v = std::mem::replace(&mut w, vec![0.0; n]);
    }
}

/// Spaces larger than this use the Chebyshev-filtered solver.
const FILTER_MIN_SIZE: usize = 4096;
const CHEBYSHEV_DEGREE: usize = 10;

/// Leading eigenpairs of a normalized affinity matrix (spectrum within
/// [-1, 1]). Large problems first get a rough estimate of the k-th
/// eigenvalue from a short Lanczos run, then iterate on a Chebyshev
/// polynomial of the matrix that damps everything below it; the clustered
/// top of the spectrum is spread out and converges in far fewer steps.
fn top_eigenpairs(m: &Csr, k: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = m.n;
    let plain = |x: &[f64], y: &mut [f64]| m.mul(x, y);
    if n <= FILTER_MIN_SIZE {
        return lanczos_top(&plain, n, k, seed, MAX_LANCZOS, true);
    }
    let rough = lanczos_top(&plain, n, k, seed, 2 * k + 10, false)?;
    // Ritz values interlace from below, so the k wanted eigenvalues lie
    // above this cutoff
    let cut = rough.last().map_or(0.0, |p| p.0).min(0.999) - 1e-9;
    let lo = -1.0;
    let (a, b) = (2.0 / (cut - lo), -(cut + lo) / (cut - lo));
    let filtered = |x: &[f64], y: &mut [f64]| {
        // T_d(a M + b) x by the three-term recurrence
        let mut prev = x.to_vec();
        let mut tmp = vec![0.0; n];
        m.mul(x, &mut tmp);
        let mut cur: Vec<f64> = tmp.iter().zip(x).map(|(mx, xi)| a * mx + b * xi).collect();
        for _ in 1..CHEBYSHEV_DEGREE {
            m.mul(&cur, &mut tmp);
            let next: Vec<f64> = tmp
                .par_iter()
                .zip(cur.par_iter())
                .zip(prev.par_iter())
                .map(|((mx, c), p)| 2.0 * (a * mx + b * c) - p)
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
        y.copy_from_slice(&cur);
    };
    let pairs = lanczos_top(&filtered, n, k, seed ^ 0x9e37_79b9, MAX_LANCZOS, true)?;
    let mut tmp = vec![0.0; n];
    let mut out: Vec<(f64, Vec<f64>)> = pairs
        .into_iter()
        .map(|(_, v)| {
            m.mul(&v, &mut tmp);
            (dot(&v, &tmp) / dot(&v, &v), v)
        })
        .collect();
    out.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    Ok(out)
}

/// Spectral boundary signal at the (already capped) resolution of `pb`.
fn spectral_signal(pb: &[f64], w: usize, h: usize, params: &CueParams) -> Result<Vec<f64>> {
    let wmat = affinity(pb, w, h);
    let degree: Vec<f64> = (0..wmat.n)
        .map(|i| wmat.vals[wmat.row_ptr[i]..wmat.row_ptr[i + 1]].iter().sum::<f64>())
        .collect();
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| if *d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let mut norm = wmat;
    for i in 0..norm.n {
        for k in norm.row_ptr[i]..norm.row_ptr[i + 1] {
            let j = norm.cols[k] as usize;
            norm.vals[k] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let pairs = top_eigenpairs(&norm, params.eigenvectors + 1, params.seed)?;
    let orientations = params.orientation_angles();
    let mut signal = vec![vec![0.0; w * h]; orientations.len()];
    // skip the trivial leading eigenvector
    for (mu, u) in pairs.into_iter().skip(1) {
        let lambda = (1.0 - mu).max(1e-6);
        let weight = 1.0 / lambda.sqrt();
        let v: Vec<f64> = u.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect();
        for r in 0..h {
            for c in 0..w {
                let at = |cc: usize, rr: usize| v[rr * w + cc];
                let gx = (at((c + 1).min(w - 1), r) - at(c.saturating_sub(1), r)) * 0.5;
                let gy = (at(c, (r + 1).min(h - 1)) - at(c, r.saturating_sub(1))) * 0.5;
                for (o, &theta) in orientations.iter().enumerate() {
                    // derivative across the diameter direction (cos, sin)
                    let d = (-theta.sin() * gx + theta.cos() * gy).abs();
                    signal[o][r * w + c] += weight * d;
                }
            }
        }
    }
    Ok((0..w * h)
        .map(|i| signal.iter().map(|s| s[i]).fold(0.0, f64::max))
        .collect())
}

fn bilinear_upsample(src: &[f64], w: usize, h: usize, nw: usize, nh: usize) -> Vec<f64> {
    let mut out = vec![0.0; nw * nh];
    out.par_chunks_mut(nw).enumerate().for_each(|(r, row)| {
        let fy = ((r as f64 + 0.5) * h as f64 / nh as f64 - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for (c, o) in row.iter_mut().enumerate() {
            let fx = ((c as f64 + 0.5) * w as f64 / nw as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            let top = src[y0 * w + x0] * (1.0 - tx) + src[y0 * w + x1] * tx;
            let bot = src[y1 * w + x0] * (1.0 - tx) + src[y1 * w + x1] * tx;
            *o = top * (1.0 - ty) + bot * ty;
        }
    });
    out
}

/// Combine the local signal with its spectral counterpart.
///
/// The spectral signal is rescaled to the dynamic range of `mpb`; the
/// result is the weight-normalized blend of the two.
pub fn spectral_globalize(mpb: &BoundaryProbabilityMap, params: &CueParams) -> Result<BoundaryProbabilityMap> {
    let (am, asp) = (params.alpha_mpb, params.alpha_spb);
    if am < 0.0 || asp < 0.0 || am + asp <= 0.0 {
        return Err(Error::Parameter("globalization weights must be nonnegative, not both zero".into()));
    }
    let peak = mpb.p.iter().cloned().fold(0.0, f64::max);
    let mut out = mpb.clone();
    out.kind = MapKind::Gpb;
    if asp == 0.0 || peak <= 0.0 {
        return Ok(out);
    }
    let (small, _) = mpb.downscale(params.spectral_cap.max(2));
    let s = spectral_signal(&small.p, small.width, small.height, params)?;
    let s = if (small.width, small.height) == (mpb.width, mpb.height) {
        s
    } else {
        bilinear_upsample(&s, small.width, small.height, mpb.width, mpb.height)
    };
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let scale = if smax > 0.0 { peak / smax } else { 0.0 };
    for (o, (m, sp)) in out.p.iter_mut().zip(mpb.p.iter().zip(&s)) {
        *o = ((am * m + asp * sp * scale) / (am + asp)).clamp(0.0, 1.0);
    }
    Ok(out)
}

impl Downscale for BoundaryProbabilityMap {
    fn downscale(&self, max_dim: usize) -> (Self, f64) {
        let max_dim = max_dim.max(2);
        let m = self.width.max(self.height);
        if m <= max_dim {
            return (self.clone(), 1.0);
        }
        let f = m as f64 / max_dim as f64;
        let nw = if self.width >= self.height { max_dim } else { ((self.width as f64 / f).round() as usize).max(1) };
        let nh = if self.height > self.width { max_dim } else { ((self.height as f64 / f).round() as usize).max(1) };
        let p = box_resample(&self.p, self.width, self.height, nw, nh);
        (
            BoundaryProbabilityMap {
                width: nw,
                height: nh,
                p,
                transform: self.transform.scaled(self.width as f64 / nw as f64, self.height as f64 / nh as f64),
                kind: self.kind,
            },
            f,
        )
    }
}
