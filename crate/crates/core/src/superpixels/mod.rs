//! SLIC superpixels: k-means in joint CIELAB and image-plane space with
//! windowed assignment, followed by connectivity enforcement and crack
//! outline extraction.

mod connectivity;
mod outlines;

use serde::{Deserialize, Serialize};

pub use connectivity::enforce_connectivity;
pub use outlines::superpixel_outlines;

use crate::error::{Error, Result};
use crate::raster::{LabGrid, LabelMap};

#[cfg(test)]
pub(crate) use connectivity::components;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlicParams {
    /// Seed grid spacing S in pixels. Takes precedence over `target_count`.
    pub region_size: Option<usize>,
    /// Approximate number of superpixels, used when `region_size` is unset.
    pub target_count: Option<usize>,
    /// Weight m of spatial against color distance.
    pub compactness: f64,
    pub iterations: usize,
    /// Components smaller than this are merged; defaults to S^2/4.
    pub min_region_size: Option<usize>,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            region_size: None,
            target_count: None,
            compactness: 10.0,
            iterations: 10,
            min_region_size: None,
        }
    }
}

impl SlicParams {
    /// Region size giving superpixel edges of about one meter.
    pub fn default_region_size(gsd: f64) -> usize {
        ((1.0 / gsd).round() as usize).max(2)
    }

    /// Resolved seed spacing for a `width` x `height` raster with pixel
    /// size `gsd`.
    pub fn spacing(&self, width: usize, height: usize, gsd: f64) -> Result<usize> {
        let s = match (self.region_size, self.target_count) {
            (Some(s), _) => s,
            (None, Some(k)) => {
                if k == 0 {
                    return Err(Error::Parameter("target count must be at least 1".into()));
                }
                (((width * height) as f64 / k as f64).sqrt().round() as usize).max(2)
            }
            (None, None) => Self::default_region_size(gsd),
        };
        if s < 2 {
            return Err(Error::Parameter(format!("region size {s} must be at least 2")));
        }
        if s >= width.min(height) {
            return Err(Error::Parameter(format!(
                "region size {s} must be smaller than the raster ({width}x{height})"
            )));
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.compactness > 0.0) || !self.compactness.is_finite() {
            return Err(Error::Parameter("compactness must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Parameter("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

fn gradient(lab: &LabGrid, c: usize, r: usize) -> f64 {
    let (w, h) = (lab.width, lab.height);
    let at = |cc: usize, rr: usize| lab.lab(rr * w + cc);
    let d = |p: [f64; 3], q: [f64; 3]| (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>();
    let gx = d(at((c + 1).min(w - 1), r), at(c.saturating_sub(1), r));
    let gy = d(at(c, (r + 1).min(h - 1)), at(c, r.saturating_sub(1)));
    gx + gy
}

fn initial_centers(lab: &LabGrid, s: usize) -> Vec<Center> {
    let (w, h) = (lab.width, lab.height);
    let nx = ((w as f64 / s as f64).round() as usize).max(1);
    let ny = ((h as f64 / s as f64).round() as usize).max(1);
    let (sx, sy) = (w as f64 / nx as f64, h as f64 / ny as f64);
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            // pixel-center coordinates: pixel (c, r) sits at (c + 0.5, r + 0.5)
            let x = (i as f64 + 0.5) * sx;
            let y = (j as f64 + 0.5) * sy;
            let pc = (x.floor() as usize).min(w - 1);
            let pr = (y.floor() as usize).min(h - 1);
            let g0 = gradient(lab, pc, pr);
            let mut best = (g0, pc, pr);
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let (c, r) = (pc as isize + dc, pr as isize + dr);
                    if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
                        continue;
                    }
                    let g = gradient(lab, c as usize, r as usize);
                    if g < best.0 {
                        best = (g, c as usize, r as usize);
                    }
                }
            }
            let (cx, cy) = if (best.1, best.2) == (pc, pr) {
                (x, y)
            } else {
                (best.1 as f64 + 0.5, best.2 as f64 + 0.5)
            };
            centers.push(Center { lab: lab.lab(best.2 * w + best.1), x: cx, y: cy });
        }
    }
    centers
}

/// SLIC clustering followed by connectivity enforcement.
pub fn slic(lab: &LabGrid, params: &SlicParams) -> Result<LabelMap> {
    params.validate()?;
    let (w, h) = (lab.width, lab.height);
    let s = params.spacing(w, h, lab.transform.gsd())?;
    let sf = s as f64;
    let m2 = params.compactness * params.compactness;
    let mut centers = initial_centers(lab, s);
    let mut labels = vec![u32::MAX; w * h];
    let mut dist = vec![f64::INFINITY; w * h];

    let distance = |c: &Center, i: usize| -> f64 {
        let p = lab.lab(i);
        let dl = (0..3).map(|k| (p[k] - c.lab[k]).powi(2)).sum::<f64>();
        let px = (i % w) as f64 + 0.5 - c.x;
        let py = (i / w) as f64 + 0.5 - c.y;
        dl + (px * px + py * py) / (sf * sf) * m2
    };

    for _ in 0..params.iterations {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let c0 = (c.x - sf).floor().max(0.0) as usize;
            let c1 = ((c.x + sf).ceil() as usize).min(w);
            let r0 = (c.y - sf).floor().max(0.0) as usize;
            let r1 = ((c.y + sf).ceil() as usize).min(h);
            for r in r0..r1 {
                for col in c0..c1 {
                    let i = r * w + col;
                    let d = distance(c, i);
                    if d < dist[i] {
                        dist[i] = d;
                        labels[i] = k as u32;
                    }
                }
            }
        }
        // pixels outside every window go to the nearest center
        for i in 0..w * h {
            if labels[i] == u32::MAX || dist[i].is_infinite() {
                let mut best = (f64::INFINITY, 0u32);
                for (k, c) in centers.iter().enumerate() {
                    let d = distance(c, i);
                    if d < best.0 {
                        best = (d, k as u32);
                    }
                }
                labels[i] = best.1;
                dist[i] = best.0;
            }
        }
        let mut acc = vec![[0.0f64; 6]; centers.len()];
        for (i, &l) in labels.iter().enumerate() {
            let a = &mut acc[l as usize];
            let p = lab.lab(i);
            a[0] += p[0];
            a[1] += p[1];
            a[2] += p[2];
            a[3] += (i % w) as f64 + 0.5;
            a[4] += (i / w) as f64 + 0.5;
            a[5] += 1.0;
        }
        for (c, a) in centers.iter_mut().zip(acc) {
            if a[5] > 0.0 {
                c.lab = [a[0] / a[5], a[1] / a[5], a[2] / a[5]];
                c.x = a[3] / a[5];
                c.y = a[4] / a[5];
            }
        }
    }
    let raw = LabelMap { width: w, height: h, labels, transform: lab.transform };
    let min_size = params.min_region_size.unwrap_or(s * s / 4).max(1);
    Ok(enforce_connectivity(&raw, min_size))
}
