//! Pixel-based localization accuracy of delineated lines against
//! reference lines, per buffer distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Polyline};
use crate::raster::GeoTransform;
use crate::scalar::Scalar;

/// Raster grid the lines are burnt into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridSpec<T> {
    pub transform: GeoTransform<T>,
    pub width: usize,
    pub height: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(transform: GeoTransform<T>, width: usize, height: usize) -> Result<Self> {
        transform.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::Parameter("grid must have at least one pixel".into()));
        }
        Ok(Self { transform, width, height })
    }

    /// North-up grid of pixel size `gsd` covering `bbox` plus `pad` meters
    /// on every side, with its origin on the `gsd` lattice.
    pub fn covering(bbox: &BBox<T>, gsd: T, pad: T) -> Result<Self> {
        if !(gsd > T::zero()) {
            return Err(Error::Parameter("gsd must be positive".into()));
        }
        if bbox.is_empty() {
            return Err(Error::Parameter("cannot derive a grid from empty layers".into()));
        }
        let x0 = ((bbox.min.x - pad) / gsd).floor() * gsd;
        let y1 = ((bbox.max.y + pad) / gsd).ceil() * gsd;
        let w = ((bbox.max.x + pad - x0) / gsd).ceil().to_usize().unwrap_or(0).max(1);
        let h = ((y1 - (bbox.min.y - pad)) / gsd).ceil().to_usize().unwrap_or(0).max(1);
        Self::new(GeoTransform::north_up(x0, y1, gsd), w, h)
    }
}

/// One-pixel-wide line raster, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRaster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl BinaryRaster {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: i64, row: i64) {
        if col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height {
            self.data[row as usize * self.width + col as usize] = true;
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

fn bresenham(r: &mut BinaryRaster, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        r.set(x, y);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Burn lines into `grid` with Bresenham between the pixels containing
/// consecutive vertices.
pub fn rasterize_lines<T: Scalar>(lines: &[Polyline<T>], grid: &GridSpec<T>) -> Result<BinaryRaster> {
    let mut r = BinaryRaster::empty(grid.width, grid.height);
    let (w, h) = (grid.width as i64, grid.height as i64);
    for l in lines {
        let mut px = Vec::with_capacity(l.vertices().len());
        for &p in l.vertices() {
            let (c, rr) = grid.transform.world_to_pixel(p)?;
            let snap = |v: T| (v.as_f64() + 0.5 + 1e-9).floor() as i64;
            px.push((snap(c), snap(rr)));
        }
        for s in px.windows(2) {
            let ((x0, y0), (x1, y1)) = (s[0], s[1]);
            if x0.max(x1) < 0 || y0.max(y1) < 0 || x0.min(x1) >= w || y0.min(y1) >= h {
                continue;
            }
            bresenham(&mut r, s[0], s[1]);
        }
    }
    Ok(r)
}

const FAR: f64 = 1.0e30;

/// Lower envelope of parabolas (Felzenszwalb and Huttenlocher).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0: replace the only parabola
                v[0] = q;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance, in pixels², from every pixel to the
/// nearest set pixel; `None` when nothing is set.
pub fn squared_distance_pixels(r: &BinaryRaster) -> Option<Vec<f64>> {
    if !r.data.iter().any(|&b| b) {
        return None;
    }
    let (w, h) = (r.width, r.height);
    // columns first, on a transposed copy so both passes work on rows
    let mut t: Vec<f64> = vec![0.0; w * h];
    t.par_chunks_mut(h).enumerate().for_each(|(col, out)| {
        let f: Vec<f64> = (0..h).map(|row| if r.data[row * w + col] { 0.0 } else { FAR }).collect();
        let (mut v, mut z) = (vec![0; h], vec![0.0; h + 1]);
        edt_1d(&f, out, &mut v, &mut z);
    });
    let mut d = vec![0.0; w * h];
    d.par_chunks_mut(w).enumerate().for_each(|(row, out)| {
        let f: Vec<f64> = (0..w).map(|col| t[col * h + row]).collect();
        let (mut v, mut z) = (vec![0; w], vec![0.0; w + 1]);
        edt_1d(&f, out, &mut v, &mut z);
    });
    Some(d)
}

/// Distance in meters to the nearest reference pixel.
pub fn distance_transform(reference: &BinaryRaster, gsd: f64) -> Result<Vec<f64>> {
    let sq = squared_distance_pixels(reference).ok_or(Error::EmptyReference)?;
    Ok(sq.into_iter().map(|d| d.sqrt() * gsd).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentConfig {
    /// Buffer distances in meters, strictly increasing, from >= 0.
    pub distances: Vec<f64>,
    pub grid: GridSpec<f64>,
}

pub const DEFAULT_DISTANCES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

impl AssessmentConfig {
    pub fn new(grid: GridSpec<f64>) -> Self {
        Self { distances: DEFAULT_DISTANCES.to_vec(), grid }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() || !(self.distances[0] >= 0.0) {
            return Err(Error::Parameter("buffer distances must start at >= 0".into()));
        }
        if self.distances.windows(2).any(|w| !(w[1] > w[0])) || self.distances.iter().any(|d| !d.is_finite()) {
            return Err(Error::Parameter("buffer distances must be finite and strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Histogram band `(lo, hi]`; the first band also includes `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub tp_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSeries {
    pub distances: Vec<f64>,
    pub counts: Vec<Confusion>,
    pub bands: Vec<Band>,
    pub delineated_pixels: usize,
    pub reference_pixels: usize,
}

fn within(sq_px: f64, d: f64, gsd: f64) -> bool {
    let r = d / gsd;
    sq_px <= r * r + 1e-9
}

/// Confusion counts per buffer distance: TP/FP split delineated pixels by
/// their distance to the reference, FN counts reference pixels farther
/// than the buffer from any delineated pixel.
pub fn confusion_series(delineated: &BinaryRaster, reference: &BinaryRaster, cfg: &AssessmentConfig) -> Result<ConfusionSeries> {
    cfg.validate()?;
    let g = &cfg.grid;
    for (name, r) in [("delineated", delineated), ("reference", reference)] {
        if r.width != g.width || r.height != g.height {
            return Err(Error::Dimension(format!(
                "{name} raster is {}x{}, grid is {}x{}",
                r.width, r.height, g.width, g.height
            )));
        }
    }
    let gsd = g.transform.gsd();
    let to_ref = squared_distance_pixels(reference).ok_or(Error::EmptyReference)?;
    let to_del = squared_distance_pixels(delineated);
    let total = g.width * g.height;
    let del: Vec<f64> = delineated.data.iter().zip(&to_ref).filter(|(b, _)| **b).map(|(_, d)| *d).collect();
    let refd: Vec<f64> = match &to_del {
        Some(td) => reference.data.iter().zip(td).filter(|(b, _)| **b).map(|(_, d)| *d).collect(),
        None => vec![f64::INFINITY; reference.count()],
    };

    let counts = cfg
        .distances
        .iter()
        .map(|&d| {
            let tp = del.iter().filter(|&&s| within(s, d, gsd)).count();
            let fp = del.len() - tp;
            let fn_ = refd.iter().filter(|&&s| !within(s, d, gsd)).count();
            Confusion { tp, fp, fn_, tn: total - tp - fp - fn_ }
        })
        .collect();

    let mut bounds = vec![0.0];
    bounds.extend(cfg.distances.iter().copied().filter(|&d| d > 0.0));
    let bands = bounds
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let tp_pixels = del
                .iter()
                .filter(|&&s| within(s, w[1], gsd) && (i == 0 || !within(s, w[0], gsd)))
                .count();
            Band { lo: w[0], hi: w[1], tp_pixels }
        })
        .collect();

    Ok(ConfusionSeries {
        distances: cfg.distances.clone(),
        counts,
        bands,
        delineated_pixels: del.len(),
        reference_pixels: refd.len(),
    })
}

/// Rasterize both layers on the configured grid and compare them.
/// Grid covering both layers, padded by the largest buffer distance plus
/// one pixel.
pub fn layers_grid(delineated: &[Polyline<f64>], reference: &[Polyline<f64>], gsd: f64, distances: &[f64]) -> Result<GridSpec<f64>> {
    let bbox = delineated
        .iter()
        .chain(reference)
        .fold(BBox::empty(), |b, l| b.union(&l.bbox()));
    let pad = distances.iter().cloned().fold(0.0, f64::max) + gsd;
    GridSpec::covering(&bbox, gsd, pad)
}

pub fn assess_lines(delineated: &[Polyline<f64>], reference: &[Polyline<f64>], cfg: &AssessmentConfig) -> Result<ConfusionSeries> {
    let d = rasterize_lines(delineated, &cfg.grid)?;
    let r = rasterize_lines(reference, &cfg.grid)?;
    confusion_series(&d, &r, cfg)
}

impl ConfusionSeries {
    pub fn matched_tp(&self) -> usize {
        self.bands.iter().map(|b| b.tp_pixels).sum()
    }

    pub fn band_percent(&self, i: usize) -> f64 {
        let m = self.matched_tp();
        if m == 0 {
            0.0
        } else {
            100.0 * self.bands[i].tp_pixels as f64 / m as f64
        }
    }

    /// Display bounds of band `i`; later bands start one centimeter above
    /// the previous upper bound.
    fn band_label(&self, i: usize) -> (String, String) {
        let b = &self.bands[i];
        let lo = if i == 0 { b.lo } else { b.lo + 0.01 };
        (fmt_m(lo), fmt_m(b.hi))
    }

    /// `band_lo_m,band_hi_m,tp_pixels,tp_percent` rows plus a total row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("band_lo_m,band_hi_m,tp_pixels,tp_percent\n");
        for i in 0..self.bands.len() {
            let (lo, hi) = self.band_label(i);
            s.push_str(&format!("{lo},{hi},{},{:.1}\n", self.bands[i].tp_pixels, self.band_percent(i)));
        }
        let m = self.matched_tp();
        let pct = if m == 0 { 0.0 } else { 100.0 };
        s.push_str(&format!("total,,{m},{pct:.1}\n"));
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.bands.len() {
            let (lo, hi) = self.band_label(i);
            s.push_str(&format!("{:.1}% of TP pixels within {lo} - {hi} m\n", self.band_percent(i)));
        }
        s.push_str(&format!(
            "{} delineated pixels, {} reference pixels, {} TP pixels within {} m\n",
            self.delineated_pixels,
            self.reference_pixels,
            self.matched_tp(),
            fmt_m(*self.distances.last().unwrap_or(&0.0)),
        ));
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let bands: Vec<_> = (0..self.bands.len())
            .map(|i| {
                let b = &self.bands[i];
                serde_json::json!({
                    "lo_m": b.lo, "hi_m": b.hi, "tp_pixels": b.tp_pixels, "tp_percent": self.band_percent(i),
                })
            })
            .collect();
        let rows: Vec<_> = self
            .distances
            .iter()
            .zip(&self.counts)
            .map(|(d, c)| serde_json::json!({"distance_m": d, "tp": c.tp, "fp": c.fp, "fn": c.fn_, "tn": c.tn}))
            .collect();
        serde_json::json!({
            "delineated_pixels": self.delineated_pixels,
            "reference_pixels": self.reference_pixels,
            "matched_tp": self.matched_tp(),
            "confusion": rows,
            "bands": bands,
        })
    }
}

/// Meters with at most two decimals, at least one.
fn fmt_m(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}
