//! Contour detection: oriented gradient cues over brightness, color and
//! texture, optional spectral globalization, watershed closure, a greedy
//! hierarchical boundary strength, thinning and vectorization.

mod gradient;
mod spectral;
mod textons;
mod thin;
mod ucm;
mod vectorize;
mod watershed;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use gradient::{chi_squared_half, oriented_gradient, oriented_gradients, BinnedChannel};
pub use spectral::spectral_globalize;
pub use textons::{compute_textons, filter_support, TextonMap};
pub use thin::{binary_boundary_map, thin};
pub use ucm::boundary_strength;
pub use vectorize::vectorize_boundaries;
pub use watershed::close_contours;

use crate::error::{Error, Result};
use crate::geometry::Polyline;
use crate::raster::{save_gray16, Downscale, GeoTransform, LabGrid, LabelMap, DEFAULT_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Mpb,
    Spb,
    Gpb,
    Ucm,
}

/// Per-pixel boundary probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProbabilityMap {
    pub width: usize,
    pub height: usize,
    pub p: Vec<f64>,
    pub transform: GeoTransform<f64>,
    pub kind: MapKind,
}

impl BoundaryProbabilityMap {
    pub fn new(width: usize, height: usize, p: Vec<f64>, transform: GeoTransform<f64>, kind: MapKind) -> Result<Self> {
        if p.len() != width * height {
            return Err(Error::Dimension(format!("{} values for {width}x{height}", p.len())));
        }
        if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("probability {v} outside [0, 1]")));
        }
        Ok(Self { width, height, p, transform, kind })
    }

    pub fn max(&self) -> f64 {
        self.p.iter().cloned().fold(0.0, f64::max)
    }

    /// 16-bit grayscale PNG, full scale = probability 1.
    pub fn save_png16(&self, path: &Path) -> Result<()> {
        let data = self.p.iter().map(|v| (v * 65535.0).round() as u16).collect();
        save_gray16(path, self.width, self.height, data)
    }
}

/// Per-pixel boundary / no-boundary labels, thinned to one-pixel curves.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryBoundaryMap {
    pub width: usize,
    pub height: usize,
    pub boundary: Vec<bool>,
    pub transform: GeoTransform<f64>,
}

impl BinaryBoundaryMap {
    pub fn count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let data: Vec<u8> = self.boundary.iter().map(|&b| if b { 255 } else { 0 }).collect();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, data)
            .expect("size")
            .save(path)?;
        Ok(())
    }
}

/// Cue channels in weight order.
pub const CHANNELS: [&str; 4] = ["brightness", "color_a", "color_b", "texture"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CueParams {
    pub orientations: usize,
    /// Half-disc radii in pixels, one per scale, strictly increasing.
    pub radii: Vec<usize>,
    /// One weight per scale and channel (see [`CHANNELS`]).
    pub weights: Vec<[f64; 4]>,
    pub bins: usize,
    pub texton_count: usize,
    pub alpha_mpb: f64,
    pub alpha_spb: f64,
    pub eigenvectors: usize,
    pub spectral: bool,
    /// Largest dimension of the copy used for the spectral stage.
    pub spectral_cap: usize,
    /// Largest dimension accepted by contour detection; larger inputs are
    /// reduced first.
    pub max_dim: usize,
    /// Basins shallower than this are flooded before the watershed.
    pub min_basin_depth: f64,
    /// Binary boundary threshold on the hierarchical strength.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for CueParams {
    fn default() -> Self {
        Self {
            orientations: 8,
            radii: vec![3, 6, 10],
            weights: vec![[1.0; 4]; 3],
            bins: 25,
            texton_count: 32,
            alpha_mpb: 1.0,
            alpha_spb: 1.0,
            eigenvectors: 16,
            spectral: true,
            spectral_cap: 250,
            max_dim: DEFAULT_MAX_DIM,
            min_basin_depth: 0.05,
            threshold: 0.3,
            seed: 0x5eed_cafe,
        }
    }
}

impl CueParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if self.orientations == 0 || self.orientations > 32 {
            return bad("orientations must be in 1..=32");
        }
        if self.radii.is_empty() || self.radii[0] < 2 || self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return bad("radii must be >= 2 and strictly increasing");
        }
        if self.weights.len() != self.radii.len() {
            return bad("need one weight row per scale");
        }
        let flat: Vec<f64> = self.weights.iter().flatten().cloned().collect();
        if flat.iter().any(|w| !(*w >= 0.0)) || flat.iter().all(|w| *w == 0.0) {
            return bad("weights must be nonnegative and not all zero");
        }
        if self.bins == 0 || self.bins > u16::MAX as usize {
            return bad("bins must be positive");
        }
        if self.texton_count == 0 {
            return bad("texton count must be positive");
        }
        if self.alpha_mpb < 0.0 || self.alpha_spb < 0.0 || self.alpha_mpb + self.alpha_spb <= 0.0 {
            return bad("globalization weights must be nonnegative, not both zero");
        }
        if self.max_dim < 2 || self.spectral_cap < 2 {
            return bad("size caps must be at least 2");
        }
        if !(self.min_basin_depth >= 0.0) {
            return bad("minimum basin depth must be nonnegative");
        }
        if !(self.threshold >= 0.0) {
            return bad("threshold must be nonnegative");
        }
        Ok(())
    }

    pub fn orientation_angles(&self) -> Vec<f64> {
        (0..self.orientations).map(|k| PI * k as f64 / self.orientations as f64).collect()
    }

    fn uses_texture(&self) -> bool {
        self.weights.iter().any(|w| w[3] > 0.0)
    }
}

const LAB_RANGES: [(f64, f64); 3] = [(0.0, 100.0), (-128.0, 128.0), (-128.0, 128.0)];

/// Local multiscale boundary signal: per pixel, the maximum over
/// orientations of the weighted sum of cue gradients, normalized by the
/// total weight.
pub fn multiscale_pb(lab: &LabGrid, params: &CueParams) -> Result<BoundaryProbabilityMap> {
    params.validate()?;
    let (w, h) = (lab.width, lab.height);
    let angles = params.orientation_angles();
    let mut channels: Vec<Option<BinnedChannel>> = [&lab.l, &lab.a, &lab.b]
        .iter()
        .zip(LAB_RANGES)
        .map(|(plane, (lo, hi))| Some(BinnedChannel::quantize(plane, w, h, lo, hi, params.bins)))
        .collect();
    channels.push(if params.uses_texture() {
        let t = compute_textons(lab, params)?;
        Some(BinnedChannel::from_ids(&t.ids, w, h, t.count))
    } else {
        None
    });

    let total: f64 = params.weights.iter().flatten().sum();
    let mut combined = vec![vec![0.0; w * h]; angles.len()];
    for (scale, &radius) in params.radii.iter().enumerate() {
        for (ci, ch) in channels.iter().enumerate() {
            let wt = params.weights[scale][ci];
            let Some(ch) = ch else { continue };
            if wt == 0.0 {
                continue;
            }
            let maps = oriented_gradients(ch, radius, &angles);
            for (acc, g) in combined.iter_mut().zip(maps) {
                for (a, v) in acc.iter_mut().zip(g) {
                    *a += wt * v;
                }
            }
        }
    }
    let p = (0..w * h)
        .map(|i| (combined.iter().map(|c| c[i]).fold(0.0, f64::max) / total).clamp(0.0, 1.0))
        .collect();
    Ok(BoundaryProbabilityMap { width: w, height: h, p, transform: lab.transform, kind: MapKind::Mpb })
}

/// Every intermediate product of contour detection.
#[derive(Debug, Clone)]
pub struct ContourResult {
    /// Linear reduction factor applied before detection (1.0 if none).
    pub scale: f64,
    pub mpb: BoundaryProbabilityMap,
    pub gpb: BoundaryProbabilityMap,
    pub regions: LabelMap,
    pub ucm: BoundaryProbabilityMap,
    pub binary: BinaryBoundaryMap,
    pub outlines: Vec<Polyline<f64>>,
}

/// Full contour detection chain on a Lab raster.
pub fn detect_contours(lab: &LabGrid, params: &CueParams) -> Result<ContourResult> {
    params.validate()?;
    let (small, scale) = lab.downscale(params.max_dim);
    let mpb = multiscale_pb(&small, params)?;
    let gpb = if params.spectral {
        spectral_globalize(&mpb, params)?
    } else {
        let mut g = mpb.clone();
        g.kind = MapKind::Gpb;
        g
    };
    let regions = close_contours(&gpb, params.min_basin_depth);
    let ucm = boundary_strength(&regions, &gpb)?;
    let binary = binary_boundary_map(&ucm, params.threshold);
    let outlines = vectorize_boundaries(&binary);
    Ok(ContourResult { scale, mpb, gpb, regions, ucm, binary, outlines })
}
