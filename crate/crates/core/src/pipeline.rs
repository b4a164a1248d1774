//! Automatic network generation: contours and superpixels fused into a
//! clean line network.

use serde::{Deserialize, Serialize};

use crate::contours::{detect_contours, ContourResult, CueParams};
use crate::error::{Error, Result};
use crate::geometry::Polyline;
use crate::raster::{rgb_to_lab, ImageGrid, LabelMap};
use crate::superpixels::{slic, superpixel_outlines, SlicParams};
use crate::vectornet::{buffer_filter, build_network, clean_topology, LineNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub cue: CueParams,
    pub slic: SlicParams,
    pub buffer_radius_m: f64,
    /// Defaults to one GSD.
    pub snap_tol_m: Option<f64>,
    /// Defaults to ten GSD.
    pub min_dangle_m: Option<f64>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            cue: CueParams::default(),
            slic: SlicParams::default(),
            buffer_radius_m: 5.0,
            snap_tol_m: None,
            min_dangle_m: None,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.cue.validate()?;
        self.slic.validate()?;
        if !(self.buffer_radius_m >= 0.0) {
            return Err(Error::Parameter("buffer radius must be >= 0".into()));
        }
        for (name, v) in [("snap tolerance", self.snap_tol_m), ("minimum dangle", self.min_dangle_m)] {
            if v.is_some_and(|v| !(v >= 0.0)) {
                return Err(Error::Parameter(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

pub struct NetworkRun {
    pub contours: ContourResult,
    pub labels: LabelMap,
    pub slic_lines: Vec<Polyline<f64>>,
    pub kept_lines: Vec<Polyline<f64>>,
    pub cleaned: Vec<Polyline<f64>>,
    pub network: LineNetwork<f64>,
    pub warnings: Vec<String>,
}

/// Contours on a (possibly downscaled) copy, SLIC at full resolution,
/// SLIC outlines kept within the buffer of the contour outlines, then
/// cleaned and turned into a network.
pub fn generate_network(img: &ImageGrid, params: &PipelineParams) -> Result<NetworkRun> {
    params.validate()?;
    let gsd = img.transform.gsd();
    let lab = rgb_to_lab(img);
    log::info!("contours: {}x{} px", img.width, img.height);
    let contours = detect_contours(&lab, &params.cue)?;
    log::info!("contours: {} outlines at scale {:.3}", contours.outlines.len(), contours.scale);
    let labels = slic(&lab, &params.slic)?;
    let slic_lines = superpixel_outlines(&labels);
    log::info!("superpixels: {} regions, {} outlines", labels.count(), slic_lines.len());

    let mut warnings = Vec::new();
    let filtered = buffer_filter(&slic_lines, &contours.outlines, params.buffer_radius_m);
    warnings.extend(filtered.warning);
    let snap = params.snap_tol_m.unwrap_or(gsd);
    let dangle = params.min_dangle_m.unwrap_or(10.0 * gsd);
    let cleaned = clean_topology(&filtered.lines, snap, dangle);
    let network = build_network(&cleaned)?;
    log::info!("network: {} nodes, {} edges", network.nodes.len(), network.edges.len());
    Ok(NetworkRun {
        contours,
        labels,
        slic_lines,
        kept_lines: filtered.lines,
        cleaned,
        network,
        warnings,
    })
}
