//! Semi-automatic boundary delineation from georeferenced orthoimages.
//!
//! The crate covers the whole workflow:
//!
//! * [`contours`]: local multiscale boundary cues, optional spectral
//!   globalization, watershed closure and a hierarchical boundary strength
//!   that yields closed candidate outlines.
//! * [`superpixels`]: SLIC superpixels and their crack outlines.
//! * [`vectornet`]: buffer fusion of the two line layers, topology cleaning
//!   and the node/edge network.
//! * [`delineation`]: shortest-path and Steiner connection of selected
//!   nodes, sinuosity scoring, simplification and a session model.
//! * [`assessment`]: pixel-based localization accuracy against reference
//!   lines at increasing buffer distances.
//!
//! Vector geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the raster stages produce.

pub mod assessment;
pub mod contours;
pub mod delineation;
pub mod error;
pub mod fixtures;
pub mod geojson;
pub mod geometry;
pub mod pipeline;
pub mod raster;
pub mod scalar;
pub mod superpixels;
pub mod vectornet;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Polyline = geometry::Polyline<f64>;
pub type GeoTransform = raster::GeoTransform<f64>;
pub type LineNetwork = vectornet::LineNetwork<f64>;
pub type CandidateLine = delineation::CandidateLine<f64>;
pub type DelineationSession = delineation::DelineationSession<f64>;
pub type GridSpec = assessment::GridSpec<f64>;

pub type Point32 = geometry::Point<f32>;
pub type Polyline32 = geometry::Polyline<f32>;
