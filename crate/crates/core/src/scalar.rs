//! Floating point scalar abstraction used by the vector geometry, network
//! and assessment code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar for world coordinates (meters) and derived measures.
///
/// Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute tolerance used for "lies on" and "within radius" tests.
    fn geom_eps() -> Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f64 {
    #[inline]
    fn geom_eps() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn geom_eps() -> Self {
        1e-4
    }
}
