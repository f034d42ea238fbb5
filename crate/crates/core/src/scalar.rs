//! Scalar abstraction so the numeric core runs at `f32` or `f64`.
//!
//! The crate-level aliases fix `f64`, which keeps gradient checks tight and
//! trajectories bit-reproducible; `f32` remains available for callers that
//! want the smaller footprint.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar with the numeric, formatting, and serde bounds the
/// simulator and learners need.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Default
    + Display
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, the type of all literals and config defaults.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
