//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the simulator is generic over (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Machine epsilon of the scalar type.
    fn machine_eps() -> Self;
}

impl Real for f32 {
    #[inline]
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    #[inline]
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}
