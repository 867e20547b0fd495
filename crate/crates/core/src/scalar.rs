//! Scalar abstractions shared by the metric code.
//!
//! Overlap metrics only need field arithmetic, so they accept any [`Scalar`],
//! including exact rationals. Distance computations need square roots and
//! infinities and are bounded by [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// A number type the overlap ratios can be evaluated in.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + Debug {
    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("voxel count not representable in scalar type")
    }
}

impl<T: Num + Copy + PartialOrd + FromPrimitive + Debug> Scalar for T {}

/// floating point: f32 or f64
pub trait Real: Float + Scalar + Send + Sync + 'static {
    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to any float")
    }

    #[inline]
    fn from_index(i: usize) -> Self {
        <Self as FromPrimitive>::from_usize(i).expect("index converts to any float")
    }
}

impl Real for f32 {}
impl Real for f64 {}
