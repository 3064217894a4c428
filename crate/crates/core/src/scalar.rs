//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar the walk is simulated in (`f32` or `f64`).
///
/// The tolerances are per-precision: the `f64` values are the ones the
/// public contracts are stated in, the `f32` values are scaled to what
/// single precision can honor over a few hundred steps.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Maximum deviation of the squared norm from one accepted by validating
    /// operations such as the partial trace.
    fn norm_tolerance() -> Self;

    /// Maximum asymmetry accepted for a matrix to count as Hermitian.
    fn hermitian_tolerance() -> Self;

    /// Eigenvalues in `[-floor, 0)` are rounding noise and clamp to zero.
    fn eigen_floor() -> Self;

    /// Eigenvalues below `-reject` mean the input is not a density matrix.
    fn eigen_reject() -> Self;

    /// Maximum deviation of a position distribution's total from one.
    fn probability_tolerance() -> Self;

    /// Negative variances above `-variance_floor` clamp to zero.
    fn variance_floor() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in every Real")
    }
}

impl Real for f64 {
    fn norm_tolerance() -> Self {
        1e-6
    }
    fn hermitian_tolerance() -> Self {
        1e-8
    }
    fn eigen_floor() -> Self {
        1e-10
    }
    fn eigen_reject() -> Self {
        1e-8
    }
    fn probability_tolerance() -> Self {
        1e-8
    }
    fn variance_floor() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn norm_tolerance() -> Self {
        1e-3
    }
    fn hermitian_tolerance() -> Self {
        1e-4
    }
    fn eigen_floor() -> Self {
        1e-5
    }
    fn eigen_reject() -> Self {
        1e-4
    }
    fn probability_tolerance() -> Self {
        1e-3
    }
    // Variance is a difference of O(T^2) moments; single precision loses
    // roughly seven digits of it.
    fn variance_floor() -> Self {
        1e-2
    }
}
