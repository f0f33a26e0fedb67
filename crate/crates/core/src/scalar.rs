//! Floating point scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Binary floating point type the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// A tolerance of nominal size `base`, widened to a few hundred ulps for
    /// narrow types. For `f64` every tolerance used in the crate is returned
    /// unchanged.
    fn tol(base: f64) -> Self {
        let floor = Self::epsilon() * Self::of(256.0);
        Self::of(base).max(floor)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Nominal tolerances. Use through [`Scalar::tol`].
pub mod tol {
    /// Primal and dual feasibility of LP solutions.
    pub const FEASIBILITY: f64 = 1e-7;
    /// Smallest pivot element the simplex accepts.
    pub const PIVOT: f64 = 1e-10;
    /// Integrality test on x variables.
    pub const INTEGRALITY: f64 = 1e-6;
    /// Minimum violation for an ab-cut to be kept.
    pub const VIOLATION: f64 = 1e-6;
    /// Equality of objective values in exact golden comparisons and ties.
    pub const EXACT: f64 = 1e-9;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_tolerances_are_unchanged() {
        assert_eq!(f64::tol(tol::PIVOT), 1e-10);
        assert_eq!(f64::tol(tol::FEASIBILITY), 1e-7);
    }

    #[test]
    fn f32_tolerances_are_widened() {
        assert!(f32::tol(tol::PIVOT) > 1e-6);
        assert_eq!(f32::tol(1e-2), 1e-2);
    }
}
