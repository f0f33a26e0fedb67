//! Quadratic assignment problem toolkit: instances, assignment-problem
//! bounds, LP linearizations, ab-cut separation and a branch-and-cut solver.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! unsuffixed aliases below fix the scalar to `f64`.

pub mod bnc;
pub mod cuts;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod lap;
pub mod linearizations;
pub mod lpcore;
pub mod matrix;
pub mod scalar;

pub use error::{QapError, Result};
pub use instance::{
    brute_force_optimum, evaluate, parse_qaplib, serialize_qaplib, DoublyStochasticPoint, Permutation, QapInstance,
};
pub use matrix::SquareMatrix;
pub use scalar::Scalar;

pub type Instance = QapInstance<f64>;
pub type Matrix = SquareMatrix<f64>;
pub type LpModel = lpcore::LpModel<f64>;
pub type LpSolution = lpcore::LpSolution<f64>;
pub type BoundTables = lap::BoundTables<f64>;
pub type Linearization = linearizations::Linearization<f64>;
pub type AbCut = cuts::AbCut<f64>;
pub type ConeElement = cuts::ConeElement<f64>;
pub type CutPool = cuts::CutPool<f64>;
pub type SolveReport = bnc::SolveReport<f64>;
