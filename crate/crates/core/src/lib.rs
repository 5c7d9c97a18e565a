//! Simulation toolkit for the imaginary-Stark skin effect in a two-chain lossy lattice.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `f64` instantiations used by the command-line driver are aliased below.

pub mod eigen;
pub mod error;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod scalar;
pub mod spectrum;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = num_complex::Complex<f64>;

pub type Matrix = linalg::CMatrix<f64>;
pub type MatrixF32 = linalg::CMatrix<f32>;
pub type Spec = model::LatticeSpec<f64>;
pub type SpecF32 = model::LatticeSpec<f32>;
pub type Profile = model::LossProfile<f64>;
pub type State = model::StateVector<f64>;
pub type Pair = eigen::EigenPair<f64>;
pub type Spectrum = eigen::SpectrumSet<f64>;
pub type Flow = transfer::TransferFlow<f64>;
pub type Decomposition = modes::ModeDecomposition<f64>;
