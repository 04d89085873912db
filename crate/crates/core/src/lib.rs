//! Compatibility and incompatibility of finite-dimensional quantum devices.
//!
//! Observables, channels, instruments and process observables are checked for
//! joint implementability by reducing each question to a semidefinite
//! feasibility problem, solved by the projection engine in [`sdp`].

pub mod chancompat;
pub mod config;
pub mod devices;
pub mod error;
pub mod linalg;
pub mod obschan;
pub mod obscompat;
pub mod process;
pub mod num;
pub mod sdp;
pub mod steering;

pub use config::{Method, Tolerances};
pub use error::{Error, Result};

/// Complex scalar used by the device layer.
pub type C64 = num::Cx<f64>;
/// Dense complex matrix in double precision.
pub type Matrix = linalg::ComplexMatrix<f64>;
/// Hermitian matrix in double precision.
pub type Hermitian = linalg::HermitianMatrix<f64>;
/// Spectral decomposition in double precision.
pub type Eigen = linalg::EigenDecomposition<f64>;
