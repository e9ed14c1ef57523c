//! Low-rank third-order tensor estimation and inference.
//!
//! The crate is organized bottom-up: [`tensor`] and [`linalg`] provide the
//! dense multilinear algebra, [`pca`] and [`regression`] the estimators, and
//! [`inference`] the standardized statistics and confidence sets built on
//! their outputs.

pub mod error;
pub mod factors;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod pca;
pub mod regression;
pub mod subspace;
pub mod tensor;

pub use error::{Error, Result};
pub use factors::{OrthFactors, TuckerFactors, ORTHONORMAL_TOL};
pub use regression::RegressionDataset;
pub use subspace::{match_components, procrustes_align, sin_theta, MatchResult, SubspaceDistance};
pub use tensor::{fold, kronecker, matricize, mode_product, multilinear_product, Matrix, Mode, RankTriple, Tensor3};
