//! Riemannian stochastic optimization on the Grassmann manifold.
//!
//! The crate provides
//!
//! * a manifold contract ([`manifold`]) and its Grassmann implementation
//!   ([`grassmann`]) with exact geodesic geometry and a cheaper QR geometry,
//! * three finite-sum objectives ([`problems`]): PCA, Karcher mean of
//!   subspaces, and low-rank matrix completion,
//! * stochastic variance-reduced gradient (R-SVRG, R-SVRG+), plain
//!   stochastic gradient (R-SGD) and steepest descent with backtracking
//!   (R-SD) in [`optim`],
//! * an experiment harness ([`harness`]) with data generators, rating-file
//!   loaders, sweeps and CSV output, driven by the `riemann-svrg` binary.
//!
//! With the default `parallel` feature, full-gradient reductions and sweeps
//! run on rayon; results are bitwise identical to the sequential build.

pub mod error;
pub mod grassmann;
pub mod harness;
pub mod linalg;
pub mod manifold;
pub mod optim;
pub mod parallel;
pub mod problems;
pub mod seeds;

pub use error::{Error, Result};
pub use grassmann::{GeometryKind, Grassmann, GrassmannPoint, GrassmannTangent};
pub use manifold::{Manifold, MatrixPoint, Tangent};
