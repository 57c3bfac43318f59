//! Exact, finite-volume machinery for constructive expansions.
//!
//! The crate turns the combinatorial identities behind Taylor forest
//! interpolation, the polymer cluster expansion, the hardcore Mayer expansion
//! and the fermionic tree expansion into computations over arbitrary-precision
//! rationals, so each identity can be checked with exact equality.
//!
//! Module map:
//!
//! - [`forest`]: links, forests, trees, Prüfer enumeration, paths.
//! - [`weakening`]: symmetric and rooted weakening factors, exact PSD certificates.
//! - [`symbolic`]: multivariate polynomials, truncated series, min-expressions.
//! - [`forest_formula`]: symmetric, rooted and ordered forest formulas.
//! - [`gaussian`]: finite Gaussian φ⁴ models and their cluster expansion.
//! - [`mayer`]: hardcore polymer gas and its Mayer expansion.
//! - [`fermion`]: Grassmann models, fermionic tree expansion, Gram bounds.
//! - [`propagator`]: slice kernels and covariance generation (floating point).

pub mod combinat;
pub mod error;
pub mod fermion;
pub mod forest;
pub mod forest_formula;
pub mod gaussian;
pub mod limits;
pub mod matrix;
pub mod mayer;
pub mod propagator;
pub mod rational;
pub mod symbolic;
pub mod weakening;

pub use error::{Error, Result};
pub use limits::Limits;
pub use matrix::QMatrix;
pub use rational::Rational;
