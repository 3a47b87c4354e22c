//! Exact symbolic and numerical verification engine for two-dimensional
//! Hamiltonians with higher-order integrals of motion.
//!
//! The crate builds classical observables (polynomials in the momenta with
//! exact monomial coefficients) and quantum observables (normal-ordered
//! differential operators), proves commutation relations by exact
//! computation, solves the linear determining systems for admissible
//! integrals of orders 2-4, and monitors conservation along numerically
//! integrated trajectories.

pub mod detsys;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod models;
pub mod phasepoly;
pub mod rational;
pub mod report;
pub mod symexpr;
pub mod weylop;

pub use error::{Error, Result};
pub use gaussian::GaussianRational;
pub use rational::Rational;
pub use symexpr::{Expression, MonomialKey, Var};
