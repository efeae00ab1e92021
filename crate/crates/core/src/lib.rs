//! Numerical laboratory for the inverse-square Schrödinger operator
//! `L_a = −Δ + a/|x|²` on radial functions and the energy-critical
//! quintic NLS `(i∂_t − L_a)u = μ|u|⁴u`.

pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod ground_state;
pub mod hankel;
pub mod logradial;
pub mod operator;
pub mod quadrature;
pub mod special;
pub mod variational;

pub use error::{Error, Result};
pub use hankel::{make_grid, quad_integrate, HankelPlan, RadialField, RadialGrid, SpectralField};
pub use operator::{derive_params, CouplingParams, MultiplierSpec};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
