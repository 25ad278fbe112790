//! Heavy-tailed stable priors on sequence spaces.
//!
//! The crate provides the pieces needed to set up and probe Bayesian inverse
//! problems whose priors are built from alpha-stable coefficient laws:
//!
//! - [`stable`]: sampling and closed-form reference laws for S(alpha, beta,
//!   gamma, delta), fractional moments, and a convolution stability check.
//! - [`quasi_banach`]: lp quasinorms for 0 < p <= infinity, the weak triangle
//!   constant, an Orlicz-type log functional, and synthesis over unit
//!   sup-norm bases (Fourier, Haar, cumulative difference, canonical).
//! - [`series_prior`]: random series expansions with stable coefficients,
//!   convergence validation, and empirical norm/tail diagnostics.
//! - [`posterior`]: Gaussian misfit potentials with explicit growth bounds,
//!   evidence estimation, and self-normalized importance reweighting.
//! - [`metrics`]: Hellinger and total variation estimates between reweighted
//!   posteriors sharing one prior sample, plus the induced bound on
//!   quantity-of-interest expectations.
//! - [`wellposedness`]: conjugate linear-Gaussian reference solutions,
//!   Hellinger-Lipschitz scans in the data, and discretisation-invariance
//!   studies over grid refinements.
//! - [`inference`]: coordinate-descent MAP estimates and Metropolis-Hastings
//!   samplers adapted to heavy-tailed coefficient priors.

pub mod error;
pub mod inference;
pub mod metrics;
pub mod posterior;
pub mod quasi_banach;
mod rng;
pub mod series_prior;
pub mod stable;
pub mod stats;
pub mod wellposedness;

pub use error::{Error, Result};
