//! Numerical toolkit for the one-dimensional fractional boundary-value problem
//!
//! ```text
//! d/dt ( 0D_t^{α-1}(0^cD_t^α u) - tD_T^{α-1}(t^cD_T^α u) ) + μ f(u) = 0,   u(0) = u(T) = 0
//! ```
//!
//! with `α ∈ (1/2, 1]`. The crate provides discrete Riemann–Liouville and
//! Caputo operators ([`kernel`]), a sine-spectral model of the energy space
//! ([`space`]), the energy functional `J_μ = Φ − μΨ` ([`energy`]), the
//! existence conditions and admissible parameter ranges ([`conditions`]), a
//! sublevel-constrained minimizer ([`solver`]) and the μ-sweep harness with
//! its command line front end ([`harness`], [`cli`]).

// reference values and quadrature coefficients are quoted to full precision
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod conditions;
pub mod energy;
mod error;
pub mod extended;
pub mod harness;
pub mod kernel;
pub mod nonlinearity;
pub mod problem;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
