//! Stochastic automatic differentiation of quantum-repeater chain simulations.
//!
//! The [`stochad`] module carries values together with unbiased derivative
//! estimates through programs that draw discrete random numbers. On top of it,
//! [`chain_sim`] samples delivery times and Werner parameters of repeater
//! chains, [`optimize`] turns the resulting gradients into parameter searches,
//! and [`placement`] positions repeaters in the plane.

pub mod chain_model;
pub mod chain_sim;
pub mod error;
pub mod optimize;
pub mod placement;
pub mod real;
pub mod stats;
pub mod stochad;

pub use error::{Error, Result};
pub use real::Real;
pub use stochad::{AdScalar, EstimatorResult, RandomSource, StochasticTriple};

pub type Triple = StochasticTriple<f64>;
pub type Triple32 = StochasticTriple<f32>;
