//! Stochastic automatic differentiation for programs with discrete randomness.

pub mod estimate;
pub mod ops;
pub mod random;
pub mod samplers;
pub mod scalar;
pub mod triple;

pub use estimate::{estimate, run_samples, EstimatorResult};
pub use ops::{BinaryFn, UnaryFn};
pub use random::{derive_seed, EventId, RandomSource};
pub use samplers::{sample_bernoulli, sample_geometric};
pub use scalar::AdScalar;
pub use triple::{Perturbation, StochasticTriple};

use crate::error::Result;
use crate::real::Real;

pub fn make_input<F: Real>(x: F) -> Result<StochasticTriple<F>> {
    StochasticTriple::input(x)
}

pub fn make_const<F: Real>(x: F) -> StochasticTriple<F> {
    StochasticTriple::constant(x)
}

pub fn apply_smooth<F: Real, U: UnaryFn<F>>(f: &U, t: &StochasticTriple<F>) -> Result<StochasticTriple<F>> {
    t.map(f)
}

pub fn combine<F: Real, B: BinaryFn<F>>(
    op: &B,
    a: &StochasticTriple<F>,
    b: &StochasticTriple<F>,
    rng: &mut RandomSource,
) -> Result<StochasticTriple<F>> {
    a.zip(op, b, rng)
}

pub fn derivative_estimate<F: Real>(t: &StochasticTriple<F>) -> F {
    t.derivative_estimate()
}
