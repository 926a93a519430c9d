//! Monte Carlo estimation of key rates and their derivatives over repeater chains.

pub mod params;
pub mod sim;
pub mod skr;

pub use params::{ChainParams, Direction, LinkQuantities, Parameter};
pub use sim::{
    sample_protocol, simulate_multi_shot, simulate_multi_shot_logged, simulate_single_shot, ChainSample,
    MultiShotConfig, Protocol, SimEvent,
};
pub use skr::{SkrEstimate, SkrGradient};

use crate::chain_model::ChainSpec;
use crate::error::Result;
use crate::real::Real;
use crate::stochad::{run_samples, AdScalar, StochasticTriple};

/// Per-sample values, and derivative estimates when a direction was given.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleSet {
    pub t_ent: Vec<f64>,
    pub werner: Vec<f64>,
    pub d_t_ent: Vec<f64>,
    pub d_werner: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.t_ent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_ent.is_empty()
    }

    pub fn skr(&self) -> Result<SkrEstimate> {
        SkrEstimate::from_samples(&self.t_ent, &self.werner)
    }

    pub fn gradient(&self) -> Result<SkrGradient> {
        SkrGradient::from_samples(&self.t_ent, &self.werner, &self.d_t_ent, &self.d_werner)
    }
}

fn collect<S: AdScalar>(spec: &ChainSpec, protocol: &Protocol, dir: Option<&Direction>, n: usize, seed: u64) -> Result<SampleSet> {
    protocol.validate()?;
    let params = ChainParams::<S>::new(spec, dir)?;
    let rows = run_samples(n, seed, |_, rng| {
        let s = sample_protocol(&params, protocol, rng)?;
        Ok([
            s.t_ent.value().as_f64(),
            s.werner.value().as_f64(),
            s.t_ent.derivative().as_f64(),
            s.werner.derivative().as_f64(),
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let mut set = SampleSet {
        t_ent: col(0),
        werner: col(1),
        ..SampleSet::default()
    };
    if dir.is_some() {
        set.d_t_ent = col(2);
        set.d_werner = col(3);
    }
    Ok(set)
}

/// Primal samples in floating-point type `F`; sample `i` uses stream `(seed, i)`.
pub fn sample_values<F: Real>(spec: &ChainSpec, protocol: &Protocol, n_samples: usize, seed: u64) -> Result<SampleSet>
where
    F: AdScalar<Real = F>,
{
    collect::<F>(spec, protocol, None, n_samples, seed)
}

/// Samples with derivative estimates along `direction`. Values are bitwise
/// those of [`sample_values`] for the same seed.
pub fn sample_derivatives<F: Real>(
    spec: &ChainSpec,
    protocol: &Protocol,
    direction: &Direction,
    n_samples: usize,
    seed: u64,
) -> Result<SampleSet> {
    collect::<StochasticTriple<F>>(spec, protocol, Some(direction), n_samples, seed)
}

pub fn estimate_skr(spec: &ChainSpec, protocol: &Protocol, n_samples: usize, seed: u64) -> Result<SkrEstimate> {
    sample_values::<f64>(spec, protocol, n_samples, seed)?.skr()
}

pub fn skr_gradient(
    spec: &ChainSpec,
    protocol: &Protocol,
    parameter: &Parameter,
    n_samples: usize,
    seed: u64,
) -> Result<SkrGradient> {
    let dir = parameter.direction(spec)?;
    sample_derivatives::<f64>(spec, protocol, &dir, n_samples, seed)?.gradient()
}

/// One forward pass per direction, all on the same streams.
pub fn skr_gradients(
    spec: &ChainSpec,
    protocol: &Protocol,
    directions: &[Direction],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SkrGradient>> {
    directions
        .iter()
        .map(|d| sample_derivatives::<f64>(spec, protocol, d, n_samples, seed)?.gradient())
        .collect()
}

/// `dSKR/dT_n` for every node, in Hz/s.
pub fn sensitivity(spec: &ChainSpec, protocol: &Protocol, n_samples: usize, seed: u64) -> Result<Vec<SkrGradient>> {
    (0..spec.nodes.len())
        .map(|node| skr_gradient(spec, protocol, &Parameter::CoherenceTime { node }, n_samples, seed))
        .collect()
}
