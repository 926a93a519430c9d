//! Monte Carlo drivers: per-sample streams, parallel fan-out, ordered reduction.

use rayon::prelude::*;

use super::random::RandomSource;
use super::triple::StochasticTriple;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::stats;

/// Mean and standard error of a program's value and of its derivative estimate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub std_error: f64,
    pub derivative_mean: f64,
    pub derivative_std_error: f64,
    pub n_samples: usize,
}

/// Runs `program` once per sample index with stream `(seed, index)`.
///
/// Samples are spread over the current rayon pool, but results come back in
/// index order, so anything reduced from them sequentially does not depend on
/// the number of threads. The first failing sample (by index) is reported.
pub fn run_samples<T, P>(n_samples: usize, seed: u64, program: P) -> Result<Vec<T>>
where
    T: Send,
    P: Fn(usize, &mut RandomSource) -> Result<T> + Sync,
{
    let out: Vec<Result<T>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::new(seed, i as u64);
            program(i, &mut rng)
        })
        .collect();
    out.into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Sample {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Value and derivative of `E[program(p)]` from `n_samples` independent runs.
pub fn estimate<F, P>(program: P, p: F, n_samples: usize, seed: u64) -> Result<EstimatorResult>
where
    F: Real,
    P: Fn(StochasticTriple<F>, &mut RandomSource) -> Result<StochasticTriple<F>> + Sync,
{
    if n_samples < 2 {
        return Err(Error::domain("at least two samples are required"));
    }
    let x = StochasticTriple::input(p)?;
    let pairs = run_samples(n_samples, seed, |_, rng| {
        let y = program(x, rng)?;
        let y = rng.resolve(&y);
        Ok((y.value().as_f64(), y.derivative_estimate().as_f64()))
    })?;
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let derivs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let v = stats::MeanSe::of(&values);
    let d = stats::MeanSe::of(&derivs);
    Ok(EstimatorResult {
        mean: v.mean,
        std_error: v.std_error,
        derivative_mean: d.mean,
        derivative_std_error: d.std_error,
        n_samples,
    })
}
