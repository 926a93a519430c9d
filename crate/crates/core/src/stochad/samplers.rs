//! Discrete samplers with derivative couplings.
//!
//! The primal outcome always comes from the source's primal stream; the
//! coupled alternative (which earlier trial flips, or a fresh count) comes from
//! the coupling stream. Couplings follow the sign of the parameter's delta.

use super::random::RandomSource;
use super::triple::StochasticTriple;
use crate::error::{Error, Result};
use crate::real::Real;

fn check_param<F: Real>(p: &StochasticTriple<F>, rng: &RandomSource, max_inclusive: bool) -> Result<f64> {
    if rng.has_live_perturbation(p) {
        return Err(Error::domain(
            "finite perturbation in a sampler parameter is not supported",
        ));
    }
    let v = p.value().as_f64();
    let upper_ok = if max_inclusive { v <= 1.0 } else { v < 1.0 };
    if v > 0.0 && upper_ok {
        Ok(v)
    } else {
        Err(Error::domain(format!("probability {v} out of range")))
    }
}

/// Bernoulli draw with success probability `p`.
pub fn sample_bernoulli<F: Real>(
    p: &StochasticTriple<F>,
    rng: &mut RandomSource,
) -> Result<StochasticTriple<F>> {
    let pv = check_param(p, rng, false)?;
    let hit = rng.bernoulli(pv);
    let d = p.delta().as_f64();
    let (value, jump, weight) = match (hit, d) {
        (false, d) if d > 0.0 => (0.0, 1.0, d / (1.0 - pv)),
        (true, d) if d < 0.0 => (1.0, -1.0, -d / pv),
        (hit, _) => return Ok(StochasticTriple::constant(F::of(hit as u8 as f64))),
    };
    let id = rng.register(weight);
    Ok(StochasticTriple::from_event(
        F::of(value),
        F::zero(),
        F::of(jump),
        F::of(weight),
        id,
    ))
}

/// Number of trials up to and including the first success, each succeeding
/// with probability `p`. `p = 1` is accepted and always yields 1.
pub fn sample_geometric<F: Real>(
    p: &StochasticTriple<F>,
    rng: &mut RandomSource,
) -> Result<StochasticTriple<F>> {
    let pv = check_param(p, rng, true)?;
    let n = rng.geometric(pv);
    let d = p.delta().as_f64();
    let value = F::of(n as f64);
    if d > 0.0 && n >= 2 {
        // one of the n-1 failures turns into the first success
        let k = rng.aux_range(1, n - 1);
        let weight = d * (n - 1) as f64 / (1.0 - pv);
        let id = rng.register(weight);
        let jump = k as f64 - n as f64;
        Ok(StochasticTriple::from_event(value, F::zero(), F::of(jump), F::of(weight), id))
    } else if d < 0.0 {
        // the final success fails and a fresh run of trials follows
        let m = rng.aux_geometric(pv);
        let weight = -d / pv;
        let id = rng.register(weight);
        Ok(StochasticTriple::from_event(value, F::zero(), F::of(m as f64), F::of(weight), id))
    } else {
        Ok(StochasticTriple::constant(value))
    }
}
