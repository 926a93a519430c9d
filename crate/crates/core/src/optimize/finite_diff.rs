use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Forward,
    Backward,
    Central,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiffResult {
    pub estimate: f64,
    pub std_error: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
}

/// Difference quotient of a noisy evaluator returning `(value, std_error)`.
///
/// The central stencil is `x ± ε/2`; forward and backward shift it by `ε/2`,
/// to `[x, x + ε]` and `[x - ε, x]`. The two evaluations are treated as
/// independent for the error.
pub fn finite_difference<E>(mut f: E, x: f64, epsilon: f64, scheme: Scheme) -> Result<FiniteDiffResult>
where
    E: FnMut(f64) -> Result<(f64, f64)>,
{
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::domain(format!("step {epsilon} must be finite and nonzero")));
    }
    let (lo, hi) = match scheme {
        Scheme::Central => (x - epsilon / 2.0, x + epsilon / 2.0),
        Scheme::Forward => (x, x + epsilon),
        Scheme::Backward => (x - epsilon, x),
    };
    let (fh, sh) = f(hi)?;
    let (fl, sl) = f(lo)?;
    Ok(FiniteDiffResult {
        estimate: (fh - fl) / epsilon,
        std_error: (sh * sh + sl * sl).sqrt() / epsilon.abs(),
        epsilon,
        scheme,
    })
}
