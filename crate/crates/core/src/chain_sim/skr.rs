//! Secret-key rate from sampled delivery times and Werner parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{delta_method_se, mean_covariance, MeanSe};

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

pub fn qber(werner: f64) -> f64 {
    ((1.0 - werner) / 2.0).clamp(0.0, 0.5)
}

/// Secret bits per delivered pair, `max(1 - 2h(QBER), 0)`.
pub fn secret_fraction(werner: f64) -> f64 {
    (1.0 - 2.0 * binary_entropy(qber(werner))).max(0.0)
}

/// `d/dw` of [`secret_fraction`]: `log2((1-q)/q)`, and zero on the clamped branch.
pub fn secret_fraction_deriv(werner: f64) -> f64 {
    if secret_fraction(werner) <= 0.0 {
        return 0.0;
    }
    let q = qber(werner);
    ((1.0 - q) / q).log2()
}

pub fn secret_fraction_second_deriv(werner: f64) -> f64 {
    if secret_fraction(werner) <= 0.0 {
        return 0.0;
    }
    let q = qber(werner);
    1.0 / (2.0 * std::f64::consts::LN_2 * q * (1.0 - q))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkrEstimate {
    /// Hz.
    pub skr: f64,
    pub skr_std_error: f64,
    pub mean_t_ent: f64,
    pub mean_t_ent_std_error: f64,
    pub mean_werner: f64,
    pub mean_werner_std_error: f64,
    pub qber: f64,
    pub n_samples: usize,
}

impl SkrEstimate {
    /// Rate from per-sample delivery times and Werner parameters. The error is
    /// first-order propagation of the joint sampling error of the two means.
    pub fn from_samples(t_ent: &[f64], werner: &[f64]) -> Result<Self> {
        if t_ent.len() != werner.len() {
            return Err(Error::DimensionMismatch {
                expected: t_ent.len(),
                got: werner.len(),
            });
        }
        if t_ent.len() < 2 {
            return Err(Error::domain("at least two samples are required"));
        }
        let t = MeanSe::of(t_ent);
        let w = MeanSe::of(werner);
        if !(t.mean > 0.0) {
            return Err(Error::Degenerate(format!(
                "mean delivery time {} is not positive",
                t.mean
            )));
        }
        let r = secret_fraction(w.mean);
        let skr = r / t.mean;
        let grad = [-r / (t.mean * t.mean), secret_fraction_deriv(w.mean) / t.mean];
        let cov = mean_covariance(&[t_ent, werner]);
        Ok(SkrEstimate {
            skr,
            skr_std_error: delta_method_se(&grad, &cov),
            mean_t_ent: t.mean,
            mean_t_ent_std_error: t.std_error,
            mean_werner: w.mean,
            mean_werner_std_error: w.std_error,
            qber: qber(w.mean),
            n_samples: t_ent.len(),
        })
    }

    pub fn mean_rate(&self) -> f64 {
        1.0 / self.mean_t_ent
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkrGradient {
    pub gradient: f64,
    pub std_error: f64,
    /// The rate sits on the zero branch of the secret fraction; the gradient is 0.
    pub clamped: bool,
    pub d_mean_t_ent: f64,
    pub d_mean_t_ent_std_error: f64,
    pub d_mean_werner: f64,
    pub d_mean_werner_std_error: f64,
    pub estimate: SkrEstimate,
}

impl SkrGradient {
    /// Gradient of `r(E[w]) / E[T]` from per-sample values and derivative
    /// estimates of `T` and `w`.
    pub fn from_samples(t_ent: &[f64], werner: &[f64], d_t_ent: &[f64], d_werner: &[f64]) -> Result<Self> {
        let estimate = SkrEstimate::from_samples(t_ent, werner)?;
        for d in [d_t_ent, d_werner] {
            if d.len() != t_ent.len() {
                return Err(Error::DimensionMismatch {
                    expected: t_ent.len(),
                    got: d.len(),
                });
            }
        }
        let dt = MeanSe::of(d_t_ent);
        let dw = MeanSe::of(d_werner);
        let t = estimate.mean_t_ent;
        let w = estimate.mean_werner;
        let r = secret_fraction(w);
        let clamped = r <= 0.0;
        let (gradient, std_error) = if clamped {
            (0.0, 0.0)
        } else {
            let r1 = secret_fraction_deriv(w);
            let r2 = secret_fraction_second_deriv(w);
            // a perfect state with a still Werner parameter has no w-term at all
            let w_term = |x: f64| if dw.mean == 0.0 { 0.0 } else { x };
            let g = -dt.mean * r / (t * t) + w_term(r1 * dw.mean / t);
            let grad = [
                2.0 * dt.mean * r / (t * t * t) - w_term(r1 * dw.mean / (t * t)),
                -dt.mean * r1 / (t * t) + w_term(r2 * dw.mean / t),
                -r / (t * t),
                r1 / t,
            ];
            let cov = mean_covariance(&[t_ent, werner, d_t_ent, d_werner]);
            (g, delta_method_se(&grad, &cov))
        };
        Ok(SkrGradient {
            gradient,
            std_error,
            clamped,
            d_mean_t_ent: dt.mean,
            d_mean_t_ent_std_error: dt.std_error,
            d_mean_werner: dw.mean,
            d_mean_werner_std_error: dw.std_error,
            estimate,
        })
    }
}
