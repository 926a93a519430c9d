use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub intercept_std_error: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
}

impl LinearFit {
    pub fn root(&self) -> f64 {
        -self.intercept / self.slope
    }
}

/// Least-squares line through `(x, y)`; `weights` (e.g. inverse variances) are
/// optional and default to uniform.
pub fn fit_line(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LinearFit> {
    let m = x.len();
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: y.len() });
    }
    if let Some(w) = weights {
        if w.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: w.len() });
        }
    }
    if m < 2 {
        return Err(Error::Degenerate("a line needs at least two points".into()));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..m).map(w).sum();
    let mx = (0..m).map(|i| w(i) * x[i]).sum::<f64>() / sw;
    let my = (0..m).map(|i| w(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..m).map(|i| w(i) * (x[i] - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("grid points are not distinct".into()));
    }
    let sxy: f64 = (0..m).map(|i| w(i) * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..m).map(|i| w(i) * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    let s2 = if m > 2 { rss / (m - 2) as f64 } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_std_error: (s2 / sxx).sqrt(),
        intercept_std_error: (s2 * (1.0 / sw + mx * mx / sxx)).sqrt(),
        residual_rms: (rss / sw).sqrt(),
    })
}

/// Root of a derivative estimated on a grid, by an unweighted (or weighted)
/// line fit. Fails unless the slope is significantly nonzero.
pub fn derivative_root_by_linear_fit(x: &[f64], d: &[f64], weights: Option<&[f64]>) -> Result<(f64, LinearFit)> {
    let fit = fit_line(x, d, weights)?;
    if !(fit.slope.abs() > 2.0 * fit.slope_std_error) {
        return Err(Error::InsignificantSlope {
            slope: fit.slope,
            std_error: fit.slope_std_error,
        });
    }
    Ok((fit.root(), fit))
}
