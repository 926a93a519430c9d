use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric cooling: epoch `i` (from 1) runs at `t0 · decay^i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSchedule {
    pub t0: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_iters")]
    pub iters_per_epoch: usize,
}

fn default_decay() -> f64 {
    0.8
}
fn default_epochs() -> usize {
    25
}
fn default_iters() -> usize {
    15
}

impl AnnealSchedule {
    pub fn new(t0: f64) -> Self {
        AnnealSchedule {
            t0,
            decay: default_decay(),
            epochs: default_epochs(),
            iters_per_epoch: default_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Config(format!("t0 must be positive, got {}", self.t0)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::Config(format!("decay must lie in (0, 1), got {}", self.decay)));
        }
        Ok(())
    }

    pub fn temperature(&self, epoch: usize) -> f64 {
        self.t0 * self.decay.powi(epoch as i32)
    }

    /// Temperatures of epochs `1..=epochs`.
    pub fn temperatures(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.epochs).map(|i| self.temperature(i))
    }
}

/// Samples per evaluation at temperature `t`: `ceil(30 / (1 + t))`.
pub fn samples_at(t: f64) -> usize {
    (30.0 / (1.0 + t)).ceil().max(1.0) as usize
}

/// Rate with a bonus for fast delivery that fades as the temperature drops.
pub fn annealed_utility(skr: f64, mean_t_ent: f64, t: f64) -> f64 {
    if t == 0.0 {
        skr
    } else {
        skr + 0.1 * t / mean_t_ent
    }
}

/// Derivative of [`annealed_utility`] given derivatives of the rate and mean time.
pub fn annealed_utility_gradient(d_skr: f64, mean_t_ent: f64, d_mean_t_ent: f64, t: f64) -> f64 {
    d_skr - 0.1 * t * d_mean_t_ent / (mean_t_ent * mean_t_ent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        let s = AnnealSchedule::new(10.0);
        let ts: Vec<f64> = s.temperatures().collect();
        assert_eq!(ts.len(), 25);
        assert!((ts[0] - 8.0).abs() < 1e-12);
        assert!(ts.windows(2).all(|w| w[1] < w[0]));
        assert!(AnnealSchedule { decay: 1.0, ..s }.validate().is_err());
    }

    #[test]
    fn sample_counts() {
        assert_eq!(samples_at(0.0), 30);
        assert_eq!(samples_at(1.0), 15);
        assert_eq!(samples_at(10.0), 3);
        assert_eq!(samples_at(1e9), 1);
    }

    #[test]
    fn utility_at_zero_temperature() {
        assert_eq!(annealed_utility(3.5, 0.2, 0.0), 3.5);
        assert!((annealed_utility(3.5, 0.2, 2.0) - 4.5).abs() < 1e-12);
    }
}
