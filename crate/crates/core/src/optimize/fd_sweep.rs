//! Sweep of a repeater between two end nodes: rate, AD derivative and
//! central differences against the repeater's position.

use serde::{Deserialize, Serialize};

use super::finite_diff::{finite_difference, Scheme};
use crate::chain_model::{ChainSpec, LinkModel, LinkSpec, NodeSpec, DEFAULT_SPEED_OF_LIGHT};
use crate::chain_sim::{self, Direction, Protocol};
use crate::error::{Error, Result};
use crate::stochad::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub total_length: f64,
    /// dB/km of the link left and right of the repeater.
    pub attenuation_db_km: [f64; 2],
    pub fidelity: f64,
    #[serde(with = "crate::chain_model::maybe_inf")]
    pub coherence_time: f64,
    pub speed_of_light: f64,
    pub end_node_storage: bool,
    pub protocol: Protocol,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub epsilons: Vec<f64>,
    pub skr_samples: usize,
    pub derivative_samples: usize,
    pub fd_samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            total_length: 100.0,
            attenuation_db_km: [0.2, 0.6],
            fidelity: 1.0,
            coherence_time: 0.13,
            speed_of_light: DEFAULT_SPEED_OF_LIGHT,
            end_node_storage: true,
            protocol: Protocol::multi(),
            start: 66.0,
            stop: 80.0,
            step: 0.25,
            epsilons: vec![0.2, 2.0],
            skr_samples: 100_000,
            derivative_samples: 100_000,
            fd_samples: 100_000,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.total_length > 0.0
            && self.step > 0.0
            && self.start >= 0.0
            && self.stop >= self.start
            && self.stop <= self.total_length
            && self.skr_samples >= 2
            && self.derivative_samples >= 2
            && self.fd_samples >= 2;
        if !ok {
            return Err(Error::Config("sweep range, step or sample counts out of range".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("finite-difference step {e} must be positive")));
        }
        self.protocol.validate()
    }

    /// Chain with the repeater `x` km from the left end node.
    pub fn chain(&self, x: f64) -> ChainSpec {
        let link = |length: f64, g: f64| LinkSpec {
            length,
            model: LinkModel::FixedWerner {
                fidelity: self.fidelity,
                attenuation_db_km: g,
            },
        };
        ChainSpec {
            nodes: vec![NodeSpec { coherence_time: self.coherence_time }; 3],
            links: vec![
                link(x, self.attenuation_db_km[0]),
                link(self.total_length - x, self.attenuation_db_km[1]),
            ],
            speed_of_light: self.speed_of_light,
            end_node_storage: self.end_node_storage,
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralDiff {
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub position_km: f64,
    pub skr: f64,
    pub skr_std_error: f64,
    pub derivative: f64,
    pub derivative_std_error: f64,
    pub central: Vec<CentralDiff>,
}

/// Every evaluation draws its own streams, so the finite-difference errors are
/// those of independent estimates.
pub fn position_sweep(cfg: &SweepConfig, seed: u64) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (i, x) in cfg.positions().into_iter().enumerate() {
        let i = i as u64;
        let spec = cfg.chain(x);
        let mut dir = Direction::zero(&spec);
        dir.length = vec![1.0, -1.0];
        let g = chain_sim::sample_derivatives::<f64>(&spec, &cfg.protocol, &dir, cfg.derivative_samples, derive_seed(seed, 31, i))?
            .gradient()?;
        let est = if cfg.skr_samples == cfg.derivative_samples {
            g.estimate.clone()
        } else {
            chain_sim::estimate_skr(&spec, &cfg.protocol, cfg.skr_samples, derive_seed(seed, 30, i))?
        };
        let mut central = Vec::new();
        for (k, &eps) in cfg.epsilons.iter().enumerate() {
            let mut side = 0u64;
            let fd = finite_difference(
                |y| {
                    side += 1;
                    let tag = 40 + 2 * k as u64 + side;
                    let e = chain_sim::estimate_skr(&cfg.chain(y), &cfg.protocol, cfg.fd_samples, derive_seed(seed, tag, i))?;
                    Ok((e.skr, e.skr_std_error))
                },
                x,
                eps,
                Scheme::Central,
            )?;
            central.push(CentralDiff {
                epsilon: eps,
                estimate: fd.estimate,
                std_error: fd.std_error,
            });
        }
        rows.push(SweepRow {
            position_km: x,
            skr: est.skr,
            skr_std_error: est.skr_std_error,
            derivative: g.gradient,
            derivative_std_error: g.std_error,
            central,
        });
    }
    Ok(rows)
}

/// Position of the largest estimated rate.
pub fn argmax(rows: &[SweepRow]) -> Option<f64> {
    rows.iter().max_by(|a, b| a.skr.total_cmp(&b.skr)).map(|r| r.position_km)
}

/// Linear interpolation at the first `+` to `-` sign change of `values`.
pub fn zero_crossing(positions: &[f64], values: &[f64]) -> Option<f64> {
    (1..values.len()).find(|&k| values[k - 1] > 0.0 && values[k] <= 0.0).map(|k| {
        let (x0, x1, y0, y1) = (positions[k - 1], positions[k], values[k - 1], values[k]);
        x0 + (x1 - x0) * y0 / (y0 - y1)
    })
}

/// Width in km of the longest run of consecutive points with `|value| <= k · se`.
pub fn widest_zero_run(positions: &[f64], values: &[f64], errors: &[f64], k: f64) -> f64 {
    let mut best = 0.0f64;
    let mut start: Option<usize> = None;
    for i in 0..values.len() {
        if values[i].abs() <= k * errors[i] {
            let s = *start.get_or_insert(i);
            best = best.max(positions[i] - positions[s]);
        } else {
            start = None;
        }
    }
    best
}
