//! Two-phase optimization of per-link bright-state parameters.

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::linear_fit::{derivative_root_by_linear_fit, LinearFit};
use crate::chain_model::{ChainSpec, LinkModel};
use crate::chain_sim::{self, Direction, Parameter, Protocol, SkrEstimate};
use crate::error::{Error, Result};
use crate::stochad::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrightStateConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub grid_samples: usize,
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub learning_rate: f64,
    pub alpha_min: f64,
    pub final_samples: usize,
    /// Weight the phase-one fit by inverse derivative variances.
    pub weighted_fit: bool,
}

impl Default for BrightStateConfig {
    fn default() -> Self {
        BrightStateConfig {
            grid_min: 0.005,
            grid_max: 0.15,
            grid_points: 30,
            grid_samples: 10_000,
            iterations: 100,
            samples_per_iteration: 10_000,
            learning_rate: 1e-3,
            alpha_min: 1e-4,
            final_samples: 1_000_000,
            weighted_fit: false,
        }
    }
}

impl BrightStateConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grid_points >= 2
            && self.grid_min > 0.0
            && self.grid_max < 1.0
            && self.grid_min < self.grid_max
            && self.grid_samples >= 2
            && self.samples_per_iteration >= 2
            && self.final_samples >= 2
            && self.learning_rate > 0.0
            && self.alpha_min > 0.0
            && self.alpha_min < 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid bright-state optimization settings: {self:?}")))
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n)
            .map(|i| self.grid_min + (self.grid_max - self.grid_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseOne {
    pub alpha: Vec<f64>,
    pub derivative: Vec<f64>,
    pub derivative_std_error: Vec<f64>,
    pub skr: Vec<f64>,
    pub skr_std_error: Vec<f64>,
    pub fit: Option<LinearFit>,
    /// Starting point handed to phase two.
    pub start: f64,
    /// The fit was unusable and the grid point of highest rate was taken.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub alpha: Vec<f64>,
    pub skr: f64,
    pub skr_std_error: f64,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightStateResult {
    pub alpha: Vec<f64>,
    pub phase_one: PhaseOne,
    pub trace: Vec<TraceRow>,
    pub estimate: SkrEstimate,
}

fn with_alphas(template: &ChainSpec, alpha: &[f64]) -> ChainSpec {
    let mut spec = template.clone();
    for (l, &a) in spec.links.iter_mut().zip(alpha) {
        l.model = l.model.with_knob(a);
    }
    spec
}

/// Phase one: one shared α on a grid, root of the fitted derivative line.
pub fn uniform_phase(template: &ChainSpec, protocol: &Protocol, cfg: &BrightStateConfig, seed: u64) -> Result<PhaseOne> {
    let n = template.links.len();
    let grid = cfg.grid();
    let mut out = PhaseOne {
        alpha: grid.clone(),
        derivative: Vec::new(),
        derivative_std_error: Vec::new(),
        skr: Vec::new(),
        skr_std_error: Vec::new(),
        fit: None,
        start: f64::NAN,
        fallback: false,
    };
    for &a in &grid {
        let spec = with_alphas(template, &vec![a; n]);
        let g = chain_sim::skr_gradient(&spec, protocol, &Parameter::UniformKnob, cfg.grid_samples, seed)?;
        out.derivative.push(g.gradient);
        out.derivative_std_error.push(g.std_error);
        out.skr.push(g.estimate.skr);
        out.skr_std_error.push(g.estimate.skr_std_error);
    }
    let weights: Option<Vec<f64>> = cfg.weighted_fit.then(|| {
        out.derivative_std_error
            .iter()
            .map(|s| if *s > 0.0 { 1.0 / (s * s) } else { 1.0 })
            .collect()
    });
    let fitted = derivative_root_by_linear_fit(&grid, &out.derivative, weights.as_deref());
    match fitted {
        Ok((root, fit)) if root > 0.0 && root < 1.0 => {
            out.fit = Some(fit);
            out.start = root;
        }
        other => {
            out.fit = other.ok().map(|(_, f)| f);
            out.fallback = true;
            let best = (0..grid.len())
                .max_by(|&i, &j| out.skr[i].total_cmp(&out.skr[j]))
                .expect("grid is not empty");
            out.start = grid[best];
        }
    }
    Ok(out)
}

/// Returns per-link bright-state parameters maximizing the key rate.
///
/// Phase one picks a common starting value from the grid; phase two runs Adam
/// on the full vector with fresh sample streams per iteration. The returned
/// estimate comes from an independent run with `final_samples` samples.
pub fn optimize_bright_states(
    template: &ChainSpec,
    protocol: &Protocol,
    cfg: &BrightStateConfig,
    seed: u64,
) -> Result<BrightStateResult> {
    cfg.validate()?;
    protocol.validate()?;
    if !template.links.iter().all(|l| matches!(l.model, LinkModel::SingleClick { .. })) {
        return Err(Error::Config("bright-state optimization needs single-click links".into()));
    }
    template.validate()?;
    let n = template.links.len();
    let phase_one = uniform_phase(template, protocol, cfg, derive_seed(seed, 1, 0))?;

    let lo = cfg.alpha_min;
    let hi = 1.0 - cfg.alpha_min;
    let mut alpha = vec![phase_one.start.clamp(lo, hi); n];
    let mut adam = AdamState::new(n, cfg.learning_rate);
    let dirs: Vec<Direction> = (0..n)
        .map(|link| Parameter::Knob { link }.direction(template))
        .collect::<Result<_>>()?;
    let mut trace = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let spec = with_alphas(template, &alpha);
        let grads = chain_sim::skr_gradients(&spec, protocol, &dirs, cfg.samples_per_iteration, derive_seed(seed, 2, it as u64))?;
        let g: Vec<f64> = grads.iter().map(|g| -g.gradient).collect();
        trace.push(TraceRow {
            iteration: it,
            alpha: alpha.clone(),
            skr: grads[0].estimate.skr,
            skr_std_error: grads[0].estimate.skr_std_error,
            gradient_norm: g.iter().map(|x| x * x).sum::<f64>().sqrt(),
        });
        adam.update(&mut alpha, &g)?;
        alpha.iter_mut().for_each(|a| *a = a.clamp(lo, hi));
    }
    let estimate = chain_sim::estimate_skr(&with_alphas(template, &alpha), protocol, cfg.final_samples, derive_seed(seed, 3, 0))?;
    Ok(BrightStateResult {
        alpha,
        phase_one,
        trace,
        estimate,
    })
}
