//! Annealed gradient-ascent placement of free repeaters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coords::{Coordinates, Point};
use super::network::{network_utility, NetworkUtility, SearchSettings};
use super::path::{path_gradient, path_utility, Hardware, PathGradient};
use crate::error::{Error, Result};
use crate::optimize::adam::AdamState;
use crate::optimize::anneal::{samples_at, AnnealSchedule};
use crate::stochad::derive_seed;

/// Initial temperatures per unit of `D / 300 km`; restarts cycle through them.
pub const T0_CYCLE: [f64; 3] = [5.0, 10.0, 15.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub hardware: Hardware,
    /// Fixed initial temperature; when absent it follows [`T0_CYCLE`] scaled by `D`.
    pub t0: Option<f64>,
    pub decay: f64,
    pub epochs: usize,
    pub iters_per_epoch: usize,
    pub restarts: usize,
    /// Only use links no longer than the smallest end-node distance.
    pub edge_cap: bool,
    /// Samples per path during the final path search.
    pub search_samples: usize,
    /// Samples per chosen path in the final evaluation.
    pub final_samples: usize,
    pub seed: u64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        let s = AnnealSchedule::new(1.0);
        PlacementConfig {
            hardware: Hardware::default(),
            t0: None,
            decay: s.decay,
            epochs: s.epochs,
            iters_per_epoch: s.iters_per_epoch,
            restarts: 3,
            edge_cap: false,
            search_samples: 1000,
            final_samples: 100_000,
            seed: 0,
        }
    }
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.search_samples < 2 || self.final_samples < 2 {
            return Err(Error::Config("final sample counts must be at least 2".into()));
        }
        if let Some(t0) = self.t0 {
            self.schedule(t0).validate()?;
        } else {
            self.schedule(1.0).validate()?;
        }
        Ok(())
    }

    pub fn schedule(&self, t0: f64) -> AnnealSchedule {
        AnnealSchedule {
            t0,
            decay: self.decay,
            epochs: self.epochs,
            iters_per_epoch: self.iters_per_epoch,
        }
    }

    pub fn t0_for(&self, restart: usize, scale_km: f64) -> f64 {
        self.t0.unwrap_or(T0_CYCLE[restart % T0_CYCLE.len()] * scale_km / 300.0)
    }
}

fn cap(coords: &Coordinates, on: bool) -> Option<f64> {
    on.then(|| coords.min_end_distance())
}

/// Gradient of the network utility: AD through the worst pair's best path.
pub fn utility_gradient(
    coords: &Coordinates,
    hw: &Hardware,
    settings: &SearchSettings,
    warm: Option<&mut Vec<Vec<usize>>>,
) -> Result<(NetworkUtility, PathGradient)> {
    let nu = network_utility(coords, hw, settings, warm)?;
    let worst = &nu.worst_pair().result;
    let g = if worst.infeasible {
        PathGradient {
            gradient: vec![0.0; 2 * coords.repeaters.len()],
            std_error: vec![0.0; 2 * coords.repeaters.len()],
            degenerate: Vec::new(),
            utility: 0.0,
        }
    } else {
        path_gradient(coords, &worst.best.path, hw, settings.n_samples, settings.temperature, settings.seed)?
    };
    Ok((nu, g))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub pair: (usize, usize),
    pub path: Vec<usize>,
    pub skr: f64,
    pub skr_std_error: f64,
}

/// Minimum key rate over pairs, with paths from a search and rates re-measured on them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalEvaluation {
    pub skr_min: f64,
    pub skr_min_std_error: f64,
    pub worst_pair: (usize, usize),
    pub pairs: Vec<PairOutcome>,
}

pub fn final_evaluation(coords: &Coordinates, cfg: &PlacementConfig, seed: u64) -> Result<FinalEvaluation> {
    let hw = &cfg.hardware;
    let settings = SearchSettings {
        n_samples: cfg.search_samples,
        temperature: 0.0,
        edge_cap: cap(coords, cfg.edge_cap),
        seed,
    };
    let nu = network_utility(coords, hw, &settings, None)?;
    let mut pairs = Vec::with_capacity(nu.pairs.len());
    for pr in &nu.pairs {
        let path = pr.result.best.path.clone();
        let (skr, se) = if pr.result.infeasible {
            (0.0, 0.0)
        } else {
            let r = path_utility(coords, &path, hw, cfg.final_samples, 0.0, seed)?;
            (r.skr, r.skr_std_error)
        };
        pairs.push(PairOutcome {
            pair: pr.pair,
            path,
            skr,
            skr_std_error: se,
        });
    }
    let worst = (0..pairs.len())
        .min_by(|&a, &b| pairs[a].skr.total_cmp(&pairs[b].skr))
        .expect("at least one pair");
    Ok(FinalEvaluation {
        skr_min: pairs[worst].skr,
        skr_min_std_error: pairs[worst].skr_std_error,
        worst_pair: pairs[worst].pair,
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub temperature: f64,
    /// Annealed network utility at the epoch's last iteration.
    pub utility: f64,
    pub skr_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub t0: f64,
    pub seed: u64,
    pub initial: Vec<Point>,
    pub repeaters: Vec<Point>,
    pub trace: Vec<EpochRow>,
    pub result: FinalEvaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub best: usize,
    pub coordinates: Coordinates,
    pub skr_min: f64,
    pub skr_min_std_error: f64,
    pub restarts: Vec<RestartRecord>,
}

fn run_restart(end_nodes: &[Point], n: usize, cfg: &PlacementConfig, restart: usize) -> Result<RestartRecord> {
    let seed = derive_seed(cfg.seed, 20, restart as u64);
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = Coordinates::new(end_nodes.to_vec(), Vec::new())?;
    let (x0, y0, x1, y1) = probe.bounding_box();
    let initial: Vec<Point> = (0..n)
        .map(|_| Point::new(x0 + (x1 - x0) * init_rng.gen::<f64>(), y0 + (y1 - y0) * init_rng.gen::<f64>()))
        .collect();
    let mut coords = Coordinates::new(end_nodes.to_vec(), initial.clone())?;
    let t0 = cfg.t0_for(restart, probe.min_end_distance());
    let schedule = cfg.schedule(t0);
    schedule.validate()?;
    let edge_cap = cap(&coords, cfg.edge_cap);

    let mut trace = Vec::new();
    if n > 0 {
        let mut adam = AdamState::new(2 * n, t0);
        let mut x = coords.repeater_vector();
        let mut warm: Vec<Vec<usize>> = Vec::new();
        let mut it = 0u64;
        for (e, t) in schedule.temperatures().enumerate() {
            let mut last = None;
            for _ in 0..schedule.iters_per_epoch {
                let settings = SearchSettings {
                    n_samples: samples_at(t),
                    temperature: t,
                    edge_cap,
                    seed: derive_seed(seed, 1, it),
                };
                it += 1;
                let (nu, g) = utility_gradient(&coords, &cfg.hardware, &settings, Some(&mut warm))?;
                let ascent: Vec<f64> = g.gradient.iter().map(|v| -v).collect();
                adam.learning_rate = t;
                adam.update(&mut x, &ascent)?;
                coords.set_repeater_vector(&x);
                last = Some(nu);
            }
            if let Some(nu) = last {
                trace.push(EpochRow {
                    epoch: e + 1,
                    temperature: t,
                    utility: nu.utility,
                    skr_min: nu.skr_min,
                });
            }
        }
    }
    let result = final_evaluation(&coords, cfg, derive_seed(cfg.seed, 3, 0))?;
    Ok(RestartRecord {
        restart,
        t0,
        seed,
        initial,
        repeaters: coords.repeaters.clone(),
        trace,
        result,
    })
}

/// Places `n` repeaters among fixed end nodes, maximizing the worst pair's key rate.
///
/// Restarts run in parallel and are returned in order; the best is the one with
/// the highest final `skr_min`, earliest on ties. All restarts share one final
/// evaluation seed so their rates are compared on common random numbers.
pub fn place_repeaters(end_nodes: &[Point], n: usize, cfg: &PlacementConfig) -> Result<PlacementResult> {
    cfg.validate()?;
    Coordinates::new(end_nodes.to_vec(), Vec::new())?;
    let restarts = if n == 0 { 1 } else { cfg.restarts };
    let records = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(end_nodes, n, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, r) in records.iter().enumerate() {
        if r.result.skr_min > records[best].result.skr_min {
            best = k;
        }
    }
    let b = &records[best];
    Ok(PlacementResult {
        best,
        coordinates: Coordinates::new(end_nodes.to_vec(), b.repeaters.clone())?,
        skr_min: b.result.skr_min,
        skr_min_std_error: b.result.skr_min_std_error,
        restarts: records,
    })
}
