//! Key rate of a single path through the plane.

use serde::{Deserialize, Serialize};

use super::coords::Coordinates;
use crate::chain_model::{ChainSpec, LinkModel, LinkSpec, NodeSpec, DEFAULT_SPEED_OF_LIGHT};
use crate::chain_sim::{self, Direction, Protocol, SkrGradient};
use crate::error::{Error, Result};
use crate::optimize::anneal::{annealed_utility, annealed_utility_gradient};

/// Repeaters closer than this to the previous node of a path are merged into it.
pub const MERGE_DISTANCE_KM: f64 = 1e-6;

/// Hardware shared by every node and link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hardware {
    pub fidelity: f64,
    pub attenuation_db_km: f64,
    #[serde(with = "crate::chain_model::maybe_inf")]
    pub coherence_time: f64,
    pub speed_of_light: f64,
    pub end_node_storage: bool,
    pub protocol: Protocol,
}

impl Default for Hardware {
    fn default() -> Self {
        Hardware {
            fidelity: 0.99,
            attenuation_db_km: 0.2,
            coherence_time: 10.0,
            speed_of_light: DEFAULT_SPEED_OF_LIGHT,
            end_node_storage: true,
            protocol: Protocol::multi(),
        }
    }
}

/// A path's chain after merging coincident nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PathChain {
    pub spec: ChainSpec,
    /// Path nodes kept as chain nodes, in order.
    pub kept: Vec<usize>,
    /// Path nodes folded into a neighbour.
    pub merged: Vec<usize>,
}

pub fn chain_for_path(coords: &Coordinates, path: &[usize], hw: &Hardware) -> Result<PathChain> {
    if path.len() < 2 {
        return Err(Error::domain("a path needs at least two nodes"));
    }
    let mut kept = vec![path[0]];
    let mut merged = Vec::new();
    for (k, &v) in path.iter().enumerate().skip(1) {
        let last = *kept.last().expect("non-empty");
        let is_last = k + 1 == path.len();
        if !is_last && coords.dist(last, v) < MERGE_DISTANCE_KM {
            merged.push(v);
            continue;
        }
        if is_last && kept.len() > 1 && coords.dist(last, v) < MERGE_DISTANCE_KM {
            // the end node stays; the repeater before it folds into it
            merged.push(kept.pop().expect("non-empty"));
        }
        kept.push(v);
    }
    let links = kept
        .windows(2)
        .map(|w| LinkSpec {
            length: coords.dist(w[0], w[1]),
            model: LinkModel::FixedWerner {
                fidelity: hw.fidelity,
                attenuation_db_km: hw.attenuation_db_km,
            },
        })
        .collect::<Vec<_>>();
    let spec = ChainSpec {
        nodes: vec![NodeSpec { coherence_time: hw.coherence_time }; kept.len()],
        links,
        speed_of_light: hw.speed_of_light,
        end_node_storage: hw.end_node_storage,
    };
    Ok(PathChain { spec, kept, merged })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub path: Vec<usize>,
    pub skr: f64,
    pub skr_std_error: f64,
    pub mean_t_ent: f64,
    pub annealed_utility: f64,
    /// A link was too long to simulate; the utility is reported as 0.
    pub underflow: bool,
}

impl PathResult {
    fn zero(path: &[usize]) -> Self {
        PathResult {
            path: path.to_vec(),
            skr: 0.0,
            skr_std_error: 0.0,
            mean_t_ent: f64::INFINITY,
            annealed_utility: 0.0,
            underflow: true,
        }
    }
}

fn is_underflow(e: &Error) -> bool {
    match e {
        Error::InvalidChain(msg) => msg.contains("underflow"),
        Error::Domain(msg) => msg.contains("underflow"),
        _ => false,
    }
}

/// Rate of `path` as an end-to-end chain, with the annealing bonus at temperature `t`.
pub fn path_utility(
    coords: &Coordinates,
    path: &[usize],
    hw: &Hardware,
    n_samples: usize,
    t: f64,
    seed: u64,
) -> Result<PathResult> {
    let chain = chain_for_path(coords, path, hw)?;
    let est = match chain_sim::sample_values::<f64>(&chain.spec, &hw.protocol, n_samples.max(2), seed) {
        Ok(s) => s.skr()?,
        Err(e) if is_underflow(&e) => return Ok(PathResult::zero(path)),
        Err(e) => return Err(e),
    };
    Ok(PathResult {
        path: path.to_vec(),
        skr: est.skr,
        skr_std_error: est.skr_std_error,
        mean_t_ent: est.mean_t_ent,
        annealed_utility: annealed_utility(est.skr, est.mean_t_ent, t),
        underflow: false,
    })
}

/// Gradient of the annealed utility of `path` with respect to every repeater
/// coordinate, flattened as `[x0, y0, x1, y1, ...]`. Repeaters off the path get
/// exactly zero; so do repeaters merged into a neighbour, which are reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathGradient {
    pub gradient: Vec<f64>,
    pub std_error: Vec<f64>,
    pub degenerate: Vec<usize>,
    pub utility: f64,
}

pub fn path_gradient(
    coords: &Coordinates,
    path: &[usize],
    hw: &Hardware,
    n_samples: usize,
    t: f64,
    seed: u64,
) -> Result<PathGradient> {
    let n_end = coords.end_nodes.len();
    let dim = 2 * coords.repeaters.len();
    let mut out = PathGradient {
        gradient: vec![0.0; dim],
        std_error: vec![0.0; dim],
        degenerate: Vec::new(),
        utility: 0.0,
    };
    let chain = chain_for_path(coords, path, hw)?;
    out.degenerate = chain.merged.iter().filter(|&&v| v >= n_end).map(|&v| v - n_end).collect();
    let mut dirs = Vec::new();
    let mut slots = Vec::new();
    for (k, &v) in chain.kept.iter().enumerate() {
        if v < n_end {
            continue;
        }
        let p = coords.point(v);
        let prev = coords.point(chain.kept[k - 1]);
        let next = coords.point(chain.kept[k + 1]);
        let (l0, l1) = (p.dist(&prev), p.dist(&next));
        for axis in 0..2 {
            let (dp, dn) = if axis == 0 { (p.x - prev.x, p.x - next.x) } else { (p.y - prev.y, p.y - next.y) };
            let mut d = Direction::zero(&chain.spec);
            d.length[k - 1] = dp / l0;
            d.length[k] = dn / l1;
            dirs.push(d);
            slots.push(2 * (v - n_end) + axis);
        }
    }
    if dirs.is_empty() {
        let est = chain_sim::estimate_skr(&chain.spec, &hw.protocol, n_samples.max(2), seed);
        match est {
            Ok(e) => out.utility = annealed_utility(e.skr, e.mean_t_ent, t),
            Err(e) if is_underflow(&e) => {}
            Err(e) => return Err(e),
        }
        return Ok(out);
    }
    let grads: Vec<SkrGradient> = match chain_sim::skr_gradients(&chain.spec, &hw.protocol, &dirs, n_samples.max(2), seed) {
        Ok(g) => g,
        Err(e) if is_underflow(&e) => return Ok(out),
        Err(e) => return Err(e),
    };
    for (g, &slot) in grads.iter().zip(&slots) {
        let e = &g.estimate;
        out.gradient[slot] = annealed_utility_gradient(g.gradient, e.mean_t_ent, g.d_mean_t_ent, t);
        out.std_error[slot] = g.std_error;
        out.utility = annealed_utility(e.skr, e.mean_t_ent, t);
    }
    Ok(out)
}
