//! Time per sample of plain and differentiated simulations against chain length.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use repeater_ad::chain_model::{ChainSpec, LinkModel, LinkSpec};
use repeater_ad::chain_sim::{self, Parameter, Protocol};
use repeater_ad::stats::spearman;
use repeater_ad::stochad::derive_seed;

use crate::config::BenchmarkConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Primal,
    Derivative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n_links: usize,
    pub protocol: String,
    pub mode: Mode,
    pub seconds_per_sample: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub protocol: String,
    pub n_links: Vec<usize>,
    /// Derivative over primal time per sample.
    pub ratio: Vec<f64>,
    pub spearman: f64,
}

pub fn protocol_name(p: &Protocol) -> &'static str {
    match p {
        Protocol::Single => "single",
        Protocol::Multi(_) => "multi",
    }
}

fn chain(cfg: &BenchmarkConfig, n: usize, alpha: f64) -> ChainSpec {
    let link = LinkSpec {
        length: cfg.link_length,
        model: LinkModel::SingleClick {
            alpha,
            attenuation_db_km: cfg.attenuation_db_km,
        },
    };
    ChainSpec::homogeneous(n, link, cfg.coherence_time)
}

/// Both modes see the same bright-state values and streams; each value's
/// samples form one timed estimate (rate, or rate and derivative).
pub fn run_benchmark(cfg: &BenchmarkConfig, seed: u64) -> Result<(Vec<BenchmarkRow>, Vec<RatioSummary>), CliError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for protocol in &cfg.protocols {
        protocol.validate().map_err(crate::invalid)?;
        let name = protocol_name(protocol).to_string();
        let mut sizes = Vec::new();
        let mut ratios = Vec::new();
        for n in cfg.min_links..=cfg.max_links {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 50, n as u64));
            let alphas: Vec<f64> = (0..cfg.values).map(|_| rng.gen_range(cfg.alpha_min..=cfg.alpha_max)).collect();
            let mut primal = 0.0;
            let mut deriv = 0.0;
            for (k, &a) in alphas.iter().enumerate() {
                let spec = chain(cfg, n, a);
                let s = derive_seed(seed, 51, k as u64);
                let t = Instant::now();
                std::hint::black_box(chain_sim::sample_values::<f64>(&spec, protocol, cfg.samples, s)?.skr()?);
                primal += t.elapsed().as_secs_f64();
                let t = Instant::now();
                std::hint::black_box(chain_sim::skr_gradient(&spec, protocol, &Parameter::UniformKnob, cfg.samples, s)?);
                deriv += t.elapsed().as_secs_f64();
            }
            let per = (cfg.values * cfg.samples) as f64;
            rows.push(BenchmarkRow {
                n_links: n,
                protocol: name.clone(),
                mode: Mode::Primal,
                seconds_per_sample: primal / per,
            });
            rows.push(BenchmarkRow {
                n_links: n,
                protocol: name.clone(),
                mode: Mode::Derivative,
                seconds_per_sample: deriv / per,
            });
            sizes.push(n);
            ratios.push(deriv / primal);
        }
        let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        summaries.push(RatioSummary {
            protocol: name,
            spearman: if xs.len() >= 2 { spearman(&xs, &ratios) } else { f64::NAN },
            n_links: sizes,
            ratio: ratios,
        });
    }
    Ok((rows, summaries))
}
