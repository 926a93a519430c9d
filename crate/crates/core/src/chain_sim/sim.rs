//! Swap-ASAP sampling of delivery times and end-to-end Werner parameters.
//!
//! Both protocols reduce to a max-plus recurrence over link generations. Link
//! `i` of generation `k` starts at `B_i`, succeeds at `E_i = B_i + G_i Δt_i`,
//! repeater `j` swaps at `S_j = max(E_{j-1}, E_j)` and the pair is delivered at
//! `D = max_i E_i`. In the multi-shot protocol a link restarts as soon as both
//! of its memory slots are free again: end nodes release their slot at `D`, a
//! repeater releases both slots at its swap. Because no branch depends on event
//! order, perturbed attempt counts reach the outputs through `max` alone.

use serde::{Deserialize, Serialize};

use super::params::{ChainParams, LinkQuantities};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::stochad::ops::Abs;
use crate::stochad::{AdScalar, RandomSource};

/// Delivery time since the previous delivery and Werner parameter of one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSample<S> {
    pub t_ent: S,
    pub werner: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiShotConfig {
    /// Deliveries simulated per sample.
    pub deliveries: usize,
    /// Leading deliveries discarded from each sample.
    pub burn_in: usize,
}

impl Default for MultiShotConfig {
    fn default() -> Self {
        MultiShotConfig {
            deliveries: 16,
            burn_in: 4,
        }
    }
}

impl MultiShotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.deliveries == 0 || self.burn_in >= self.deliveries {
            return Err(Error::Config(format!(
                "need deliveries >= 1 and burn_in < deliveries, got {} and {}",
                self.deliveries, self.burn_in
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    /// Every node idles after its swap until the pair is delivered.
    Single,
    /// Links restart as soon as their memories are free.
    Multi(MultiShotConfig),
}

impl Protocol {
    pub fn multi() -> Self {
        Protocol::Multi(MultiShotConfig::default())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Protocol::Single => Ok(()),
            Protocol::Multi(cfg) => cfg.validate(),
        }
    }
}

/// Primal record of one simulated run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimEvent {
    LinkSuccess {
        link: usize,
        generation: usize,
        start: f64,
        attempts: u64,
        time: f64,
    },
    Swap {
        node: usize,
        generation: usize,
        time: f64,
    },
    Delivery {
        generation: usize,
        time: f64,
        werner: f64,
    },
}

fn zero<S: AdScalar>() -> S {
    S::constant(Real::of(0.0))
}

fn add<S: AdScalar>(term: S, acc: &mut Option<S>, rng: &mut RandomSource) -> Result<()> {
    *acc = Some(match acc.take() {
        Some(x) => x.plus(term, rng)?,
        None => term,
    });
    Ok(())
}

/// Simulates `generations` consecutive deliveries and returns their absolute
/// delivery times and Werner parameters.
fn run<S: AdScalar>(
    params: &ChainParams<S>,
    links: &[LinkQuantities<S>],
    generations: usize,
    rng: &mut RandomSource,
    mut log: Option<&mut Vec<SimEvent>>,
) -> Result<Vec<(S, S)>> {
    let n = links.len();
    // link-major so that link i sees the same draws whatever follows it
    let mut attempts: Vec<Vec<S>> = Vec::with_capacity(n);
    for q in links {
        let mut row = Vec::with_capacity(generations);
        for _ in 0..generations {
            row.push(S::geometric(q.success_prob, rng)?);
        }
        attempts.push(row);
    }

    let mut w0 = links[0].werner;
    for q in &links[1..] {
        w0 = w0.times(q.werner, rng)?;
    }
    let storage = |node: usize| {
        let t = params.coherence_time[node];
        (!t.value().as_f64().is_infinite()).then_some(t)
    };

    let mut begin: Vec<S> = vec![zero(); n];
    let mut success: Vec<S> = Vec::with_capacity(n);
    let mut swap: Vec<S> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(generations);
    for k in 0..generations {
        success.clear();
        for i in 0..n {
            let e = begin[i].plus(attempts[i][k].times(links[i].attempt_duration, rng)?, rng)?;
            if let Some(log) = log.as_deref_mut() {
                log.push(SimEvent::LinkSuccess {
                    link: i,
                    generation: k,
                    start: begin[i].value().as_f64(),
                    attempts: attempts[i][k].value().as_f64() as u64,
                    time: e.value().as_f64(),
                });
            }
            success.push(e);
        }
        // swap[j] is the swap time at repeater j; index 0 is unused
        swap.clear();
        swap.push(zero());
        let mut delivery = success[0];
        let mut exponent: Option<S> = None;
        for j in 1..n {
            let s = success[j - 1].maximum(success[j], rng)?;
            if let Some(log) = log.as_deref_mut() {
                log.push(SimEvent::Swap {
                    node: j,
                    generation: k,
                    time: s.value().as_f64(),
                });
            }
            swap.push(s);
            delivery = delivery.maximum(success[j], rng)?;
            if let Some(t) = storage(j) {
                let held = success[j - 1].minus(success[j], rng)?.map(&Abs)?;
                add(held.over(t, rng)?, &mut exponent, rng)?;
            }
        }
        if params.end_node_storage {
            for (node, link) in [(0, 0), (n, n - 1)] {
                if let Some(t) = storage(node) {
                    let held = delivery.minus(success[link], rng)?;
                    add(held.over(t, rng)?, &mut exponent, rng)?;
                }
            }
        }
        let werner = match exponent {
            Some(x) => w0.times(x.neg()?.exp()?, rng)?,
            None => w0,
        };
        if let Some(log) = log.as_deref_mut() {
            log.push(SimEvent::Delivery {
                generation: k,
                time: delivery.value().as_f64(),
                werner: werner.value().as_f64(),
            });
        }
        out.push((delivery, werner));

        if k + 1 < generations {
            for i in 0..n {
                // an end node frees its slot last, at delivery
                begin[i] = if i == 0 || i + 1 == n {
                    delivery
                } else {
                    swap[i].maximum(swap[i + 1], rng)?
                };
            }
        }
    }
    Ok(out)
}

/// One delivery with every link started at time zero.
pub fn simulate_single_shot<S: AdScalar>(params: &ChainParams<S>, rng: &mut RandomSource) -> Result<ChainSample<S>> {
    let links = params.link_quantities(rng)?;
    let (t, w) = run(params, &links, 1, rng, None)?[0];
    Ok(ChainSample { t_ent: t, werner: w })
}

/// Deliveries `burn_in + 1 ..= deliveries` of the multi-shot protocol started
/// from an idle chain at time zero.
pub fn simulate_multi_shot<S: AdScalar>(
    params: &ChainParams<S>,
    cfg: &MultiShotConfig,
    rng: &mut RandomSource,
) -> Result<Vec<ChainSample<S>>> {
    simulate_multi_shot_logged(params, cfg, rng, None)
}

pub fn simulate_multi_shot_logged<S: AdScalar>(
    params: &ChainParams<S>,
    cfg: &MultiShotConfig,
    rng: &mut RandomSource,
    log: Option<&mut Vec<SimEvent>>,
) -> Result<Vec<ChainSample<S>>> {
    cfg.validate()?;
    let links = params.link_quantities(rng)?;
    let times = run(params, &links, cfg.deliveries, rng, log)?;
    let mut out = Vec::with_capacity(cfg.deliveries - cfg.burn_in);
    let mut prev = zero::<S>();
    for (k, (d, w)) in times.into_iter().enumerate() {
        if k >= cfg.burn_in {
            out.push(ChainSample {
                t_ent: d.minus(prev, rng)?,
                werner: w,
            });
        }
        prev = d;
    }
    Ok(out)
}

/// One sample of the protocol's per-delivery time and Werner parameter.
///
/// For the multi-shot protocol these are window means over the retained
/// deliveries: the elapsed time divided by their number, and the average
/// Werner parameter. Perturbation weights are refreshed before returning.
pub fn sample_protocol<S: AdScalar>(
    params: &ChainParams<S>,
    protocol: &Protocol,
    rng: &mut RandomSource,
) -> Result<ChainSample<S>> {
    let s = match protocol {
        Protocol::Single => simulate_single_shot(params, rng)?,
        Protocol::Multi(cfg) => {
            cfg.validate()?;
            let links = params.link_quantities(rng)?;
            let times = run(params, &links, cfg.deliveries, rng, None)?;
            let kept = (cfg.deliveries - cfg.burn_in) as f64;
            let first = if cfg.burn_in == 0 {
                zero::<S>()
            } else {
                times[cfg.burn_in - 1].0
            };
            let elapsed = times[cfg.deliveries - 1].0.minus(first, rng)?;
            let mut wsum = times[cfg.burn_in].1;
            for &(_, w) in &times[cfg.burn_in + 1..] {
                wsum = wsum.plus(w, rng)?;
            }
            ChainSample {
                t_ent: elapsed.scale(Real::of(1.0 / kept))?,
                werner: wsum.scale(Real::of(1.0 / kept))?,
            }
        }
    };
    Ok(ChainSample {
        t_ent: s.t_ent.resolve(rng),
        werner: s.werner.resolve(rng),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::{ChainSpec, LinkModel, LinkSpec};
    use crate::Triple;

    fn direct(p: f64, w: f64, length: f64) -> LinkSpec {
        LinkSpec {
            length,
            model: LinkModel::Direct { success_prob: p, werner: w },
        }
    }

    fn params(spec: &ChainSpec) -> ChainParams<f64> {
        ChainParams::new(spec, None).unwrap()
    }

    #[test]
    fn noiseless_werner_is_product() {
        let mut spec = ChainSpec::homogeneous(2, direct(0.3, 0.9, 10.0), f64::INFINITY);
        spec.speed_of_light = 1.0;
        let p = params(&spec);
        for s in 0..200 {
            let mut rng = RandomSource::new(1, s);
            let x = simulate_single_shot(&p, &mut rng).unwrap();
            assert!((x.werner - 0.81).abs() < 1e-15);
            let xs = simulate_multi_shot(&p, &MultiShotConfig::default(), &mut rng).unwrap();
            assert!(xs.iter().all(|x| (x.werner - 0.81).abs() < 1e-15));
        }
    }

    #[test]
    fn single_shot_matches_hand_computation() {
        let mut spec = ChainSpec::homogeneous(3, direct(0.4, 1.0, 1.0), 5.0);
        spec.links[1].length = 2.0;
        spec.speed_of_light = 1.0;
        let p = params(&spec);
        let mut rng = RandomSource::new(2, 0);
        let x = simulate_single_shot(&p, &mut rng).unwrap();
        let mut rng = RandomSource::new(2, 0);
        let g: Vec<f64> = (0..3).map(|_| rng.geometric(0.4) as f64).collect();
        let e = [g[0], 2.0 * g[1], g[2]];
        let d = e.iter().cloned().fold(0.0, f64::max);
        assert_eq!(x.t_ent, d);
        let held = (e[0] - e[1]).abs() + (e[1] - e[2]).abs() + (d - e[0]) + (d - e[2]);
        assert!((x.werner - (-held / 5.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn audit_log_reproduces_deliveries() {
        let mut spec = ChainSpec::homogeneous(2, direct(0.3, 0.95, 1.0), 4.0);
        spec.links[1].length = 1.5;
        spec.speed_of_light = 1.0;
        let p = params(&spec);
        let cfg = MultiShotConfig { deliveries: 1, burn_in: 0 };
        for s in 0..50 {
            let mut log = Vec::new();
            let mut rng = RandomSource::new(3, s);
            let out = simulate_multi_shot_logged(&p, &cfg, &mut rng, Some(&mut log)).unwrap();
            let links: Vec<(u64, f64, f64)> = log
                .iter()
                .filter_map(|e| match *e {
                    SimEvent::LinkSuccess { attempts, time, start, .. } => Some((attempts, time, start)),
                    _ => None,
                })
                .collect();
            assert_eq!(links.len(), 2);
            for (i, &(g, t, b)) in links.iter().enumerate() {
                assert_eq!(b, 0.0);
                assert_eq!(t, g as f64 * spec.links[i].length);
            }
            let d = links[0].1.max(links[1].1);
            assert_eq!(out[0].t_ent, d);
            let w = 0.95 * 0.95 * (-((links[0].1 - links[1].1).abs() + 2.0 * d - links[0].1 - links[1].1) / 4.0).exp();
            assert!((out[0].werner - w).abs() < 1e-14);
        }
    }

    #[test]
    fn multi_shot_restart_rules() {
        let mut spec = ChainSpec::homogeneous(3, direct(0.5, 1.0, 1.0), f64::INFINITY);
        spec.speed_of_light = 1.0;
        let p = params(&spec);
        let cfg = MultiShotConfig { deliveries: 3, burn_in: 0 };
        let mut log = Vec::new();
        let mut rng = RandomSource::new(4, 0);
        simulate_multi_shot_logged(&p, &cfg, &mut rng, Some(&mut log)).unwrap();
        let succ = |link: usize, generation: usize| {
            log.iter()
                .find_map(|e| match *e {
                    SimEvent::LinkSuccess { link: l, generation: g, start, time, .. } if l == link && g == generation => Some((start, time)),
                    _ => None,
                })
                .unwrap()
        };
        for k in 1..3 {
            let prev: Vec<f64> = (0..3).map(|i| succ(i, k - 1).1).collect();
            let d = prev.iter().cloned().fold(0.0, f64::max);
            assert_eq!(succ(0, k).0, d);
            assert_eq!(succ(2, k).0, d);
            assert_eq!(succ(1, k).0, prev.iter().cloned().fold(0.0, f64::max));
        }
    }

    #[test]
    fn triple_run_matches_primal_values() {
        let link = LinkSpec {
            length: 65.0,
            model: LinkModel::SingleClick { alpha: 0.05, attenuation_db_km: 0.2 },
        };
        let spec = ChainSpec::homogeneous(4, link, 10.0);
        let dir = super::super::Parameter::UniformKnob.direction(&spec).unwrap();
        let pf = params(&spec);
        let pt = ChainParams::<Triple>::new(&spec, Some(&dir)).unwrap();
        for proto in [Protocol::Single, Protocol::multi()] {
            for s in 0..50 {
                let a = sample_protocol(&pf, &proto, &mut RandomSource::new(5, s)).unwrap();
                let b = sample_protocol(&pt, &proto, &mut RandomSource::new(5, s)).unwrap();
                assert_eq!(a.t_ent.to_bits(), b.t_ent.value().to_bits());
                assert_eq!(a.werner.to_bits(), b.werner.value().to_bits());
            }
        }
    }

    #[test]
    fn window_means() {
        let mut spec = ChainSpec::homogeneous(2, direct(0.5, 0.9, 1.0), 3.0);
        spec.speed_of_light = 1.0;
        let p = params(&spec);
        let cfg = MultiShotConfig { deliveries: 6, burn_in: 2 };
        let xs = simulate_multi_shot(&p, &cfg, &mut RandomSource::new(6, 0)).unwrap();
        let m = sample_protocol(&p, &Protocol::Multi(cfg), &mut RandomSource::new(6, 0)).unwrap();
        let t = xs.iter().map(|x| x.t_ent).sum::<f64>() / 4.0;
        let w = xs.iter().map(|x| x.werner).sum::<f64>() / 4.0;
        assert!((m.t_ent - t).abs() < 1e-12);
        assert!((m.werner - w).abs() < 1e-12);
    }
}
