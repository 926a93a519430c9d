//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p repeater-ad-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use repeater_ad::chain_model::{ChainSpec, LinkModel, LinkSpec};
use repeater_ad::chain_sim::skr::secret_fraction;
use repeater_ad::chain_sim::{estimate_skr, skr_gradient, Parameter, Protocol};
use repeater_ad::optimize::fd_sweep::{argmax, widest_zero_run, zero_crossing};
use repeater_ad::optimize::{optimize_bright_states, position_sweep, BrightStateConfig, SweepConfig};
use repeater_ad::placement::scaling::logistic;
use repeater_ad::placement::*;
use repeater_ad::stochad::ops::{Add, Div, Exp, Ln, Mul, Offset, Recip, Scale, Sqrt, Square, Sub};
use repeater_ad::stochad::*;
use repeater_ad::Triple;
use repeater_ad_cli::benchmark::run_benchmark;
use repeater_ad_cli::config::BenchmarkConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, target: f64, se: f64) -> bool {
    (x - target).abs() <= 4.0 * se
}

fn c1_unbiasedness() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, p) in [0.1, 0.2, 0.5].into_iter().enumerate() {
        let r = estimate(|p, rng| sample_geometric(&p, rng), p, 100_000, 100 + k as u64).unwrap();
        let good = within(r.derivative_mean, -1.0 / (p * p), r.derivative_std_error);
        ok &= good;
        parts.push(format!("geom({p}) {:.3}±{:.3} vs {:.3}", r.derivative_mean, r.derivative_std_error, -1.0 / (p * p)));
    }
    let r = estimate(|p, rng| sample_bernoulli(&p, rng), 0.5, 100_000, 104).unwrap();
    ok &= within(r.derivative_mean, 1.0, r.derivative_std_error);
    parts.push(format!("bern(0.5) {:.4}±{:.4} vs 1", r.derivative_mean, r.derivative_std_error));
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    outcome(ok, format!("{}; {secs:.2} s", parts.join(", ")))
}

type Program = (fn(&Triple, &mut RandomSource) -> Triple, fn(f64) -> f64);

fn c2_smooth_exactness() -> Outcome {
    let programs: [Program; 4] = [
        (
            |x, r| {
                let e = x.map(&Square).unwrap().map(&Exp).unwrap();
                let d = x.map(&Sqrt).unwrap().map(&Offset(1.0)).unwrap();
                combine(&Div, &e, &d, r).unwrap()
            },
            |x| {
                let (e, s) = ((x * x).exp(), x.sqrt());
                (2.0 * x * e * (1.0 + s) - e / (2.0 * s)) / (1.0 + s).powi(2)
            },
        ),
        (
            |x, r| {
                let l = x.map(&Ln).unwrap();
                let lin = x.map(&Scale(3.0)).unwrap().map(&Offset(-1.0)).unwrap();
                combine(&Mul, &l, &lin, r).unwrap()
            },
            |x| (3.0 * x - 1.0) / x + 3.0 * x.ln(),
        ),
        (
            |x, r| {
                let a = x.map(&Recip).unwrap();
                let b = x.map(&Scale(-0.7)).unwrap().map(&Exp).unwrap();
                let s = combine(&Sub, &a, &b, r).unwrap();
                combine(&Mul, &s, &s, r).unwrap()
            },
            |x| {
                let s = 1.0 / x - (-0.7 * x).exp();
                2.0 * s * (-1.0 / (x * x) + 0.7 * (-0.7 * x).exp())
            },
        ),
        (
            |x, r| {
                let sq = x.map(&Square).unwrap();
                let inner = combine(&Add, &sq, x, r).unwrap().map(&Sqrt).unwrap();
                combine(&Mul, &inner, x, r).unwrap().map(&Ln).unwrap()
            },
            |x| {
                let u = (x * x + x).sqrt();
                let du = (2.0 * x + 1.0) / (2.0 * u);
                (du * x + u) / (u * x)
            },
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (f, df) in programs {
        for _ in 0..2500 {
            let x: f64 = rng.gen_range(0.05..3.0);
            let mut src = RandomSource::new(0, 0);
            let y = f(&make_input(x).unwrap(), &mut src);
            let want = df(x);
            let rel = (derivative_estimate(&y) - want).abs() / want.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(if want.abs() < 1e-300 { 0.0 } else { rel });
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{count} evaluations, worst relative error {worst:.2e}"))
}

fn brute_force_max_mean(p: f64, k: usize) -> f64 {
    let q = 1.0 - p;
    let cutoff = ((1e-13 / k as f64).ln() / q.ln()).ceil() as usize;
    let pmf: Vec<f64> = (1..=cutoff).map(|n| p * q.powi(n as i32 - 1)).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; k];
    loop {
        let mut prob = 1.0;
        let mut m = 0;
        for &i in &idx {
            prob *= pmf[i];
            m = m.max(i + 1);
        }
        total += prob * m as f64;
        let mut d = 0;
        loop {
            if d == k {
                return total;
            }
            idx[d] += 1;
            if idx[d] < cutoff {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn c3_oracles() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [0.3, 0.5] {
        for k in [2, 3] {
            let link = LinkSpec {
                length: 1.0,
                model: LinkModel::Direct { success_prob: p, werner: 1.0 },
            };
            let mut spec = ChainSpec::homogeneous(k, link, f64::INFINITY);
            spec.speed_of_light = 1.0;
            let e = estimate_skr(&spec, &Protocol::Single, 200_000, 30 + k as u64).unwrap();
            let oracle = brute_force_max_mean(p, k);
            let good = within(e.mean_t_ent, oracle, e.mean_t_ent_std_error);
            ok &= good;
            parts.push(format!("p={p},k={k}: {:.4}±{:.4} vs {oracle:.4}", e.mean_t_ent, e.mean_t_ent_std_error));
        }
    }
    let (alpha, length) = (0.05, 65.0);
    let eta = 10f64.powf(-0.2 * length / 10.0);
    let dt = length / 200_000.0;
    let w = 1.0 - 0.75 * alpha;
    let q = (1.0 - w) / 2.0;
    let d = 2.0 * eta / dt * secret_fraction(w) - 1.5 * alpha * eta / dt * ((1.0 - q) / q).log2();
    let link = LinkSpec {
        length,
        model: LinkModel::SingleClick {
            alpha,
            attenuation_db_km: 0.2,
        },
    };
    let spec = ChainSpec::homogeneous(1, link, 10.0);
    for proto in [Protocol::Single, Protocol::multi()] {
        let g = skr_gradient(&spec, &proto, &Parameter::Knob { link: 0 }, 100_000, 37).unwrap();
        ok &= within(g.gradient, d, g.std_error);
        parts.push(format!("dSKR/dα {:.3}±{:.3} vs {d:.3}", g.gradient, g.std_error));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    outcome(ok, format!("{}; {secs:.1} s", parts.join(", ")))
}

fn c4_bright_states() -> Outcome {
    let link = LinkSpec {
        length: 65.0,
        model: LinkModel::SingleClick {
            alpha: 0.03,
            attenuation_db_km: 0.2,
        },
    };
    let spec = ChainSpec::homogeneous(5, link, 10.0);
    let cfg = BrightStateConfig::default();
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (proto, target) in [(Protocol::Single, 2.95), (Protocol::multi(), 3.00)] {
        let r = optimize_bright_states(&spec, &proto, &cfg, 4).unwrap();
        let e = &r.estimate;
        ok &= e.skr >= target;
        let name = if proto == Protocol::Single { "single" } else { "multi" };
        parts.push(format!(
            "{name}: {:.4}±{:.4} Hz (need >= {target}; alpha {:?})",
            e.skr,
            e.skr_std_error,
            r.alpha.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>()
        ));
    }
    outcome(ok, format!("{}; {:.0} s", parts.join(", "), t.elapsed().as_secs_f64()))
}

fn c5_fig2() -> Outcome {
    let t = Instant::now();
    let cfg = SweepConfig {
        start: 66.0,
        stop: 80.0,
        step: 0.25,
        epsilons: vec![2.0],
        ..SweepConfig::default()
    };
    let rows = position_sweep(&cfg, 5).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r.position_km).collect();
    let ad: Vec<f64> = rows.iter().map(|r| r.derivative).collect();
    let fd: Vec<f64> = rows.iter().map(|r| r.central[0].estimate).collect();
    let fd_se: Vec<f64> = rows.iter().map(|r| r.central[0].std_error).collect();
    let best = argmax(&rows).unwrap();
    let cross = zero_crossing(&xs, &ad);
    let width = widest_zero_run(&xs, &fd, &fd_se, 4.0);
    let secs = t.elapsed().as_secs_f64();
    let coincide = cross.is_some_and(|c| (c - best).abs() <= 1.0);
    let ok = coincide && width >= 2.0 && secs < 600.0;
    outcome(
        ok,
        format!(
            "SKR argmax {best:.2} km, AD zero {} km ({}); eps=2 km central difference zero within 4 SE over {width:.2} km (need >= 2); {secs:.0} s",
            cross.map_or("none".into(), |c| format!("{c:.2}")),
            if coincide { "within 1 km" } else { "NOT within 1 km" }
        ),
    )
}

fn c6_pathfinder() -> Outcome {
    let t = Instant::now();
    let hw = Hardware::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut agree = 0;
    for trial in 0..100u64 {
        let ne = rng.gen_range(2..=3);
        let nr = rng.gen_range(0..=6 - ne);
        let mut pt = || Point::new(rng.gen::<f64>() * 150.0, rng.gen::<f64>() * 150.0);
        let ends: Vec<Point> = (0..ne).map(|_| pt()).collect();
        let reps: Vec<Point> = (0..nr).map(|_| pt()).collect();
        let c = Coordinates::new(ends, reps).unwrap();
        let cfg = SearchSettings {
            n_samples: 30,
            temperature: 0.0,
            edge_cap: None,
            seed: trial,
        };
        let found = best_path(&c, 0, 1, &hw, None, &cfg).unwrap();
        let mut best: Option<PathResult> = None;
        for p in all_paths(&c, 0, 1, None) {
            let u = path_utility(&c, &p, &hw, cfg.n_samples, 0.0, cfg.seed).unwrap();
            if best.as_ref().is_none_or(|b| u.annealed_utility > b.annealed_utility) {
                best = Some(u);
            }
        }
        let oracle = match best {
            Some(b) if b.annealed_utility > 0.0 => b.path,
            _ => vec![0, 1],
        };
        agree += (oracle == found.best.path) as usize;
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(agree == 100 && secs < 60.0, format!("{agree}/100 agree with enumeration; {secs:.1} s"))
}

fn c7_placement() -> Outcome {
    let t = Instant::now();
    let small = PlacementConfig {
        epochs: 10,
        iters_per_epoch: 10,
        restarts: 8,
        seed: 7,
        ..PlacementConfig::default()
    };
    let r = place_repeaters(&[Point::new(0.0, 0.0), Point::new(100.0, 0.0)], 1, &small).unwrap();
    let off = r.coordinates.repeaters[0].dist(&Point::new(50.0, 0.0));
    let mid_ok = off < 2.0;

    let sq = square(300.0);
    let cfg = PlacementConfig {
        restarts: 6,
        final_samples: 20_000,
        seed: 8,
        ..PlacementConfig::default()
    };
    let u0 = place_repeaters(&sq, 0, &cfg).unwrap();
    let u4 = place_repeaters(&sq, 4, &cfg).unwrap();
    let sq_ok = u4.skr_min > 1.03 * u0.skr_min;

    let c = [50.0, 0.4, 10.0, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<(usize, f64)> = (0..=40)
        .map(|n| (n, logistic(&c, n as f64) * (1.0 + 0.01 * 3f64.sqrt() * rng.gen_range(-1.0..1.0))))
        .collect();
    let fit = analyze_scaling(&pts, &[0.05]);
    let fit_ok = fit.as_ref().is_ok_and(|f| (0..5).all(|k| (f.c[k] - c[k]).abs() < 0.05 * c[k]));
    outcome(
        mid_ok && sq_ok && fit_ok,
        format!(
            "N=1 repeater {off:.2} km from midpoint; square 300 km: SKR_min(N=4) {:.3e} vs SKR_min(N=0) {:.3e}; logistic fit {}; {:.0} s",
            u4.skr_min,
            u0.skr_min,
            match &fit {
                Ok(f) => {
                    let rms = |c: &[f64; 5]| {
                        (pts.iter().map(|&(n, y)| (logistic(c, n as f64) - y).powi(2)).sum::<f64>() / pts.len() as f64).sqrt()
                    };
                    format!(
                        "{:?} vs true {c:?} (rms residual {:.4}, {:.4} at the true parameters)",
                        f.c.map(|x| (x * 1e3).round() / 1e3),
                        rms(&f.c),
                        rms(&c)
                    )
                }
                Err(e) => e.to_string(),
            },
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c8_benchmark() -> Outcome {
    let cfg = BenchmarkConfig {
        values: 60,
        samples: 1000,
        ..BenchmarkConfig::default()
    };
    let (_, summary) = run_benchmark(&cfg, 8).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in &summary {
        let lo = s.ratio.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.ratio.iter().cloned().fold(0.0, f64::max);
        ok &= lo >= 1.0 && hi < 10.0 && s.spearman > 0.0;
        parts.push(format!(
            "{}: ratio {:.2} (2 links) .. {:.2} (25 links), range [{lo:.2}, {hi:.2}], Spearman {:.2}",
            s.protocol,
            s.ratio[0],
            s.ratio[s.ratio.len() - 1],
            s.spearman
        ));
    }
    outcome(ok, parts.join("; "))
}

const CHAIN: &str = r#"{"chain": {
  "nodes": [{"coherence_time": 10}, {"coherence_time": 10}, {"coherence_time": 10}, {"coherence_time": 10}],
  "links": [
    {"length": 65, "model": "single_click", "alpha": 0.03, "attenuation_db_km": 0.2},
    {"length": 65, "model": "single_click", "alpha": 0.03, "attenuation_db_km": 0.2},
    {"length": 65, "model": "single_click", "alpha": 0.03, "attenuation_db_km": 0.2}]},
  "parameters": [{"kind": "uniform_knob"}],
  "optimize": {"grid_points": 5, "grid_samples": 500, "iterations": 5, "samples_per_iteration": 500, "final_samples": 2000},
  "fd_compare": {"start": 70, "stop": 74, "step": 1, "skr_samples": 500, "derivative_samples": 500, "fd_samples": 500},
  "placement": {"square": 150, "n_repeaters": [0, 1, 2, 3, 4, 5],
    "settings": {"epochs": 2, "iters_per_epoch": 3, "restarts": 2, "search_samples": 50, "final_samples": 300}}}"#;

fn record(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

fn c9_reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("c.json"), CHAIN).unwrap();
    let bin = env!("CARGO_BIN_EXE_repeater-ad");
    let mut failures = Vec::new();
    let cases: [(&str, &[&str]); 6] = [
        ("chain-sim", &["--samples", "5000"]),
        ("sensitivity", &["--samples", "5000"]),
        ("optimize", &[]),
        ("fd-compare", &[]),
        ("place", &[]),
        ("analyze", &["a_place"]),
    ];
    for (cmd, extra) in cases {
        let mut recs = Vec::new();
        for tag in ["a", "b"] {
            let out = format!("{tag}_{cmd}");
            let config = if tag == "a" { "c.json".to_string() } else { format!("a_{cmd}/config.json") };
            let mut args = vec![cmd, "--config", &config, "--seed", "4242", "--threads", "1", "--out", &out];
            if tag == "a" || cmd == "analyze" {
                args.extend_from_slice(extra);
            }
            let o = Command::new(bin).current_dir(d).args(&args).output().unwrap();
            if !o.status.success() {
                failures.push(format!("{cmd} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
                break;
            }
            recs.push(record(&d.join(&out)));
        }
        if recs.len() == 2 && recs[0]["estimates"] != recs[1]["estimates"] {
            failures.push(format!("{cmd} estimates differ"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "chain-sim, sensitivity, optimize, fd-compare, place, analyze: reruns from recorded config and seed are bitwise identical".into()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AD unbiasedness", c1_unbiasedness),
        ("smooth-program exactness", c2_smooth_exactness),
        ("oracle equivalence", c3_oracles),
        ("bright-state optimization, 5 x 65 km", c4_bright_states),
        ("AD vs central difference sweep", c5_fig2),
        ("pathfinder exactness", c6_pathfinder),
        ("placement sanity", c7_placement),
        ("benchmark shape", c8_benchmark),
        ("reproducibility", c9_reproducibility),
    ];
    let only: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let o = f();
        failed += (!o.pass) as usize;
        println!("criterion {n} ({name}): {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
