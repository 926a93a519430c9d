//! One function per subcommand; each returns the run record it wrote.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use repeater_ad::chain_model::ChainSpec;
use repeater_ad::chain_sim::{self, Protocol};
use repeater_ad::optimize::fd_sweep::{argmax, widest_zero_run, zero_crossing};
use repeater_ad::optimize::{optimize_bright_states, position_sweep};
use repeater_ad::placement::{analyze_scaling, place_repeaters, ScalingFit};
use repeater_ad::stochad::derive_seed;

use crate::benchmark::run_benchmark;
use crate::config::{self, Config};
use crate::output::{num, write_json, Table};
use crate::{invalid, Cli, CliError, Command, ProtocolFlag};

/// Everything needed to rerun a command: `--config <out>/config.json --seed <seed>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub command: Command,
    pub config: Config,
    pub seed: u64,
    pub threads: Option<usize>,
    pub wall_seconds: f64,
    pub estimates: Value,
    pub outputs: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: Config,
    seed: u64,
    out: &'a Path,
    outputs: Vec<PathBuf>,
    samples: Option<usize>,
}

impl Ctx<'_> {
    fn file(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn protocol(&self) -> Protocol {
        self.cfg.protocol.unwrap_or_else(Protocol::multi)
    }

    fn chain(&self) -> Result<ChainSpec, CliError> {
        let spec = self
            .cfg
            .chain
            .clone()
            .ok_or_else(|| CliError::Config("missing section `chain`".into()))?;
        spec.validate().map_err(invalid)?;
        Ok(spec)
    }
}

pub fn run(cli: &Cli) -> Result<RunRecord, CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?
            .install(|| run_inner(cli)),
        None => run_inner(cli),
    }
}

fn run_inner(cli: &Cli) -> Result<RunRecord, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => Config::default(),
    };
    match cli.protocol {
        Some(ProtocolFlag::Single) => cfg.protocol = Some(Protocol::Single),
        Some(ProtocolFlag::Multi) => {
            if !matches!(cfg.protocol, Some(Protocol::Multi(_))) {
                cfg.protocol = Some(Protocol::multi());
            }
        }
        None => {}
    }
    if let Some(p) = &cfg.protocol {
        p.validate().map_err(invalid)?;
    }
    if cli.samples == Some(0) || cli.samples == Some(1) {
        return Err(CliError::Config("--samples must be at least 2".into()));
    }
    let seed = cli.seed.unwrap_or_else(rand::random);
    println!("master seed: {seed}");
    std::fs::create_dir_all(&cli.out)?;

    let mut ctx = Ctx {
        cfg,
        seed,
        out: &cli.out,
        outputs: Vec::new(),
        samples: cli.samples,
    };
    let start = Instant::now();
    let estimates = match &cli.command {
        Command::ChainSim { sample_csv } => chain_sim_cmd(&mut ctx, *sample_csv)?,
        Command::Optimize => optimize_cmd(&mut ctx)?,
        Command::Sensitivity => sensitivity_cmd(&mut ctx)?,
        Command::FdCompare => fd_compare_cmd(&mut ctx)?,
        Command::Place { n } => place_cmd(&mut ctx, n)?,
        Command::Analyze { results, delta } => analyze_cmd(&mut ctx, results, delta)?,
        Command::Benchmark { max_links } => benchmark_cmd(&mut ctx, *max_links)?,
    };
    let wall_seconds = start.elapsed().as_secs_f64();

    let config_path = ctx.file("config.json");
    write_json(&config_path, &ctx.cfg)?;
    let run_path = cli.out.join("run.json");
    ctx.outputs.push(run_path.clone());
    let record = RunRecord {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        command: cli.command.clone(),
        config: ctx.cfg,
        seed,
        threads: cli.threads,
        wall_seconds,
        estimates,
        outputs: ctx.outputs,
    };
    write_json(&run_path, &record)?;
    Ok(record)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn chain_sim_cmd(ctx: &mut Ctx, sample_csv: bool) -> Result<Value, CliError> {
    let spec = ctx.chain()?;
    let protocol = ctx.protocol();
    ctx.cfg.protocol = Some(protocol);
    if let Some(n) = ctx.samples {
        ctx.cfg.samples = Some(n);
    }
    let n = *ctx.cfg.samples.get_or_insert(100_000);
    let set = chain_sim::sample_values::<f64>(&spec, &protocol, n, ctx.seed)?;
    let est = set.skr()?;
    println!(
        "SKR = {:.6e} ± {:.2e} Hz   E[T_ent] = {:.6e} ± {:.2e} s   w = {:.6} ± {:.2e}   QBER = {:.6}",
        est.skr, est.skr_std_error, est.mean_t_ent, est.mean_t_ent_std_error, est.mean_werner, est.mean_werner_std_error, est.qber
    );
    let mut grads = Vec::new();
    for p in ctx.cfg.parameters.clone() {
        p.direction(&spec).map_err(invalid)?;
        let g = chain_sim::skr_gradient(&spec, &protocol, &p, n, ctx.seed)?;
        println!("dSKR along {p:?} = {:.6e} ± {:.2e}", g.gradient, g.std_error);
        grads.push(json!({"parameter": to_value(&p), "gradient": to_value(&g)}));
    }
    if sample_csv {
        let mut t = Table::create(&ctx.file("samples.csv"), &["index", "t_ent", "werner"])?;
        for (i, (a, b)) in set.t_ent.iter().zip(&set.werner).enumerate() {
            t.row([i.to_string(), num(*a), num(*b)])?;
        }
        t.finish()?;
    }
    Ok(json!({"skr": to_value(&est), "gradients": grads}))
}

fn optimize_cmd(ctx: &mut Ctx) -> Result<Value, CliError> {
    let spec = ctx.chain()?;
    let protocol = ctx.protocol();
    ctx.cfg.protocol = Some(protocol);
    let bs = ctx.cfg.optimize.get_or_insert_with(Default::default);
    if let Some(n) = ctx.samples {
        bs.final_samples = n;
    }
    bs.validate().map_err(invalid)?;
    let bs = bs.clone();
    let r = optimize_bright_states(&spec, &protocol, &bs, ctx.seed).map_err(|e| match e {
        repeater_ad::Error::InvalidChain(_) | repeater_ad::Error::Config(_) => invalid(e),
        e => e.into(),
    })?;
    let alphas: Vec<String> = r.alpha.iter().map(|a| format!("{a:.5}")).collect();
    println!(
        "phase one: alpha = {:.5}{}",
        r.phase_one.start,
        if r.phase_one.fallback { " (grid maximum; fit root unusable)" } else { "" }
    );
    println!("alpha = [{}]", alphas.join(", "));
    println!("SKR = {:.6} ± {:.2e} Hz ({} samples)", r.estimate.skr, r.estimate.skr_std_error, r.estimate.n_samples);
    let n_links = spec.links.len();
    let mut header = vec!["iteration".to_string(), "skr".into(), "skr_se".into(), "gradient_norm".into()];
    header.extend((1..=n_links).map(|i| format!("alpha_{i}")));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::create(&ctx.file("trace.csv"), &header)?;
    for row in &r.trace {
        let mut f = vec![row.iteration.to_string(), num(row.skr), num(row.skr_std_error), num(row.gradient_norm)];
        f.extend(row.alpha.iter().map(|&a| num(a)));
        t.row(f)?;
    }
    t.finish()?;
    Ok(json!({
        "alpha": r.alpha,
        "phase_one": to_value(&r.phase_one),
        "skr": to_value(&r.estimate),
    }))
}

fn sensitivity_cmd(ctx: &mut Ctx) -> Result<Value, CliError> {
    let spec = ctx.chain()?;
    let protocol = ctx.protocol();
    ctx.cfg.protocol = Some(protocol);
    if let Some(n) = ctx.samples {
        ctx.cfg.samples = Some(n);
    }
    let n = *ctx.cfg.samples.get_or_insert(100_000);
    let s = chain_sim::sensitivity(&spec, &protocol, n, ctx.seed)?;
    let mut t = Table::create(&ctx.file("sensitivity.csv"), &["node", "coherence_time", "dskr_dt", "dskr_dt_se"])?;
    println!("node  T (s)        dSKR/dT (Hz/s)");
    for (i, g) in s.iter().enumerate() {
        let tn = spec.nodes[i].coherence_time;
        println!("{i:>4}  {tn:<11.4e}  {:.6e} ± {:.2e}", g.gradient, g.std_error);
        t.row([i.to_string(), num(tn), num(g.gradient), num(g.std_error)])?;
    }
    t.finish()?;
    let skr = s.first().map(|g| to_value(&g.estimate));
    Ok(json!({"skr": skr, "sensitivity": to_value(&s)}))
}

/// Threshold, in standard errors, under which a central difference counts as zero.
pub const ZERO_SE: f64 = 4.0;

fn fd_compare_cmd(ctx: &mut Ctx) -> Result<Value, CliError> {
    let sweep = ctx.cfg.fd_compare.get_or_insert_with(Default::default);
    if let Some(n) = ctx.samples {
        sweep.skr_samples = n;
        sweep.derivative_samples = n;
        sweep.fd_samples = n;
    }
    if let Some(p) = ctx.cfg.protocol {
        sweep.protocol = p;
    }
    sweep.validate().map_err(invalid)?;
    let sweep = sweep.clone();
    let rows = position_sweep(&sweep, ctx.seed)?;

    let mut header = vec![
        "position_km".to_string(),
        "skr".into(),
        "skr_se".into(),
        "deriv_stochad".into(),
        "deriv_stochad_se".into(),
    ];
    for e in &sweep.epsilons {
        header.push(format!("deriv_central_eps{e}"));
        header.push(format!("deriv_central_eps{e}_se"));
    }
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::create(&ctx.file("fd_compare.csv"), &header)?;
    for r in &rows {
        let mut f = vec![num(r.position_km), num(r.skr), num(r.skr_std_error), num(r.derivative), num(r.derivative_std_error)];
        for c in &r.central {
            f.push(num(c.estimate));
            f.push(num(c.std_error));
        }
        t.row(f)?;
    }
    t.finish()?;

    let xs: Vec<f64> = rows.iter().map(|r| r.position_km).collect();
    let ad: Vec<f64> = rows.iter().map(|r| r.derivative).collect();
    let best = argmax(&rows);
    let crossing = zero_crossing(&xs, &ad);
    let plateaus: Vec<Value> = sweep
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let v: Vec<f64> = rows.iter().map(|r| r.central[k].estimate).collect();
            let s: Vec<f64> = rows.iter().map(|r| r.central[k].std_error).collect();
            json!({"epsilon": e, "zero_width_km": widest_zero_run(&xs, &v, &s, ZERO_SE)})
        })
        .collect();
    println!(
        "SKR maximum at {} km; AD derivative crosses zero at {} km",
        best.map_or("-".into(), |b| format!("{b:.3}")),
        crossing.map_or("-".into(), |c| format!("{c:.3}"))
    );
    for p in &plateaus {
        println!("central difference eps = {} km: zero within {ZERO_SE} SE over {} km", p["epsilon"], p["zero_width_km"]);
    }
    Ok(json!({
        "skr_argmax_km": best,
        "derivative_zero_km": crossing,
        "central_zero_widths": plateaus,
        "rows": to_value(&rows),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementFile {
    pub n_repeaters: usize,
    pub seed: u64,
    pub skr_min: f64,
    pub skr_min_std_error: f64,
    pub result: repeater_ad::placement::PlacementResult,
    pub settings: repeater_ad::placement::PlacementConfig,
}

fn place_cmd(ctx: &mut Ctx, n_flag: &[usize]) -> Result<Value, CliError> {
    let section = ctx
        .cfg
        .placement
        .as_mut()
        .ok_or_else(|| CliError::Config("missing section `placement`".into()))?;
    if !n_flag.is_empty() {
        section.n_repeaters = n_flag.to_vec();
    }
    if let Some(n) = ctx.samples {
        section.settings.final_samples = n;
    }
    section.settings.seed = ctx.seed;
    if let Some(p) = ctx.cfg.protocol {
        section.settings.hardware.protocol = p;
    }
    section.settings.validate().map_err(invalid)?;
    let ends = section.end_nodes()?;
    repeater_ad::placement::Coordinates::new(ends.clone(), Vec::new()).map_err(invalid)?;
    let section = section.clone();

    let mut summary = Vec::new();
    for &n in &section.n_repeaters {
        let r = place_repeaters(&ends, n, &section.settings)?;
        println!(
            "N = {n}: SKR_min = {:.6e} ± {:.2e} Hz (best of {} restarts)",
            r.skr_min,
            r.skr_min_std_error,
            r.restarts.len()
        );
        let mut t = Table::create(
            &ctx.file(&format!("trace_n{n}.csv")),
            &["restart", "epoch", "temperature", "utility", "skr_min"],
        )?;
        for rr in &r.restarts {
            for e in &rr.trace {
                t.row([rr.restart.to_string(), e.epoch.to_string(), num(e.temperature), num(e.utility), num(e.skr_min)])?;
            }
        }
        t.finish()?;
        let file = PlacementFile {
            n_repeaters: n,
            seed: ctx.seed,
            skr_min: r.skr_min,
            skr_min_std_error: r.skr_min_std_error,
            result: r,
            settings: section.settings.clone(),
        };
        write_json(&ctx.file(&format!("placement_n{n}.json")), &file)?;
        summary.push(json!({
            "n_repeaters": n,
            "skr_min": file.skr_min,
            "skr_min_std_error": file.skr_min_std_error,
            "repeaters": to_value(&file.result.coordinates.repeaters),
        }));
    }
    Ok(Value::Array(summary))
}

/// The fields of a placement file that the scaling analysis reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementSummary {
    pub n_repeaters: usize,
    pub skr_min: f64,
    pub skr_min_std_error: f64,
}

fn read_placements(dir: &Path) -> Result<Vec<PlacementSummary>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("placement_n") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn analyze_cmd(ctx: &mut Ctx, dir: &Path, deltas: &[f64]) -> Result<Value, CliError> {
    let mut files = read_placements(dir)?;
    files.sort_by_key(|f| f.n_repeaters);
    let pts: Vec<(usize, f64)> = files.iter().map(|f| (f.n_repeaters, f.skr_min)).collect();
    let mut distinct: Vec<usize> = pts.iter().map(|p| p.0).collect();
    distinct.dedup();
    if distinct.len() < 6 || distinct[0] != 0 {
        return Err(CliError::Config(format!(
            "analyze needs placement results for at least 6 distinct N including N = 0, found {distinct:?}"
        )));
    }
    let fit = analyze_scaling(&pts, deltas);
    let mut t = Table::create(&ctx.file("scaling.csv"), &["n_repeaters", "skr_min", "skr_min_se", "fit"])?;
    for f in &files {
        let curve = fit.as_ref().map_or(String::new(), |c: &ScalingFit| num(c.curve(f.n_repeaters as f64)));
        t.row([f.n_repeaters.to_string(), num(f.skr_min), num(f.skr_min_std_error), curve])?;
    }
    t.finish()?;
    let fit = fit?;
    write_json(&ctx.file("scaling.json"), &fit)?;
    println!("c = {:?}", fit.c);
    println!(
        "N_min = {}   SKR_best = {:.6e} Hz",
        fit.n_min.map_or("none".into(), |n| n.to_string()),
        fit.skr_best
    );
    for (d, n) in &fit.n_suff {
        println!("N_suff({d}) = {}", n.map_or("none".into(), |n| format!("{n:.3}")));
    }
    Ok(to_value(&fit))
}

fn benchmark_cmd(ctx: &mut Ctx, max_links: Option<usize>) -> Result<Value, CliError> {
    let bc = ctx.cfg.benchmark.get_or_insert_with(Default::default);
    if let Some(m) = max_links {
        bc.max_links = m;
    }
    if let Some(n) = ctx.samples {
        bc.samples = n;
    }
    if let Some(p) = ctx.cfg.protocol {
        bc.protocols = vec![p];
    }
    let bc = bc.clone();
    let (rows, summary) = run_benchmark(&bc, derive_seed(ctx.seed, 0, 0))?;
    let mut t = Table::create(&ctx.file("benchmark.csv"), &["n_links", "protocol", "mode", "seconds_per_sample"])?;
    for r in &rows {
        let mode = match r.mode {
            crate::benchmark::Mode::Primal => "primal",
            crate::benchmark::Mode::Derivative => "derivative",
        };
        t.row([r.n_links.to_string(), r.protocol.clone(), mode.into(), num(r.seconds_per_sample)])?;
    }
    t.finish()?;
    for s in &summary {
        let r: Vec<String> = s.ratio.iter().map(|x| format!("{x:.2}")).collect();
        println!("{}: derivative/primal = [{}], Spearman {:.3}", s.protocol, r.join(", "), s.spearman);
    }
    Ok(json!({"rows": to_value(&rows), "ratios": to_value(&summary)}))
}
