use proptest::prelude::*;
use repeater_ad::stochad::ops::{Add, Div, Exp, Ln, Max, Mul, Offset, Scale, Sqrt, Square, Sub};
use repeater_ad::stochad::*;
use repeater_ad::Triple;

fn within(est: f64, se: f64, truth: f64, k: f64) -> bool {
    (est - truth).abs() <= k * se
}

#[test]
fn geometric_derivative_is_unbiased() {
    for p in [0.1, 0.2, 0.5] {
        let r = estimate(|p, rng| sample_geometric(&p, rng), p, 100_000, 1).unwrap();
        assert!(within(r.mean, r.std_error, 1.0 / p, 4.0));
        assert!(within(r.derivative_mean, r.derivative_std_error, -1.0 / (p * p), 4.0), "p={p}: {r:?}");
    }
}

#[test]
fn bernoulli_derivative_is_unbiased() {
    for p in [0.1, 0.5, 0.9] {
        let r = estimate(|p, rng| sample_bernoulli(&p, rng), p, 100_000, 2).unwrap();
        assert!(within(r.derivative_mean, r.derivative_std_error, 1.0, 4.0), "p={p}: {r:?}");
    }
}

#[test]
fn smooth_map_of_geometric() {
    // E[exp(-a G)] = p q / (1 - q + p q), q = exp(-a)
    let a: f64 = 0.3;
    let p = 0.25;
    let q: f64 = (-a).exp();
    let truth = q * (1.0 - q) / (1.0 - q + p * q).powi(2);
    let r = estimate(
        |p, rng| sample_geometric(&p, rng)?.map(&Scale(-a))?.map(&Exp),
        p,
        100_000,
        3,
    )
    .unwrap();
    assert!(within(r.derivative_mean, r.derivative_std_error, truth, 4.0), "{r:?} vs {truth}");
}

#[test]
fn max_of_two_geometrics() {
    // E[max] = 2/p - 1/(p(2-p))
    let p: f64 = 0.3;
    let truth = -2.0 / (p * p) + (2.0 - 2.0 * p) / (p * (2.0 - p)).powi(2);
    let r = estimate(
        |p, rng| {
            let a = sample_geometric(&p, rng)?;
            let b = sample_geometric(&p, rng)?;
            combine(&Max, &a, &b, rng)
        },
        p,
        200_000,
        4,
    )
    .unwrap();
    assert!(within(r.derivative_mean, r.derivative_std_error, truth, 4.0), "{r:?} vs {truth}");
}

#[test]
fn one_draw_used_twice() {
    // E[G + G^2] = 1/p + (2 - p)/p^2
    let p: f64 = 0.4;
    let truth = -1.0 / (p * p) - 1.0 / (p * p) - 2.0 * (2.0 - p) / p.powi(3);
    let r = estimate(
        |p, rng| {
            let g = sample_geometric(&p, rng)?;
            let g2 = combine(&Mul, &g, &g, rng)?;
            combine(&Add, &g, &g2, rng)
        },
        p,
        200_000,
        5,
    )
    .unwrap();
    assert!(within(r.derivative_mean, r.derivative_std_error, truth, 4.0), "{r:?} vs {truth}");
}

#[test]
fn bernoulli_gates_geometric_cost() {
    // E[B * G(q)] with B ~ Bernoulli(p), G ~ Geometric(p/2): p * 2/p = 2, derivative 0
    let r = estimate(
        |p, rng| {
            let b = sample_bernoulli(&p, rng)?;
            let g = sample_geometric(&p.map(&Scale(0.5))?, rng)?;
            combine(&Mul, &b, &g, rng)
        },
        0.4,
        200_000,
        6,
    )
    .unwrap();
    assert!(within(r.derivative_mean, r.derivative_std_error, 0.0, 4.0), "{r:?}");
    assert!(within(r.mean, r.std_error, 2.0, 4.0));
}

#[test]
fn same_seed_is_bitwise_identical() {
    let prog = |p: Triple, rng: &mut RandomSource| {
        let a = sample_geometric(&p, rng)?;
        let b = sample_bernoulli(&p, rng)?;
        combine(&Max, &a, &b, rng)
    };
    let a = estimate(prog, 0.3, 5000, 77).unwrap();
    let b = estimate(prog, 0.3, 5000, 77).unwrap();
    assert_eq!(a, b);
    let c = estimate(prog, 0.3, 5000, 78).unwrap();
    assert_ne!(a, c);
}

// f(x) = exp(x^2) / (1 + sqrt(x)) + ln(x) * (3x - 1)
fn program(x: &Triple, rng: &mut RandomSource) -> Triple {
    let e = x.map(&Square).unwrap().map(&Exp).unwrap();
    let den = x.map(&Sqrt).unwrap().map(&Offset(1.0)).unwrap();
    let lhs = combine(&Div, &e, &den, rng).unwrap();
    let lin = x.map(&Scale(3.0)).unwrap().map(&Offset(-1.0)).unwrap();
    let rhs = combine(&Mul, &x.map(&Ln).unwrap(), &lin, rng).unwrap();
    combine(&Add, &lhs, &rhs, rng).unwrap()
}

fn program_derivative(x: f64) -> f64 {
    let s = x.sqrt();
    let e = (x * x).exp();
    let d_lhs = (2.0 * x * e * (1.0 + s) - e / (2.0 * s)) / (1.0 + s).powi(2);
    let d_rhs = (3.0 * x - 1.0) / x + 3.0 * x.ln();
    d_lhs + d_rhs
}

proptest! {
    #[test]
    fn smooth_programs_are_exact(x in 0.05..2.5f64) {
        let mut rng = RandomSource::new(0, 0);
        let y = program(&make_input(x).unwrap(), &mut rng);
        let want = program_derivative(x);
        prop_assert!(y.perturbation().is_none());
        prop_assert!((derivative_estimate(&y) - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {}", derivative_estimate(&y), want);
    }

    #[test]
    fn pruning_preserves_first_moment(
        da in -5.0..5.0f64, wa in 0.0..3.0f64, db in -5.0..5.0f64, wb in 0.0..3.0f64, seed in 0u64..1000,
    ) {
        let trials = 20_000u64;
        let mut vals = Vec::with_capacity(trials as usize);
        for i in 0..trials {
            let mut rng = RandomSource::new(seed, i);
            let a = Triple::with_perturbation(1.0, 0.0, da, wa).unwrap();
            let b = Triple::with_perturbation(2.0, 0.0, db, wb).unwrap();
            let y = combine(&Add, &a, &b, &mut rng).unwrap();
            let y = rng.resolve(&y);
            vals.push(derivative_estimate(&y));
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let truth = wa * da + wb * db;
        prop_assert!((mean - truth).abs() <= 4.0 * se + 1e-12, "{mean} ± {se} vs {truth}");
    }

    #[test]
    fn weights_stay_non_negative(p in 0.05..0.95f64, ops in proptest::collection::vec(0u8..5, 1..12), seed in 0u64..500) {
        let mut rng = RandomSource::new(seed, 1);
        let x = make_input(p).unwrap();
        let mut acc = sample_geometric(&x, &mut rng).unwrap();
        for op in ops {
            let fresh = if op % 2 == 0 { sample_geometric(&x, &mut rng).unwrap() } else { sample_bernoulli(&x, &mut rng).unwrap() };
            acc = match op {
                0 => combine(&Add, &acc, &fresh, &mut rng),
                1 => combine(&Mul, &acc, &fresh, &mut rng),
                2 => combine(&Max, &acc, &fresh, &mut rng),
                3 => combine(&Sub, &acc, &fresh, &mut rng),
                _ => acc.map(&Scale(-0.5)),
            }.unwrap();
            if let Some(pt) = acc.perturbation() {
                prop_assert!(pt.weight() >= 0.0);
            }
            let r = rng.resolve(&acc);
            if let Some(pt) = r.perturbation() {
                prop_assert!(pt.weight() >= 0.0);
            }
        }
    }

    #[test]
    fn constants_carry_nothing(x in -1e6..1e6f64) {
        let c = make_const(x);
        prop_assert_eq!(c.delta(), 0.0);
        prop_assert!(c.perturbation().is_none());
        prop_assert_eq!(derivative_estimate(&c), 0.0);
    }

    #[test]
    fn same_stream_same_draws(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = RandomSource::new(seed, stream);
        let mut b = RandomSource::new(seed, stream);
        for _ in 0..16 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }
}
