//! Logistic fit of network utility against repeater count.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold above the repeaterless utility that counts as an improvement.
pub const IMPROVEMENT_FACTOR: f64 = 1.03;

/// `max(c1 / (1 + exp(-c2 (n - c3))) + c4, c5)`.
pub fn logistic(c: &[f64; 5], n: f64) -> f64 {
    (c[0] / (1.0 + (-c[1] * (n - c[2])).exp()) + c[3]).max(c[4])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub c: [f64; 5],
    pub residual_rms: f64,
    pub iterations: usize,
    /// Smallest measured `N` whose utility beats the `N = 0` utility by 3%.
    pub n_min: Option<usize>,
    /// `(delta, N)` pairs; `None` when the fitted curve never reaches the level.
    pub n_suff: Vec<(f64, Option<f64>)>,
    pub skr_best: f64,
}

impl ScalingFit {
    pub fn curve(&self, n: f64) -> f64 {
        logistic(&self.c, n)
    }

    pub fn plateau(&self) -> f64 {
        (self.c[0] + self.c[3]).max(self.c[4])
    }

    /// Repeaters needed to come within a fraction `delta` of the plateau.
    pub fn n_sufficient(&self, delta: f64) -> Option<f64> {
        let [c1, c2, c3, c4, _] = self.c;
        let level = (1.0 - delta) * self.plateau() - c4;
        let arg = c1 / level - 1.0;
        let n = c3 - arg.ln() / c2;
        (level > 0.0 && arg > 0.0 && n.is_finite()).then_some(n)
    }
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    c5: f64,
}

impl Problem<'_> {
    fn full(&self, p: &Vector4<f64>) -> [f64; 5] {
        [p[0], p[1], p[2], p[3], self.c5]
    }

    fn rss(&self, p: &Vector4<f64>) -> f64 {
        let c = self.full(p);
        self.x.iter().zip(self.y).map(|(&x, &y)| (logistic(&c, x) - y).powi(2)).sum()
    }

    /// Normal equations `J^T J` and `J^T r`, with the floor branch contributing nothing.
    fn normal(&self, p: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&x, &y) in self.x.iter().zip(self.y) {
            let e = (-p[1] * (x - p[2])).exp();
            let s = 1.0 / (1.0 + e);
            let branch = p[0] * s + p[3];
            let r = branch.max(self.c5) - y;
            let j = if branch >= self.c5 {
                let ds = s * s * e;
                Vector4::new(s, p[0] * ds * (x - p[2]), -p[0] * ds * p[1], 1.0)
            } else {
                Vector4::zeros()
            };
            jtj += j * j.transpose();
            jtr += j * r;
        }
        (jtj, jtr)
    }
}

fn levenberg_marquardt(prob: &Problem, start: Vector4<f64>) -> (Vector4<f64>, f64, usize, bool) {
    let mut p = start;
    let mut cost = prob.rss(&p);
    let mut lambda = 1e-3;
    for it in 0..2000 {
        let (jtj, jtr) = prob.normal(&p);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = p + step;
            let c = prob.rss(&cand);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                p = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-14 || step.norm() < 1e-12 * (1.0 + p.norm()) {
                    return (p, cost, it + 1, true);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: a stationary point
            return (p, cost, it + 1, jtr.norm() < 1e-6 * (1.0 + cost).sqrt() || cost < 1e-300);
        }
    }
    (p, cost, 2000, false)
}

/// Fits the logistic form to `(N, utility)` points with the floor `c5` pinned to
/// the `N = 0` utility, and derives the scaling summaries.
pub fn analyze_scaling(points: &[(usize, f64)], deltas: &[f64]) -> Result<ScalingFit> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    pts.dedup_by_key(|p| p.0);
    if pts.len() < 6 {
        return Err(Error::domain(format!("need at least 6 distinct N values, got {}", pts.len())));
    }
    if pts[0].0 != 0 {
        return Err(Error::domain("the N = 0 utility is required"));
    }
    if let Some(p) = pts.iter().find(|p| !p.1.is_finite()) {
        return Err(Error::NonFiniteInput(p.1));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let y0 = y[0];
    let skr_best = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n_min = pts.iter().find(|p| p.1 > IMPROVEMENT_FACTOR * y0).map(|p| p.0);

    let prob = Problem { x: &x, y: &y, c5: y0 };
    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp = (skr_best - y_min).max(1e-12 * skr_best.abs().max(1.0));
    let half = y_min + amp / 2.0;
    let mid = x[y.iter().position(|&v| v >= half).unwrap_or(0)];
    let span = (x[x.len() - 1] - x[0]).max(1.0);
    let mut best: Option<(Vector4<f64>, f64, usize, bool)> = None;
    for s in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        for c4 in [y_min, y_min - amp] {
            let start = Vector4::new(skr_best - c4, s / span, mid, c4);
            let r = levenberg_marquardt(&prob, start);
            if best.as_ref().is_none_or(|b| r.3 && (!b.3 || r.1 < b.1)) {
                best = Some(r);
            }
        }
    }
    let (p, cost, iterations, converged) = best.expect("at least one start");
    if !converged {
        return Err(Error::FitNonConvergence(format!(
            "logistic fit did not converge (residual sum {cost:e})"
        )));
    }
    let mut fit = ScalingFit {
        c: prob.full(&p),
        residual_rms: (cost / x.len() as f64).sqrt(),
        iterations,
        n_min,
        n_suff: Vec::new(),
        skr_best,
    };
    fit.n_suff = deltas.iter().map(|&d| (d, fit.n_sufficient(d))).collect();
    Ok(fit)
}
