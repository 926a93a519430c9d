//! Sample statistics shared by the estimators.

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanSe {
    /// Mean and `sd / sqrt(n)`; the error is zero when fewer than two values are given.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = mean(xs);
        let std_error = if n < 2 {
            0.0
        } else {
            (variance(xs) / n as f64).sqrt()
        };
        MeanSe { mean, std_error }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

/// Unbiased sample covariance of two equally long series.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64
}

/// Covariance matrix of the means of several series (each sample covariance over n).
pub fn mean_covariance(series: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = series.first().map_or(0, |s| s.len()) as f64;
    series
        .iter()
        .map(|a| series.iter().map(|b| covariance(a, b) / n).collect())
        .collect()
}

/// First-order standard error of `g(means)` given its gradient.
///
/// Variables without sampling error drop out even where the gradient is infinite
/// (the secret fraction's slope at a perfect state).
pub fn delta_method_se(grad: &[f64], cov: &[Vec<f64>]) -> f64 {
    let mut v = 0.0;
    for (i, gi) in grad.iter().enumerate() {
        for (j, gj) in grad.iter().enumerate() {
            if cov[i][j] != 0.0 {
                v += gi * gj * cov[i][j];
            }
        }
    }
    v.max(0.0).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let c = covariance(&rx, &ry);
    let d = (variance(&rx) * variance(&ry)).sqrt();
    if d == 0.0 {
        0.0
    } else {
        c / d
    }
}
