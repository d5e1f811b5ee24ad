//! Distributional distances between two scalar samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Binning, smoothing and kernel parameters for the divergence suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub bins: usize,
    pub smoothing: f64,
    /// Samples beyond this count are stride-subsampled before the O(n^2) MMD.
    pub mmd_max_samples: usize,
    /// Fixed RBF bandwidth; `None` uses the median heuristic.
    pub mmd_bandwidth: Option<f64>,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            bins: 50,
            smoothing: 1e-10,
            mmd_max_samples: 1000,
            mmd_bandwidth: None,
        }
    }
}

/// Distances between sample `x` (reference) and sample `y`.
/// Moment differences are `moment(x) - moment(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergences {
    pub kl: f64,
    pub js: f64,
    pub mmd: f64,
    pub wasserstein: f64,
    pub ks: f64,
    pub mean_diff: f64,
    pub var_diff: f64,
    pub skew_diff: f64,
}

fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Bin probabilities (count / n) over `[lo, hi]`; the last bin is closed.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let span = hi - lo;
    for &v in values {
        let b = if span > 0.0 {
            (((v - lo) / span) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize
        } else {
            0
        };
        counts[b] += 1.0;
    }
    let n = values.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

fn smooth(p: &[f64], eps: f64) -> Vec<f64> {
    let z = 1.0 + p.len() as f64 * eps;
    p.iter().map(|&v| (v + eps) / z).collect()
}

/// KL(p || q) in nats for already-smoothed probability vectors.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    0.5 * kl_divergence(p, &m) + 0.5 * kl_divergence(q, &m)
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest ECDF gap.
pub fn ks_statistic<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (xs, ys) = (sorted(&to_f64(x)), sorted(&to_f64(y)));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(best)
}

/// Wasserstein-1 distance between the two empirical measures: the area
/// between their ECDFs, which equals the sorted (quantile) coupling cost.
pub fn wasserstein1<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (xs, ys) = (sorted(&to_f64(x)), sorted(&to_f64(y)));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut all: Vec<f64> = xs.iter().chain(&ys).copied().collect();
    all.sort_by(f64::total_cmp);
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    for w in all.windows(2) {
        while i < xs.len() && xs[i] <= w[0] {
            i += 1;
        }
        while j < ys.len() && ys[j] <= w[0] {
            j += 1;
        }
        total += (w[1] - w[0]) * (i as f64 / n - j as f64 / m).abs();
    }
    Ok(total)
}

fn stride_subsample(v: &[f64], cap: usize) -> Vec<f64> {
    if v.len() <= cap || cap == 0 {
        return v.to_vec();
    }
    (0..cap).map(|i| v[i * v.len() / cap]).collect()
}

/// Median of all pairwise absolute distances within `pooled`.
fn median_pairwise_distance(pooled: &[f64]) -> f64 {
    let mut d = Vec::with_capacity(pooled.len() * pooled.len().saturating_sub(1) / 2);
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            d.push((pooled[i] - pooled[j]).abs());
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    let mid = d.len() / 2;
    if d.len() % 2 == 1 {
        *d.select_nth_unstable_by(mid, f64::total_cmp).1
    } else {
        let hi = *d.select_nth_unstable_by(mid, f64::total_cmp).1;
        let lo = d[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Biased squared-MMD estimate with an RBF kernel whose bandwidth is the
/// median pairwise distance of the pooled sample (1 when that is zero).
pub fn mmd_rbf<T: Scalar>(x: &[T], y: &[T], max_samples: usize) -> Result<f64> {
    mmd_rbf_with(x, y, max_samples, None)
}

/// As [`mmd_rbf`], with an optional fixed bandwidth.
pub fn mmd_rbf_with<T: Scalar>(x: &[T], y: &[T], max_samples: usize, bandwidth: Option<f64>) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let xs = stride_subsample(&to_f64(x), max_samples);
    let ys = stride_subsample(&to_f64(y), max_samples);
    let mut sigma = match bandwidth {
        Some(b) if b > 0.0 && b.is_finite() => b,
        Some(b) => return Err(Error::Config(format!("MMD bandwidth {b} must be positive"))),
        None => {
            let pooled: Vec<f64> = xs.iter().chain(&ys).copied().collect();
            median_pairwise_distance(&pooled)
        }
    };
    if sigma <= 0.0 {
        sigma = 1.0;
    }
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let mean_kernel = |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for &u in a {
            for &v in b {
                s += (-(u - v) * (u - v) * gamma).exp();
            }
        }
        s / (a.len() * b.len()) as f64
    };
    Ok(mean_kernel(&xs, &xs) + mean_kernel(&ys, &ys) - 2.0 * mean_kernel(&xs, &ys))
}

fn moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    (mean, m2, skew)
}

/// Full divergence suite with histograms over the pooled min-max range.
pub fn divergences<T: Scalar>(x: &[T], y: &[T], params: &MetricParams) -> Result<Divergences> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = x
        .iter()
        .chain(y)
        .map(|v| v.as_f64())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    divergences_in_range(x, y, lo, hi, params)
}

/// Divergence suite with histograms over a caller-supplied `[lo, hi]` range.
pub fn divergences_in_range<T: Scalar>(x: &[T], y: &[T], lo: f64, hi: f64, params: &MetricParams) -> Result<Divergences> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (xf, yf) = (to_f64(x), to_f64(y));
    let p = smooth(&histogram(&xf, lo, hi, params.bins), params.smoothing);
    let q = smooth(&histogram(&yf, lo, hi, params.bins), params.smoothing);
    let (mx, vx, sx) = moments(&xf);
    let (my, vy, sy) = moments(&yf);
    Ok(Divergences {
        kl: kl_divergence(&p, &q),
        js: js_divergence(&p, &q),
        mmd: mmd_rbf_with(x, y, params.mmd_max_samples, params.mmd_bandwidth)?,
        wasserstein: wasserstein1(x, y)?,
        ks: ks_statistic(x, y)?,
        mean_diff: mx - my,
        var_diff: vx - vy,
        skew_diff: sx - sy,
    })
}

/// Smoothed histogram pair over a shared range, exposed for heatmap consistency checks.
pub(crate) fn smoothed_histogram(values: &[f64], lo: f64, hi: f64, params: &MetricParams) -> Vec<f64> {
    smooth(&histogram(values, lo, hi, params.bins), params.smoothing)
}
