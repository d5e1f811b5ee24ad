//! Gaussian copula with empirical marginals and a latent VAR(1) process.
//!
//! Rows are mapped to latent normal scores by rank transform (within each beat
//! label), the scores follow `z[n+1] = A z[n] + e`, and labels follow a
//! two-state Markov chain. Sampling reverses the map through each label's
//! empirical quantile function.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use super::linalg::{from_rows, nearest_correlation, project_psd, psd_factor, spectral_radius, to_rows};
use super::marginal::MarginalModel;
use crate::delineate::{Feature, FeatureTrajectory, FeatureVector};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::BeatLabel;

const EIGEN_FLOOR: f64 = 1e-10;
const MAX_RADIUS: f64 = 0.99;

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub(crate) fn normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Empirical marginals of every schema feature for one beat label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMarginals {
    pub label: BeatLabel,
    pub features: Vec<MarginalModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaVarModel {
    pub schema: Vec<Feature>,
    /// One entry per label observed in training.
    pub marginals: Vec<LabelMarginals>,
    /// Contemporaneous latent correlation, row-major `d x d`.
    pub latent_corr: Vec<Vec<f64>>,
    pub lag1_coeff: Vec<Vec<f64>>,
    pub noise_cov: Vec<Vec<f64>>,
    /// Row-stochastic transition matrix indexed by `[from][to]` (normal = 0).
    pub label_transition: [[f64; 2]; 2],
    /// Features that were constant in training; their latent column is zero.
    pub degenerate: Vec<Feature>,
}

fn rank_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks.into_iter().map(|r| normal_quantile((r - 0.5) / n as f64)).collect()
}

impl CopulaVarModel {
    /// Fits the model. Requires at least `10 d` rows.
    pub fn fit<T: Scalar>(trajectory: &FeatureTrajectory<T>) -> Result<Self> {
        trajectory.validate()?;
        let n = trajectory.len();
        let d = trajectory.dim();
        if d == 0 || n < 10 * d {
            return Err(Error::InsufficientData(format!("{n} rows for {d} features; need at least {}", 10 * d)));
        }
        let labels = trajectory.labels();
        let data: Vec<Vec<f64>> = (0..d)
            .map(|k| trajectory.column(k).into_iter().map(|v| v.as_f64()).collect())
            .collect();
        let degenerate: Vec<bool> = data.iter().map(|c| c.iter().all(|&v| v == c[0])).collect();

        // Latent scores by rank transform within each label group.
        let mut z = DMatrix::<f64>::zeros(n, d);
        let mut marginals = Vec::new();
        for label in BeatLabel::ALL {
            let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == label).collect();
            if idx.is_empty() {
                continue;
            }
            let mut features = Vec::with_capacity(d);
            for k in 0..d {
                let vals: Vec<f64> = idx.iter().map(|&i| data[k][i]).collect();
                if !degenerate[k] {
                    for (&i, s) in idx.iter().zip(rank_scores(&vals)) {
                        z[(i, k)] = s;
                    }
                }
                features.push(MarginalModel::new(trajectory.schema[k], vals));
            }
            marginals.push(LabelMarginals { label, features });
        }

        let active: Vec<usize> = (0..d).filter(|&k| !degenerate[k]).collect();
        let mut corr = DMatrix::<f64>::identity(d, d);
        let mut lag = DMatrix::<f64>::zeros(d, d);
        let mut noise = DMatrix::<f64>::zeros(d, d);
        if !active.is_empty() {
            let za = z.select_columns(&active);
            let m = active.len();
            let cov = za.transpose() * &za / n as f64;
            let c = nearest_correlation(&cov_to_corr(&cov), EIGEN_FLOOR);

            let x = za.rows(0, n - 1).into_owned();
            let y = za.rows(1, n - 1).into_owned();
            let xtx = x.transpose() * &x;
            let ytx = y.transpose() * &x;
            let inv = xtx
                .clone()
                .try_inverse()
                .unwrap_or_else(|| xtx.pseudo_inverse(1e-12).expect("pseudo-inverse of symmetric matrix"));
            let mut a = ytx * inv;
            let rho = spectral_radius(&a);
            if rho >= MAX_RADIUS {
                a *= MAX_RADIUS / rho;
            }
            let resid = &y - &x * a.transpose();
            let q = project_psd(&(resid.transpose() * &resid / (n - 1) as f64), EIGEN_FLOOR);

            for (ii, &i) in active.iter().enumerate() {
                for (jj, &j) in active.iter().enumerate() {
                    corr[(i, j)] = c[(ii, jj)];
                    lag[(i, j)] = a[(ii, jj)];
                    noise[(i, j)] = q[(ii, jj)];
                }
            }
            debug_assert_eq!(m, c.nrows());
        }

        Ok(Self {
            schema: trajectory.schema.clone(),
            marginals,
            latent_corr: to_rows(&corr),
            lag1_coeff: to_rows(&lag),
            noise_cov: to_rows(&noise),
            label_transition: fit_transitions(&labels),
            degenerate: (0..d).filter(|&k| degenerate[k]).map(|k| trajectory.schema[k]).collect(),
        })
    }

    fn label_marginals(&self, label: BeatLabel) -> &LabelMarginals {
        self.marginals
            .iter()
            .find(|m| m.label == label)
            .unwrap_or(&self.marginals[0])
    }

    /// Stationary covariance `S = A S A^T + Q` of the latent process.
    pub fn stationary_cov(&self) -> Vec<Vec<f64>> {
        to_rows(&stationary(&from_rows(&self.lag1_coeff), &from_rows(&self.noise_cov)))
    }

    /// Draws a trajectory of `n_beats` rows.
    pub fn sample<T: Scalar>(&self, n_beats: usize, rng: &mut RandomSource) -> Result<FeatureTrajectory<T>> {
        if n_beats == 0 {
            return Err(Error::EmptyInput);
        }
        let d = self.schema.len();
        let a = from_rows(&self.lag1_coeff);
        let s = stationary(&a, &from_rows(&self.noise_cov));
        let init = psd_factor(&s);
        let innov = psd_factor(&from_rows(&self.noise_cov));
        let scale: Vec<f64> = (0..d).map(|k| s[(k, k)].sqrt()).collect();

        let normals = |rng: &mut RandomSource| DVector::from_fn(d, |_, _| rng.standard_normal());
        let mut label = if rng.uniform() < self.stationary_labels()[0] {
            BeatLabel::Normal
        } else {
            BeatLabel::Abnormal
        };
        let mut z = &init * normals(rng);
        let mut rows = Vec::with_capacity(n_beats);
        for step in 0..n_beats {
            if step > 0 {
                z = &a * &z + &innov * normals(rng);
                let p_normal = self.label_transition[label.index()][0];
                label = if rng.uniform() < p_normal {
                    BeatLabel::Normal
                } else {
                    BeatLabel::Abnormal
                };
            }
            let marg = self.label_marginals(label);
            let values = (0..d)
                .map(|k| {
                    let u = if scale[k] > 0.0 { normal_cdf(z[k] / scale[k]) } else { 0.5 };
                    T::lit(marg.features[k].inverse_cdf(u))
                })
                .collect();
            rows.push(FeatureVector { values, label });
        }
        FeatureTrajectory::new(self.schema.clone(), rows)
    }

    /// Stationary distribution of the label chain.
    pub fn stationary_labels(&self) -> [f64; 2] {
        let p_na = self.label_transition[0][1];
        let p_an = self.label_transition[1][0];
        if p_na + p_an <= 0.0 {
            return [1.0, 0.0];
        }
        [p_an / (p_na + p_an), p_na / (p_na + p_an)]
    }
}

fn cov_to_corr(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let d: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)].max(1e-300).sqrt()).collect();
    DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| cov[(i, j)] / (d[i] * d[j]))
}

fn stationary(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = q.clone();
    for _ in 0..100_000 {
        let next = a * &s * a.transpose() + q;
        let delta = (&next - &s).abs().max();
        s = next;
        if delta < 1e-14 {
            break;
        }
    }
    s
}

/// Label bigram counts with add-one smoothing among the observed labels.
fn fit_transitions(labels: &[BeatLabel]) -> [[f64; 2]; 2] {
    let seen = [
        labels.contains(&BeatLabel::Normal),
        labels.contains(&BeatLabel::Abnormal),
    ];
    let mut counts = [[0.0; 2]; 2];
    for w in labels.windows(2) {
        counts[w[0].index()][w[1].index()] += 1.0;
    }
    let mut out = [[0.0; 2]; 2];
    for from in 0..2 {
        let row: Vec<f64> = (0..2).map(|to| if seen[to] { counts[from][to] + 1.0 } else { 0.0 }).collect();
        let total: f64 = row.iter().sum();
        for to in 0..2 {
            out[from][to] = row[to] / total;
        }
    }
    out
}
