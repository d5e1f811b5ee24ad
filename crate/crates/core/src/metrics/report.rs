use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::divergence::{divergences, Divergences, MetricParams};
use super::heatmap::{check_population, timestep_column};
use super::shape::{dtw, frechet, pointwise_errors};
use crate::delineate::{Feature, FeatureTrajectory};
use crate::error::{Error, Result};
use crate::feature_model::feature_correlations;
use crate::scalar::Scalar;

/// Pointwise mean and population standard deviation of a beat population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PopulationSummary<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

pub fn beat_population_summary<T: Scalar>(beats: &[Vec<T>]) -> Result<PopulationSummary<T>> {
    let len = check_population(beats)?;
    let n = T::from_usize_lossy(beats.len());
    let mut mean = vec![T::zero(); len];
    for b in beats {
        for (m, &v) in mean.iter_mut().zip(b) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![T::zero(); len];
    for b in beats {
        for ((s, &v), &m) in var.iter_mut().zip(b).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok(PopulationSummary { mean, std })
}

/// Beat-level fidelity: shape distances between the two mean beats and
/// per-timestep distributional distances averaged over timesteps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dtw_distance: f64,
    pub frechet_distance: f64,
    pub euclidean_distance: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mse: f64,
    pub prd: f64,
    pub average_kl_divergence: f64,
    pub average_js_divergence: f64,
    pub average_mmd: f64,
    pub average_wasserstein_distance: f64,
    pub average_ks_statistic: f64,
    pub average_mean_difference: f64,
    pub average_variance_difference: f64,
    pub average_skewness_difference: f64,
}

impl MetricReport {
    /// `(display name, value)` pairs in table order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("DTW distance between average ECG beats", self.dtw_distance),
            ("Fréchet distance between average ECG beats", self.frechet_distance),
            ("Euclidean distance between average ECG beats", self.euclidean_distance),
            ("RMSE between average ECG beats", self.rmse),
            ("MAE between average ECG beats", self.mae),
            ("MSE between average ECG beats", self.mse),
            ("PRD between average ECG beats", self.prd),
            ("Average KL Divergence", self.average_kl_divergence),
            ("Average JS Divergence", self.average_js_divergence),
            ("Average MMD", self.average_mmd),
            ("Average Wasserstein Distance", self.average_wasserstein_distance),
            ("Average KS Statistic", self.average_ks_statistic),
            ("Average Mean Difference", self.average_mean_difference),
            ("Average Variance Difference", self.average_variance_difference),
            ("Average Skewness Difference", self.average_skewness_difference),
        ]
    }
}

fn average(ds: &[Divergences], f: impl Fn(&Divergences) -> f64) -> f64 {
    ds.iter().map(f).sum::<f64>() / ds.len() as f64
}

/// Compares a real and a synthetic beat population of equal beat length.
pub fn evaluate_beats<T: Scalar>(real: &[Vec<T>], synth: &[Vec<T>], params: &MetricParams) -> Result<MetricReport> {
    let len = check_population(real)?;
    let len_s = check_population(synth)?;
    if len != len_s {
        return Err(Error::LengthMismatch { expected: len, got: len_s });
    }
    let real_mean = beat_population_summary(real)?.mean;
    let synth_mean = beat_population_summary(synth)?.mean;
    let pw = pointwise_errors(&real_mean, &synth_mean)?;
    let per_t: Vec<Divergences> = (0..len)
        .into_par_iter()
        .map(|t| divergences(&timestep_column(real, t), &timestep_column(synth, t), params))
        .collect::<Result<_>>()?;
    Ok(MetricReport {
        dtw_distance: dtw(&real_mean, &synth_mean)?.as_f64(),
        frechet_distance: frechet(&real_mean, &synth_mean)?.as_f64(),
        euclidean_distance: pw.euclidean.as_f64(),
        rmse: pw.rmse.as_f64(),
        mae: pw.mae.as_f64(),
        mse: pw.mse.as_f64(),
        prd: pw.prd.as_f64(),
        average_kl_divergence: average(&per_t, |d| d.kl),
        average_js_divergence: average(&per_t, |d| d.js),
        average_mmd: average(&per_t, |d| d.mmd),
        average_wasserstein_distance: average(&per_t, |d| d.wasserstein),
        average_ks_statistic: average(&per_t, |d| d.ks),
        average_mean_difference: average(&per_t, |d| d.mean_diff),
        average_variance_difference: average(&per_t, |d| d.var_diff),
        average_skewness_difference: average(&per_t, |d| d.skew_diff),
    })
}

/// One feature's distributional comparison between real and synthetic trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMetricRow {
    pub feature: Feature,
    pub kl: f64,
    pub mmd: f64,
    pub wasserstein: f64,
    pub ks: f64,
    /// `mean(real) - mean(synth)` in the feature's unit (ms or mV).
    pub mean_diff: f64,
    /// Interval features only: the mean difference expressed in samples.
    pub mean_diff_samples: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub rows: Vec<FeatureMetricRow>,
    pub real_correlation: Vec<Vec<f64>>,
    pub synth_correlation: Vec<Vec<f64>>,
    /// Frobenius norm of the correlation difference divided by the dimension.
    pub correlation_gap: f64,
}

/// Per-feature divergences plus the pairwise-correlation comparison.
pub fn evaluate_features<T: Scalar>(
    real: &FeatureTrajectory<T>,
    synth: &FeatureTrajectory<T>,
    fs: u32,
    params: &MetricParams,
) -> Result<FeatureReport> {
    if real.schema != synth.schema {
        return Err(Error::SchemaMismatch("real and synthetic schemas differ".into()));
    }
    let rows = real
        .schema
        .iter()
        .enumerate()
        .map(|(k, &feature)| {
            let d = divergences(&real.column(k), &synth.column(k), params)?;
            Ok(FeatureMetricRow {
                feature,
                kl: d.kl,
                mmd: d.mmd,
                wasserstein: d.wasserstein,
                ks: d.ks,
                mean_diff: d.mean_diff,
                mean_diff_samples: feature.is_interval().then(|| d.mean_diff * fs as f64 / 1000.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rc = feature_correlations(real)?;
    let sc = feature_correlations(synth)?;
    let d = real.dim();
    let mut fro = 0.0;
    for i in 0..d {
        for j in 0..d {
            fro += (rc.matrix[i][j] - sc.matrix[i][j]).powi(2);
        }
    }
    Ok(FeatureReport {
        rows,
        real_correlation: rc.matrix,
        synth_correlation: sc.matrix,
        correlation_gap: fro.sqrt() / d as f64,
    })
}
