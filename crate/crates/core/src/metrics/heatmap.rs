use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::divergence::{kl_divergence, smoothed_histogram, MetricParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-timestep amplitude densities of two beat populations on a shared grid.
///
/// Rows are timesteps, columns amplitude bins; `diff = synth - real`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHeatmap {
    pub bin_edges: Vec<f64>,
    pub real: Vec<Vec<f64>>,
    pub synth: Vec<Vec<f64>>,
    pub diff: Vec<Vec<f64>>,
}

impl DensityHeatmap {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn timesteps(&self) -> usize {
        self.diff.len()
    }

    /// Mean over timesteps of KL(real || synth) computed from this grid's histograms.
    pub fn average_kl(&self, smoothing: f64) -> f64 {
        let w = self.bin_width();
        let smooth = |d: &[f64]| {
            let z = 1.0 + d.len() as f64 * smoothing;
            d.iter().map(|v| (v * w + smoothing) / z).collect::<Vec<_>>()
        };
        let total: f64 = self
            .real
            .iter()
            .zip(&self.synth)
            .map(|(r, s)| kl_divergence(&smooth(r), &smooth(s)))
            .sum();
        total / self.timesteps() as f64
    }
}

pub(crate) fn check_population<T: Scalar>(beats: &[Vec<T>]) -> Result<usize> {
    let first = beats.first().ok_or(Error::EmptyInput)?;
    let len = first.len();
    if len == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(b) = beats.iter().find(|b| b.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            got: b.len(),
        });
    }
    Ok(len)
}

pub(crate) fn timestep_column<T: Scalar>(beats: &[Vec<T>], t: usize) -> Vec<f64> {
    beats.iter().map(|b| b[t].as_f64()).collect()
}

/// Builds per-timestep densities (count / (n * bin width)) over the pooled
/// amplitude range of both populations.
pub fn density_heatmap<T: Scalar>(real: &[Vec<T>], synth: &[Vec<T>], params: &MetricParams) -> Result<DensityHeatmap> {
    let len = check_population(real)?;
    let len_s = check_population(synth)?;
    if len != len_s {
        return Err(Error::LengthMismatch { expected: len, got: len_s });
    }
    let (lo, hi) = real
        .iter()
        .chain(synth)
        .flatten()
        .map(|v| v.as_f64())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let bins = params.bins;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = span / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();
    let hist_hi = *bin_edges.last().expect("bins > 0");
    let densities = |beats: &[Vec<T>]| -> Vec<Vec<f64>> {
        (0..len)
            .into_par_iter()
            .map(|t| {
                let col = timestep_column(beats, t);
                super::divergence::histogram(&col, lo, hist_hi, bins)
                    .into_iter()
                    .map(|p| p / width)
                    .collect()
            })
            .collect()
    };
    let real_d = densities(real);
    let synth_d = densities(synth);
    let diff = real_d
        .iter()
        .zip(&synth_d)
        .map(|(r, s)| s.iter().zip(r).map(|(a, b)| a - b).collect())
        .collect();
    Ok(DensityHeatmap {
        bin_edges,
        real: real_d,
        synth: synth_d,
        diff,
    })
}

/// Shared-grid KL per timestep via the divergence module's histogram path.
pub fn timestep_kl_on_grid<T: Scalar>(real: &[Vec<T>], synth: &[Vec<T>], lo: f64, hi: f64, params: &MetricParams) -> Result<Vec<f64>> {
    let len = check_population(real)?;
    Ok((0..len)
        .map(|t| {
            let p = smoothed_histogram(&timestep_column(real, t), lo, hi, params);
            let q = smoothed_histogram(&timestep_column(synth, t), lo, hi, params);
            kl_divergence(&p, &q)
        })
        .collect())
}
