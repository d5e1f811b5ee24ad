//! PCA template perturbation: a label-conditioned single-beat generator.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delineate::{beat_descriptors, Feature};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::{ms_to_samples, BeatLabel, BeatRecord, BeatWindow};

pub const MAX_COMPONENTS: usize = 10;
const MAX_ATTEMPTS: usize = 1000;
const QRS_HALF_WIDTH_MS: f64 = 80.0;
const SECONDARY_PEAK_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateConfig {
    pub components: usize,
    /// Uniform amplitude scale range.
    pub amplitude_jitter: (f64, f64),
    /// Largest time displacement in samples, reached at the end of the window.
    pub time_warp: f64,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        Self {
            components: 8,
            amplitude_jitter: (0.85, 1.15),
            time_warp: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeatTemplateModel {
    pub label: BeatLabel,
    pub window: BeatWindow,
    pub fs: u32,
    pub mean_beat: Vec<f64>,
    /// Orthonormal principal directions of the centred training beats.
    pub principal_components: Vec<Vec<f64>>,
    /// Standard deviation along each component, descending.
    pub component_scales: Vec<f64>,
    pub amplitude_jitter: (f64, f64),
    pub time_warp_range: f64,
}

/// Fits mean beat and top-`k` principal components. Needs at least
/// `max(20, k + 1)` beats of window length.
pub fn fit_template<T: Scalar>(
    beats: &[Vec<T>],
    label: BeatLabel,
    window: BeatWindow,
    fs: u32,
    config: &TemplateConfig,
) -> Result<BeatTemplateModel> {
    let k = config.components;
    if k > MAX_COMPONENTS {
        return Err(Error::Config(format!("at most {MAX_COMPONENTS} components supported, got {k}")));
    }
    let need = 20.max(k + 1);
    if beats.len() < need {
        return Err(Error::InsufficientBeats {
            have: beats.len(),
            need,
        });
    }
    let w = window.len();
    if let Some(b) = beats.iter().find(|b| b.len() != w) {
        return Err(Error::LengthMismatch { expected: w, got: b.len() });
    }
    let n = beats.len();
    let first: Vec<f64> = beats[0].iter().map(|v| v.as_f64()).collect();
    // Offsets from the first beat keep the mean exact for identical inputs.
    let mean_beat: Vec<f64> = (0..w)
        .map(|t| first[t] + beats.iter().map(|b| b[t].as_f64() - first[t]).sum::<f64>() / n as f64)
        .collect();
    let centred = DMatrix::from_fn(n, w, |i, t| beats[i][t].as_f64() - mean_beat[t]);
    let cov = centred.transpose() * &centred / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = Vec::with_capacity(k);
    let mut scales = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let col = eig.eigenvectors.column(i);
        // Sign convention: largest-magnitude entry positive.
        let pivot = col.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        components.push(col.iter().map(|v| v * sign).collect());
        scales.push(eig.eigenvalues[i].max(0.0).sqrt());
    }
    Ok(BeatTemplateModel {
        label,
        window,
        fs,
        mean_beat,
        principal_components: components,
        component_scales: scales,
        amplitude_jitter: config.amplitude_jitter,
        time_warp_range: config.time_warp,
    })
}

fn interp(x: &[f64], pos: f64) -> f64 {
    let last = x.len() - 1;
    if pos <= 0.0 {
        return x[0];
    }
    if pos >= last as f64 {
        return x[last];
    }
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    x[i] + f * (x[i + 1] - x[i])
}

impl BeatTemplateModel {
    /// Source position of output index `t` under warp `delta`: a stretch about
    /// the anchor that moves the window end by `delta` samples.
    fn warp_position(&self, t: usize, delta: f64) -> f64 {
        let pre = self.window.pre_r as f64;
        pre + (t as f64 - pre) * (1.0 + delta / self.window.post_r as f64)
    }

    fn warp(&self, x: &[f64], delta: f64) -> Vec<f64> {
        (0..x.len()).map(|t| interp(x, self.warp_position(t, delta))).collect()
    }

    /// Raw draw before re-anchoring and filtering.
    fn draw(&self, rng: &mut RandomSource) -> Vec<f64> {
        let mut base = self.mean_beat.clone();
        for (phi, &s) in self.principal_components.iter().zip(&self.component_scales) {
            let c = s * rng.standard_normal();
            for (b, p) in base.iter_mut().zip(phi) {
                *b += c * p;
            }
        }
        let (lo, hi) = self.amplitude_jitter;
        let a = rng.uniform_range(lo, hi);
        let delta = rng.uniform_range(-self.time_warp_range, self.time_warp_range);
        let mut out = self.warp(&base, delta);
        out.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Shifts the waveform so its maximum within +-5 samples of the anchor lands on it.
    fn reanchor(&self, x: Vec<f64>) -> Vec<f64> {
        let pre = self.window.pre_r;
        let lo = pre.saturating_sub(5);
        let hi = (pre + 5).min(x.len() - 1);
        let mut best = lo;
        for i in lo..=hi {
            if x[i] > x[best] {
                best = i;
            }
        }
        if best == pre {
            return x;
        }
        let shift = best as i64 - pre as i64;
        (0..x.len() as i64)
            .map(|t| x[(t + shift).clamp(0, x.len() as i64 - 1) as usize])
            .collect()
    }

    fn accept(&self, x: &[f64]) -> bool {
        let pre = self.window.pre_r;
        let peak = x
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > x[best].abs() { i } else { best });
        if !(x.iter().all(|v| v.is_finite()) && peak.abs_diff(pre) <= 5 && x[pre] > 0.0) {
            return false;
        }
        // A second QRS-sized deflection means the draw carries part of a
        // neighbouring beat, which would surface as an extra R after assembly.
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let base = sorted[sorted.len() / 2];
        let qrs = ms_to_samples(QRS_HALF_WIDTH_MS, self.fs);
        let limit = SECONDARY_PEAK_RATIO * (x[pre] - base);
        x.iter()
            .enumerate()
            .all(|(t, v)| t.abs_diff(pre) <= qrs || (v - base).abs() < limit)
    }

    /// Generates `count` records with ids starting at `first_id`.
    ///
    /// Beat `i` draws from `rng.fork(i)`, so output is independent of thread
    /// scheduling. Draws whose delineation fails are rejected and redrawn.
    pub fn generate_beats<T: Scalar>(
        &self,
        count: usize,
        rng: &RandomSource,
        first_id: u64,
        schema: &[Feature],
    ) -> Result<Vec<BeatRecord<T>>> {
        if count == 0 {
            return Err(Error::EmptyInput);
        }
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut r = rng.fork(i as u64);
                for _ in 0..MAX_ATTEMPTS {
                    let x = self.reanchor(self.draw(&mut r));
                    if !self.accept(&x) {
                        continue;
                    }
                    let waveform: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
                    if let Some(descriptors) = beat_descriptors(&waveform, self.window.pre_r, self.fs, schema) {
                        return Ok(BeatRecord {
                            id: first_id + i as u64,
                            label: self.label,
                            waveform,
                            descriptors,
                        });
                    }
                }
                Err(Error::InsufficientData(format!(
                    "template for {} beats produced no valid beat in {MAX_ATTEMPTS} draws",
                    self.label
                )))
            })
            .collect()
    }

    /// Pointwise mean and standard deviation implied by the generator,
    /// integrating amplitude jitter exactly and warp by Simpson's rule.
    /// Re-anchoring and rejection are not modelled.
    pub fn implied_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let w = self.mean_beat.len();
        let (lo, hi) = self.amplitude_jitter;
        let ea = 0.5 * (lo + hi);
        let ea2 = if hi > lo {
            (hi.powi(3) - lo.powi(3)) / (3.0 * (hi - lo))
        } else {
            lo * lo
        };
        let steps = if self.time_warp_range > 0.0 { 400 } else { 0 };
        let mut first = vec![0.0; w];
        let mut second = vec![0.0; w];
        let mut total_weight = 0.0;
        for s in 0..=steps {
            let delta = if steps == 0 {
                0.0
            } else {
                -self.time_warp_range + 2.0 * self.time_warp_range * s as f64 / steps as f64
            };
            let weight = if steps == 0 || s == 0 || s == steps {
                1.0
            } else if s % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let m = self.warp(&self.mean_beat, delta);
            let mut var = vec![0.0; w];
            for (phi, &sc) in self.principal_components.iter().zip(&self.component_scales) {
                let pw = self.warp(phi, delta);
                for t in 0..w {
                    var[t] += sc * sc * pw[t] * pw[t];
                }
            }
            for t in 0..w {
                first[t] += weight * m[t];
                second[t] += weight * (m[t] * m[t] + var[t]);
            }
            total_weight += weight;
        }
        let mean: Vec<f64> = first.iter().map(|v| ea * v / total_weight).collect();
        let std = (0..w)
            .map(|t| (ea2 * second[t] / total_weight - mean[t] * mean[t]).max(0.0).sqrt())
            .collect();
        (mean, std)
    }
}
