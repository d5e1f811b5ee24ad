#![allow(dead_code)]

use longbeat::beat_synth::{reference_ecg, BeatTemplateModel, ReferenceConfig, ReferenceEcg};
use longbeat::io::PipelineConfig;
use longbeat::pipeline::{fit_templates, segment_recording, Segmented};
use longbeat::{BeatLabel, RandomSource};

/// An annotated simulated recording, segmented with the default configuration.
pub struct Desk {
    pub ecg: ReferenceEcg,
    pub segmented: Segmented,
    pub templates: Vec<BeatTemplateModel>,
}

impl Desk {
    pub fn annotations(&self) -> Vec<(usize, BeatLabel)> {
        annotations(&self.ecg)
    }

    pub fn template(&self, label: BeatLabel) -> &BeatTemplateModel {
        self.templates.iter().find(|m| m.label == label).expect("template for label")
    }
}

pub fn annotations(ecg: &ReferenceEcg) -> Vec<(usize, BeatLabel)> {
    ecg.r_indices.iter().copied().zip(ecg.labels.iter().copied()).collect()
}

pub fn reference(beats: usize, seed: u64) -> ReferenceEcg {
    let cfg = ReferenceConfig {
        beats,
        ..ReferenceConfig::default()
    };
    reference_ecg(&cfg, &mut RandomSource::new(seed)).unwrap()
}

pub fn desk(beats: usize, seed: u64) -> Desk {
    let cfg = PipelineConfig::default();
    let ecg = reference(beats, seed);
    let segmented = segment_recording(&ecg.signal, &annotations(&ecg), cfg.window, &cfg.schema, &cfg.store_schema).unwrap();
    let templates = fit_templates(&segmented.beats, cfg.window, ecg.signal.fs(), &cfg).unwrap();
    Desk { ecg, segmented, templates }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn column(beats: &[Vec<f64>], t: usize) -> Vec<f64> {
    beats.iter().map(|b| b[t]).collect()
}

/// Two-sample KS statistic by scanning both empirical CDFs at every sample point.
pub fn ks_scan(x: &[f64], y: &[f64]) -> f64 {
    let ecdf = |s: &[f64], v: f64| s.iter().filter(|&&u| u <= v).count() as f64 / s.len() as f64;
    x.iter().chain(y).map(|&v| (ecdf(x, v) - ecdf(y, v)).abs()).fold(0.0, f64::max)
}

/// Pearson correlation matrix of row-major data.
pub fn correlation(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..d).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let sd: Vec<f64> = cols.iter().map(|c| sample_var(c).sqrt()).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let n = rows.len() as f64;
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let cov: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| (a - means[i]) * (b - means[j])).sum::<f64>() / (n - 1.0);
                    cov / (sd[i] * sd[j])
                })
                .collect()
        })
        .collect()
}
