//! Built-in reference recordings: a sum-of-Gaussians single-lead ECG with
//! normal sinus beats and premature ventricular beats, with ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::{BeatLabel, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub fs: u32,
    pub beats: usize,
    pub mean_rr_ms: f64,
    /// Stationary standard deviation of the sinus R-R process.
    pub rr_std_ms: f64,
    /// Lag-one autocorrelation of the sinus R-R process.
    pub rr_ar: f64,
    pub p_normal_to_abnormal: f64,
    pub p_abnormal_to_normal: f64,
    /// Ratio of the coupling interval before an ectopic beat to the sinus interval.
    pub coupling_ratio: f64,
    /// Relative per-beat amplitude variation of each wave.
    pub amplitude_variation: f64,
    pub noise_mv: f64,
    pub wander_mv: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            fs: 128,
            beats: 1000,
            mean_rr_ms: 800.0,
            rr_std_ms: 40.0,
            rr_ar: 0.7,
            p_normal_to_abnormal: 0.1,
            p_abnormal_to_normal: 0.8,
            coupling_ratio: 0.62,
            amplitude_variation: 0.05,
            noise_mv: 0.01,
            wander_mv: 0.03,
        }
    }
}

/// A reference recording with its true beat positions and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEcg {
    pub signal: Signal<f64>,
    pub r_indices: Vec<usize>,
    pub labels: Vec<BeatLabel>,
}

/// (offset ms, amplitude mV, width ms) of each wave.
type Wave = (f64, f64, f64);

const NORMAL: [Wave; 5] = [
    (-180.0, 0.15, 22.0),
    (-30.0, -0.15, 9.0),
    (0.0, 1.2, 10.0),
    (30.0, -0.3, 10.0),
    (260.0, 0.32, 45.0),
];

const ECTOPIC: [Wave; 4] = [(-40.0, -0.08, 15.0), (0.0, 1.5, 20.0), (70.0, -0.5, 25.0), (330.0, -0.35, 60.0)];

/// Half-width of the support over which each beat is rendered.
const SUPPORT_MS: f64 = 1000.0;

pub fn reference_ecg(cfg: &ReferenceConfig, rng: &mut RandomSource) -> Result<ReferenceEcg> {
    if cfg.beats == 0 {
        return Err(Error::EmptyInput);
    }
    if cfg.fs == 0 || cfg.mean_rr_ms <= 0.0 {
        return Err(Error::Config("reference sampling rate and R-R mean must be positive".into()));
    }
    let fs = cfg.fs as f64;
    let mut labels = Vec::with_capacity(cfg.beats);
    let mut times_ms = Vec::with_capacity(cfg.beats);
    let innovation = cfg.rr_std_ms * (1.0 - cfg.rr_ar * cfg.rr_ar).max(0.0).sqrt();
    let mut dev = cfg.rr_std_ms * rng.standard_normal();
    let mut t = SUPPORT_MS;
    let mut label = BeatLabel::Normal;
    for n in 0..cfg.beats {
        if n > 0 {
            let next = match label {
                BeatLabel::Normal if rng.uniform() < cfg.p_normal_to_abnormal => BeatLabel::Abnormal,
                BeatLabel::Abnormal if rng.uniform() >= cfg.p_abnormal_to_normal => BeatLabel::Abnormal,
                _ => BeatLabel::Normal,
            };
            dev = cfg.rr_ar * dev + innovation * rng.standard_normal();
            let sinus = (cfg.mean_rr_ms + dev).max(0.4 * cfg.mean_rr_ms);
            let rr = match (label, next) {
                (_, BeatLabel::Abnormal) => cfg.coupling_ratio * sinus,
                (BeatLabel::Abnormal, BeatLabel::Normal) => (2.0 - cfg.coupling_ratio) * sinus,
                _ => sinus,
            };
            t += rr;
            label = next;
        }
        labels.push(label);
        times_ms.push(t);
    }
    let r_indices: Vec<usize> = times_ms.iter().map(|ms| (ms * fs / 1000.0).round() as usize).collect();
    let len = r_indices[cfg.beats - 1] + (SUPPORT_MS * fs / 1000.0) as usize + 1;
    let mut x = vec![0.0; len];
    let support = (SUPPORT_MS * fs / 1000.0) as usize;
    let phase = 2.0 * std::f64::consts::PI * rng.uniform();
    for (n, (&r, &label)) in r_indices.iter().zip(&labels).enumerate() {
        let rr_prev = if n > 0 { times_ms[n] - times_ms[n - 1] } else { cfg.mean_rr_ms };
        // Slow respiratory modulation of the QRS amplitude.
        let resp = 1.0 + 0.05 * (2.0 * std::f64::consts::PI * times_ms[n] / 4000.0 + phase).sin();
        let waves: &[Wave] = match label {
            BeatLabel::Normal => &NORMAL,
            BeatLabel::Abnormal => &ECTOPIC,
        };
        let rendered: Vec<Wave> = waves
            .iter()
            .map(|&(offset, amp, width)| {
                let scale = 1.0 + cfg.amplitude_variation * rng.standard_normal();
                let (offset, amp) = if offset.abs() > 100.0 {
                    // Repolarisation shortens at faster rates.
                    let rate = if offset > 0.0 { (rr_prev / cfg.mean_rr_ms).clamp(0.5, 1.5).sqrt() } else { 1.0 };
                    (offset * rate + 8.0 * rng.standard_normal(), amp * scale)
                } else {
                    (offset, amp * scale * resp)
                };
                (offset * fs / 1000.0, amp, width * fs / 1000.0)
            })
            .collect();
        for i in r.saturating_sub(support)..(r + support).min(len) {
            let d = i as f64 - r as f64;
            for &(c, a, s) in &rendered {
                let z = (d - c) / s;
                x[i] += a * (-0.5 * z * z).exp();
            }
        }
    }
    for (i, v) in x.iter_mut().enumerate() {
        let secs = i as f64 / fs;
        *v += cfg.wander_mv * (2.0 * std::f64::consts::PI * 0.2 * secs + phase).sin() + cfg.noise_mv * rng.standard_normal();
    }
    Ok(ReferenceEcg {
        signal: Signal::new(x, cfg.fs, "reference")?,
        r_indices,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delineate::detect_r_peaks;

    #[test]
    fn ground_truth_is_consistent() {
        let ecg = reference_ecg(&ReferenceConfig { beats: 300, ..Default::default() }, &mut RandomSource::new(3)).unwrap();
        assert_eq!(ecg.r_indices.len(), 300);
        assert!(ecg.r_indices.windows(2).all(|w| w[1] > w[0]));
        let abnormal = ecg.labels.iter().filter(|l| **l == BeatLabel::Abnormal).count();
        assert!((10..80).contains(&abnormal), "{abnormal}");
        let x = ecg.signal.samples();
        for &r in &ecg.r_indices {
            assert!(x[r] > x[r - 1] && x[r] > x[r + 1]);
        }
    }

    #[test]
    fn detector_recovers_reference_beats() {
        let ecg = reference_ecg(&ReferenceConfig { beats: 500, ..Default::default() }, &mut RandomSource::new(11)).unwrap();
        let found = detect_r_peaks(&ecg.signal).unwrap();
        assert_eq!(found, ecg.r_indices);
    }

    #[test]
    fn deterministic() {
        let cfg = ReferenceConfig { beats: 50, ..Default::default() };
        let a = reference_ecg(&cfg, &mut RandomSource::new(1)).unwrap();
        let b = reference_ecg(&cfg, &mut RandomSource::new(1)).unwrap();
        assert_eq!(a, b);
    }
}
