//! Waveform and beat types shared by every stage.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delineate::Feature;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default sampling rate in Hz.
pub const DEFAULT_FS: u32 = 128;

/// Uniformly sampled single-lead waveform in mV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Signal<T> {
    samples: Vec<T>,
    fs: u32,
    channel_name: String,
}

impl<T: Scalar> Signal<T> {
    /// Validates that the signal is non-empty, `fs > 0`, and every sample is finite.
    pub fn new(samples: Vec<T>, fs: u32, channel_name: impl Into<String>) -> Result<Self> {
        if fs == 0 {
            return Err(Error::InvalidSignal("sampling rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            fs,
            channel_name: channel_name.into(),
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn fs(&self) -> u32 {
        self.fs
    }

    pub fn channel_name(&self) -> &str {
        &self.channel_name
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Converts a duration in milliseconds to the nearest whole number of samples.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.fs)
    }
}

pub fn ms_to_samples(ms: f64, fs: u32) -> usize {
    (ms * fs as f64 / 1000.0).round().max(0.0) as usize
}

pub fn samples_to_ms(samples: f64, fs: u32) -> f64 {
    samples * 1000.0 / fs as f64
}

/// Fixed window around an R-peak: `pre_r` samples before, `post_r` after.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeatWindow {
    pub pre_r: usize,
    pub post_r: usize,
}

impl Default for BeatWindow {
    fn default() -> Self {
        Self {
            pre_r: 40,
            post_r: 60,
        }
    }
}

impl BeatWindow {
    pub fn new(pre_r: usize, post_r: usize) -> Result<Self> {
        let w = Self { pre_r, post_r };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pre_r < 1 || self.post_r < 1 {
            return Err(Error::InvalidWindow(format!(
                "pre_r and post_r must be at least 1 (got {}, {})",
                self.pre_r, self.post_r
            )));
        }
        Ok(())
    }

    /// Total window length `pre_r + post_r + 1`.
    pub fn len(&self) -> usize {
        self.pre_r + self.post_r + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeatLabel {
    Normal,
    Abnormal,
}

impl BeatLabel {
    pub const ALL: [BeatLabel; 2] = [BeatLabel::Normal, BeatLabel::Abnormal];

    pub fn as_str(self) -> &'static str {
        match self {
            BeatLabel::Normal => "normal",
            BeatLabel::Abnormal => "abnormal",
        }
    }

    pub fn index(self) -> usize {
        match self {
            BeatLabel::Normal => 0,
            BeatLabel::Abnormal => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            BeatLabel::Normal
        } else {
            BeatLabel::Abnormal
        }
    }
}

impl fmt::Display for BeatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BeatLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "n" => Ok(BeatLabel::Normal),
            "abnormal" | "a" => Ok(BeatLabel::Abnormal),
            other => Err(format!("unknown beat label {other:?}")),
        }
    }
}

/// One stored beat: the waveform centred on its R-peak plus cached descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BeatRecord<T> {
    pub id: u64,
    pub label: BeatLabel,
    pub waveform: Vec<T>,
    pub descriptors: BTreeMap<Feature, T>,
}

impl<T: Scalar> BeatRecord<T> {
    /// Descriptor value for `feature`, if cached.
    pub fn descriptor(&self, feature: Feature) -> Option<T> {
        self.descriptors.get(&feature).copied()
    }
}

/// Copies `signal[r - pre_r ..= r + post_r]`; the R sample lands at index `pre_r`.
pub fn slice_beat<T: Scalar>(signal: &Signal<T>, r_index: usize, window: BeatWindow) -> Result<Vec<T>> {
    let start = r_index as i64 - window.pre_r as i64;
    let end = r_index as i64 + window.post_r as i64;
    if start < 0 || end >= signal.len() as i64 {
        return Err(Error::OutOfBounds {
            start,
            end,
            len: signal.len(),
        });
    }
    Ok(signal.samples()[start as usize..=end as usize].to_vec())
}

/// Mean of the first five and last five samples (all samples if shorter than ten).
pub fn baseline_of<T: Scalar>(waveform: &[T]) -> T {
    assert!(!waveform.is_empty(), "baseline_of requires a non-empty waveform");
    let n = waveform.len();
    if n < 10 {
        return crate::scalar::mean(waveform);
    }
    let edges: T = waveform[..5].iter().chain(&waveform[n - 5..]).copied().sum();
    edges / T::lit(10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: Vec<f64>) -> Signal<f64> {
        Signal::new(v, DEFAULT_FS, "ii").unwrap()
    }

    #[test]
    fn slice_small_window() {
        let s = sig(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(slice_beat(&s, 2, BeatWindow::new(1, 1).unwrap()).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn slice_out_of_bounds() {
        let s = sig(vec![0.0; 500]);
        let err = slice_beat(&s, 2, BeatWindow::new(60, 120).unwrap()).unwrap_err();
        assert!(matches!(err, Error::OutOfBounds { .. }));
        let err = slice_beat(&s, 400, BeatWindow::new(60, 120).unwrap()).unwrap_err();
        assert!(matches!(err, Error::OutOfBounds { .. }));
    }

    #[test]
    fn impulse_train_slices_are_equal() {
        let mut v = vec![0.0; 400];
        v[100] = 1.0;
        v[228] = 1.0;
        let s = sig(v);
        let w = BeatWindow::new(1, 1).unwrap();
        let a = slice_beat(&s, 100, w).unwrap();
        let b = slice_beat(&s, 228, w).unwrap();
        assert_eq!(a, vec![0.0, 1.0, 0.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(baseline_of(&[0.0f64; 10]), 0.0);
        assert_eq!(baseline_of(&[1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0]), 1.5);
        assert_eq!(baseline_of(&[3.0]), 3.0);
    }

    #[test]
    fn signal_validation() {
        assert!(Signal::<f64>::new(vec![], 128, "x").is_err());
        assert!(Signal::new(vec![1.0f64], 0, "x").is_err());
        assert!(Signal::new(vec![f64::NAN], 128, "x").is_err());
        assert!(Signal::new(vec![1.0f32], 128, "x").is_ok());
    }

    #[test]
    fn default_window_is_within_range() {
        let w = BeatWindow::default();
        assert_eq!(w.len(), 101);
        assert!((100..=200).contains(&w.len()));
        assert!(BeatWindow::new(0, 5).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Normal".parse::<BeatLabel>().unwrap(), BeatLabel::Normal);
        assert_eq!("A".parse::<BeatLabel>().unwrap(), BeatLabel::Abnormal);
        assert!("x".parse::<BeatLabel>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn slice_is_projection(v in prop::collection::vec(-5.0f64..5.0, 10..60), pre in 1usize..4, post in 1usize..4, r in 0usize..60) {
                let s = sig(v.clone());
                let w = BeatWindow::new(pre, post).unwrap();
                match slice_beat(&s, r, w) {
                    Ok(b) => {
                        prop_assert_eq!(&b[..], &v[r - pre..=r + post]);
                        prop_assert_eq!(b[pre], v[r]);
                    }
                    Err(_) => prop_assert!(r < pre || r + post >= v.len()),
                }
            }

            #[test]
            fn baseline_is_finite(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
                prop_assert!(baseline_of(&v).is_finite());
            }
        }
    }
}
