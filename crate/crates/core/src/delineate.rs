//! R-peak detection, PQRST localisation and per-beat feature extraction.
//!
//! Detection runs derivative, squaring and a centred 150 ms moving-window
//! integration, then keeps local envelope maxima above `0.4 x` the rolling
//! 2 s envelope maximum with a 200 ms refractory period. Each accepted
//! candidate is refined to the signal maximum within +-80 ms so that the
//! reported index sits on the R sample itself.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};
use crate::signal::{ms_to_samples, samples_to_ms, BeatLabel, Signal};

/// Per-beat descriptor. Intervals are in ms, amplitudes in mV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "R_Int")]
    RInt,
    #[serde(rename = "P_Int")]
    PInt,
    #[serde(rename = "Q_Int")]
    QInt,
    #[serde(rename = "S_Int")]
    SInt,
    #[serde(rename = "T_Int")]
    TInt,
    #[serde(rename = "R_Amp")]
    RAmp,
    #[serde(rename = "P_Amp")]
    PAmp,
    #[serde(rename = "Q_Amp")]
    QAmp,
    #[serde(rename = "S_Amp")]
    SAmp,
    #[serde(rename = "T_Amp")]
    TAmp,
}

impl Feature {
    pub const ALL: [Feature; 10] = [
        Feature::RInt,
        Feature::PInt,
        Feature::QInt,
        Feature::SInt,
        Feature::TInt,
        Feature::RAmp,
        Feature::PAmp,
        Feature::QAmp,
        Feature::SAmp,
        Feature::TAmp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::RInt => "R_Int",
            Feature::PInt => "P_Int",
            Feature::QInt => "Q_Int",
            Feature::SInt => "S_Int",
            Feature::TInt => "T_Int",
            Feature::RAmp => "R_Amp",
            Feature::PAmp => "P_Amp",
            Feature::QAmp => "Q_Amp",
            Feature::SAmp => "S_Amp",
            Feature::TAmp => "T_Amp",
        }
    }

    pub fn is_interval(self) -> bool {
        matches!(
            self,
            Feature::RInt | Feature::PInt | Feature::QInt | Feature::SInt | Feature::TInt
        )
    }

    /// Fallback used when a feature is missing from every beat of a trajectory.
    pub fn default_value(self) -> f64 {
        match self {
            Feature::RInt => 800.0,
            Feature::PInt => 160.0,
            Feature::QInt => 40.0,
            Feature::SInt => 40.0,
            Feature::TInt => 300.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

/// Trajectory schema used throughout: the four intervals then the four amplitudes.
pub fn default_schema() -> Vec<Feature> {
    vec![
        Feature::RInt,
        Feature::PInt,
        Feature::QInt,
        Feature::TInt,
        Feature::RAmp,
        Feature::PAmp,
        Feature::QAmp,
        Feature::TAmp,
    ]
}

/// Morphology-only schema for stored beats. A lone beat has no successor, so
/// `R_Int` is never a descriptor; the assembler uses it for placement instead.
pub fn default_store_schema() -> Vec<Feature> {
    default_schema().into_iter().filter(|f| *f != Feature::RInt).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fiducial<T> {
    pub index: usize,
    pub amp: T,
}

/// Fiducial points of one beat. P/Q/S/T are `None` when their search window
/// leaves the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FiducialPoints<T> {
    pub r: Fiducial<T>,
    pub p: Option<Fiducial<T>>,
    pub q: Option<Fiducial<T>>,
    pub s: Option<Fiducial<T>>,
    pub t: Option<Fiducial<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub label: BeatLabel,
}

/// Ordered per-beat feature rows sharing one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureTrajectory<T> {
    pub schema: Vec<Feature>,
    pub rows: Vec<FeatureVector<T>>,
}

impl<T: Scalar> FeatureTrajectory<T> {
    pub fn new(schema: Vec<Feature>, rows: Vec<FeatureVector<T>>) -> Result<Self> {
        let traj = Self { schema, rows };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = self.schema.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.values.len() != d {
                return Err(Error::SchemaMismatch(format!(
                    "row {i} has {} values, schema has {d}",
                    row.values.len()
                )));
            }
            if row.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSignal(format!("row {i} has a non-finite value")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.len()
    }

    pub fn position(&self, feature: Feature) -> Option<usize> {
        self.schema.iter().position(|f| *f == feature)
    }

    pub fn column(&self, k: usize) -> Vec<T> {
        self.rows.iter().map(|r| r.values[k]).collect()
    }

    pub fn feature_column(&self, feature: Feature) -> Result<Vec<T>> {
        let k = self
            .position(feature)
            .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
        Ok(self.column(k))
    }

    pub fn labels(&self) -> Vec<BeatLabel> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Tunable timing constants for detection and delineation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelineatorConfig {
    pub integration_ms: f64,
    pub envelope_window_ms: f64,
    pub threshold_ratio: f64,
    pub refractory_ms: f64,
    pub qs_window_ms: f64,
    pub p_window_ms: f64,
    pub t_window_ms: f64,
}

impl Default for DelineatorConfig {
    fn default() -> Self {
        Self {
            integration_ms: 150.0,
            envelope_window_ms: 2000.0,
            threshold_ratio: 0.4,
            refractory_ms: 200.0,
            qs_window_ms: 80.0,
            p_window_ms: 240.0,
            t_window_ms: 360.0,
        }
    }
}

/// Detection envelope: squared centred derivative smoothed by a centred moving average.
pub fn detection_envelope<T: Scalar>(signal: &Signal<T>, cfg: &DelineatorConfig) -> Vec<f64> {
    let x: Vec<f64> = signal.samples().iter().map(|v| v.as_f64()).collect();
    let n = x.len();
    let mut sq = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        let d = 0.5 * (x[i + 1] - x[i - 1]);
        sq[i] = d * d;
    }
    let w = signal.ms_to_samples(cfg.integration_ms).max(1);
    let half = w / 2;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + sq[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn rolling_max(v: &[f64], half: usize) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while let Some(&b) = dq.back() {
                if v[b] <= v[next] {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while let Some(&f) = dq.front() {
            if f < lo {
                dq.pop_front();
            } else {
                break;
            }
        }
        *slot = v[*dq.front().expect("window is non-empty")];
    }
    out
}

/// Locates R-peaks. Returns strictly increasing indices at least one
/// refractory period apart.
pub fn detect_r_peaks<T: Scalar>(signal: &Signal<T>) -> Result<Vec<usize>> {
    detect_r_peaks_with(signal, &DelineatorConfig::default())
}

pub fn detect_r_peaks_with<T: Scalar>(signal: &Signal<T>, cfg: &DelineatorConfig) -> Result<Vec<usize>> {
    let n = signal.len();
    let required = 2 * signal.fs() as usize;
    if n < required {
        return Err(Error::TooShort { len: n, required });
    }
    let env = detection_envelope(signal, cfg);
    let global_max = env.iter().cloned().fold(0.0, f64::max);
    if global_max <= 1e-18 {
        return Err(Error::NoBeatsFound);
    }
    let rolling = rolling_max(&env, signal.ms_to_samples(cfg.envelope_window_ms / 2.0));
    let refractory = signal.ms_to_samples(cfg.refractory_ms).max(1);

    // Candidate envelope peaks, merged within the refractory period.
    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        let e = env[i];
        if e > env[i - 1] && e >= env[i + 1] && e > cfg.threshold_ratio * rolling[i] && e > 1e-12 * global_max {
            match peaks.last() {
                Some(&last) if i - last < refractory => {
                    if e > env[last] {
                        *peaks.last_mut().unwrap() = i;
                    }
                }
                _ => peaks.push(i),
            }
        }
    }

    let x = signal.samples();
    let search = signal.ms_to_samples(cfg.qs_window_ms);
    let mut r_peaks: Vec<usize> = Vec::with_capacity(peaks.len());
    for c in peaks {
        let lo = c.saturating_sub(search);
        let hi = (c + search).min(n - 1);
        let r = argmax(x, lo, hi);
        match r_peaks.last() {
            Some(&last) if r <= last || r - last < refractory => {
                if x[r] > x[last] {
                    *r_peaks.last_mut().unwrap() = r;
                }
            }
            _ => r_peaks.push(r),
        }
    }
    if r_peaks.is_empty() {
        return Err(Error::NoBeatsFound);
    }
    Ok(r_peaks)
}

fn argmax<T: Scalar>(x: &[T], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..=hi {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

fn argmin<T: Scalar>(x: &[T], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..=hi {
        if x[i] < x[best] {
            best = i;
        }
    }
    best
}

/// Index range strictly inside `(r + from, r + to)` (offsets in samples), or
/// `None` when it leaves the signal or is empty.
fn open_range(r: usize, from: i64, to: i64, len: usize) -> Option<(usize, usize)> {
    let lo = r as i64 + from + 1;
    let hi = r as i64 + to - 1;
    if lo < 0 || hi >= len as i64 || lo > hi {
        return None;
    }
    Some((lo as usize, hi as usize))
}

/// Locates P, Q, S and T around a known R-peak.
///
/// Q and S are the minima within 80 ms before and after R; P is the maximum in
/// (R-240 ms, R-80 ms) and T the maximum in (R+80 ms, R+360 ms).
pub fn delineate<T: Scalar>(signal: &Signal<T>, r_index: usize) -> FiducialPoints<T> {
    delineate_with(signal, r_index, &DelineatorConfig::default())
}

pub fn delineate_with<T: Scalar>(signal: &Signal<T>, r_index: usize, cfg: &DelineatorConfig) -> FiducialPoints<T> {
    let x = signal.samples();
    let len = x.len();
    let qs = signal.ms_to_samples(cfg.qs_window_ms) as i64;
    let pw = signal.ms_to_samples(cfg.p_window_ms) as i64;
    let tw = signal.ms_to_samples(cfg.t_window_ms) as i64;
    let at = |i: usize| Fiducial { index: i, amp: x[i] };
    FiducialPoints {
        r: at(r_index),
        q: open_range(r_index, -qs, 0, len).map(|(lo, hi)| at(argmin(x, lo, hi))),
        s: open_range(r_index, 0, qs, len).map(|(lo, hi)| at(argmin(x, lo, hi))),
        p: open_range(r_index, -pw, -qs, len).map(|(lo, hi)| at(argmax(x, lo, hi))),
        t: open_range(r_index, qs, tw, len).map(|(lo, hi)| at(argmax(x, lo, hi))),
    }
}

/// Value of a single-beat feature, or `None` when the fiducial is absent.
/// `R_Int` needs the next beat and is handled by the caller.
fn beat_feature<T: Scalar>(fp: &FiducialPoints<T>, feature: Feature, fs: u32) -> Option<T> {
    let r = fp.r.index as f64;
    let ms = |d: f64| T::lit(samples_to_ms(d, fs));
    match feature {
        Feature::RInt => None,
        Feature::PInt => fp.p.map(|p| ms(r - p.index as f64)),
        Feature::QInt => fp.q.map(|q| ms(r - q.index as f64)),
        Feature::SInt => fp.s.map(|s| ms(s.index as f64 - r)),
        Feature::TInt => fp.t.map(|t| ms(t.index as f64 - r)),
        Feature::RAmp => Some(fp.r.amp),
        Feature::PAmp => fp.p.map(|p| p.amp),
        Feature::QAmp => fp.q.map(|q| q.amp),
        Feature::SAmp => fp.s.map(|s| s.amp),
        Feature::TAmp => fp.t.map(|t| t.amp),
    }
}

/// Builds the feature trajectory of a delineated signal.
///
/// `R_Int` is the interval to the next R-peak; the last beat (and any interval of
/// 3 s or more) is treated as missing. Missing values are imputed with the
/// per-feature median over the trajectory, or [`Feature::default_value`] when a
/// feature is missing everywhere.
pub fn extract_features<T: Scalar>(
    signal: &Signal<T>,
    beats: &[FiducialPoints<T>],
    labels: &[BeatLabel],
    schema: &[Feature],
) -> Result<FeatureTrajectory<T>> {
    if beats.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.len() != beats.len() {
        return Err(Error::LengthMismatch {
            expected: beats.len(),
            got: labels.len(),
        });
    }
    let fs = signal.fs();
    let n = beats.len();
    let mut columns: Vec<Vec<Option<T>>> = Vec::with_capacity(schema.len());
    for &feature in schema {
        let col = (0..n)
            .map(|i| {
                if feature == Feature::RInt {
                    beats.get(i + 1).and_then(|next| {
                        let ms = samples_to_ms(next.r.index as f64 - beats[i].r.index as f64, fs);
                        (ms > 0.0 && ms < 3000.0).then(|| T::lit(ms))
                    })
                } else {
                    beat_feature(&beats[i], feature, fs)
                }
            })
            .collect();
        columns.push(col);
    }
    let filled: Vec<Vec<T>> = columns
        .into_iter()
        .zip(schema)
        .map(|(col, &feature)| {
            let present: Vec<T> = col.iter().flatten().copied().collect();
            let fill = if present.is_empty() {
                T::lit(feature.default_value())
            } else {
                median(&present)
            };
            col.into_iter().map(|v| v.unwrap_or(fill)).collect()
        })
        .collect();
    let rows = (0..n)
        .map(|i| FeatureVector {
            values: filled.iter().map(|c| c[i]).collect(),
            label: labels[i],
        })
        .collect();
    FeatureTrajectory::new(schema.to_vec(), rows)
}

/// Descriptors of a stand-alone beat whose R sample sits at `r_offset`.
///
/// The beat is padded with its edge values so that every search window fits;
/// returns `None` when the R sample is not the waveform maximum near the anchor.
pub fn beat_descriptors<T: Scalar>(
    waveform: &[T],
    r_offset: usize,
    fs: u32,
    schema: &[Feature],
) -> Option<BTreeMap<Feature, T>> {
    if r_offset >= waveform.len() || waveform.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cfg = DelineatorConfig::default();
    let pre_need = ms_to_samples(cfg.p_window_ms, fs) + 1;
    let post_need = ms_to_samples(cfg.t_window_ms, fs) + 1;
    let pad_front = pre_need.saturating_sub(r_offset);
    let pad_back = post_need.saturating_sub(waveform.len() - 1 - r_offset);
    let mut padded = Vec::with_capacity(waveform.len() + pad_front + pad_back);
    padded.extend(std::iter::repeat_n(waveform[0], pad_front));
    padded.extend_from_slice(waveform);
    padded.extend(std::iter::repeat_n(*waveform.last().unwrap(), pad_back));
    let sig = Signal::new(padded, fs, "beat").ok()?;
    let r = r_offset + pad_front;
    let fp = delineate_with(&sig, r, &cfg);
    let q = fp.q?;
    let s = fp.s?;
    if fp.r.amp <= q.amp || fp.r.amp <= s.amp {
        return None;
    }
    schema
        .iter()
        .filter(|f| **f != Feature::RInt)
        .map(|&f| beat_feature(&fp, f, fs).map(|v| (f, v)))
        .collect()
}

/// Detected beats of a long recording.
#[derive(Debug, Clone)]
pub struct Segmentation<T> {
    pub r_indices: Vec<usize>,
    pub fiducials: Vec<FiducialPoints<T>>,
}

/// Detects and delineates every beat of `signal`.
pub fn segment<T: Scalar>(signal: &Signal<T>) -> Result<Segmentation<T>> {
    let r_indices = detect_r_peaks(signal)?;
    let fiducials = r_indices.iter().map(|&r| delineate(signal, r)).collect();
    Ok(Segmentation { r_indices, fiducials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::DEFAULT_FS;

    /// Gaussian-bump beat with known fiducial offsets (samples relative to R).
    pub(crate) fn bump_beat(x: &mut [f64], r: usize) {
        let bumps: [(i64, f64, f64); 5] = [(-20, 0.15, 2.5), (-4, -0.3, 1.2), (0, 1.2, 1.5), (4, -0.3, 1.2), (30, 0.3, 5.0)];
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 - r as f64;
            for &(c, a, s) in &bumps {
                let d = t - c as f64;
                *v += a * (-d * d / (2.0 * s * s)).exp();
            }
        }
    }

    fn sig(v: Vec<f64>) -> Signal<f64> {
        Signal::new(v, DEFAULT_FS, "ii").unwrap()
    }

    #[test]
    fn detects_regular_train() {
        let mut x = vec![0.0; 128 * 12];
        let truth: Vec<usize> = (0..10).map(|k| 150 + 128 * k).collect();
        for &r in &truth {
            bump_beat(&mut x, r);
        }
        let peaks = detect_r_peaks(&sig(x)).unwrap();
        assert_eq!(peaks.len(), 10);
        for (p, t) in peaks.iter().zip(&truth) {
            assert!((*p as i64 - *t as i64).abs() <= 3);
        }
    }

    #[test]
    fn flat_signal_has_no_beats() {
        let err = detect_r_peaks(&sig(vec![0.0; 1280])).unwrap_err();
        assert!(matches!(err, Error::NoBeatsFound));
    }

    #[test]
    fn short_signal_rejected() {
        assert!(matches!(detect_r_peaks(&sig(vec![0.0; 100])), Err(Error::TooShort { .. })));
    }

    #[test]
    fn single_beat_in_padding() {
        let mut x = vec![0.0; 256];
        bump_beat(&mut x, 128);
        assert_eq!(detect_r_peaks(&sig(x)).unwrap(), vec![128]);
    }

    #[test]
    fn delineation_matches_construction() {
        let mut x = vec![0.0; 300];
        bump_beat(&mut x, 100);
        let s = sig(x);
        let fp = delineate(&s, 100);
        assert_eq!(fp.r.index, 100);
        assert_eq!(fp.p.unwrap().index, 80);
        assert_eq!(fp.q.unwrap().index, 96);
        assert_eq!(fp.s.unwrap().index, 104);
        assert_eq!(fp.t.unwrap().index, 130);
        for f in [fp.p, fp.q, fp.s, fp.t].into_iter().flatten() {
            assert_eq!(f.amp, s.samples()[f.index]);
        }
    }

    #[test]
    fn delineation_near_start_marks_absent() {
        let mut x = vec![0.0; 300];
        bump_beat(&mut x, 5);
        let fp = delineate(&sig(x), 5);
        assert!(fp.p.is_none());
        assert!(fp.q.is_none());
        assert!(fp.s.is_some());
    }

    #[test]
    fn symmetric_template_has_symmetric_qs() {
        let mut x = vec![0.0; 200];
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 - 100.0;
            *v = (-(t * t) / 4.0).exp() - 0.4 * (-((t.abs() - 5.0).powi(2)) / 2.0).exp();
        }
        let fp = delineate(&sig(x), 100);
        assert_eq!(100 - fp.q.unwrap().index, fp.s.unwrap().index - 100);
    }

    fn fp_at(r: usize) -> FiducialPoints<f64> {
        FiducialPoints {
            r: Fiducial { index: r, amp: 1.0 },
            p: Some(Fiducial { index: r - 20, amp: 0.1 }),
            q: Some(Fiducial { index: r - 4, amp: -0.2 }),
            s: Some(Fiducial { index: r + 4, amp: -0.2 }),
            t: Some(Fiducial { index: r + 30, amp: 0.3 }),
        }
    }

    #[test]
    fn r_interval_in_ms() {
        let s = sig(vec![0.0; 400]);
        let traj = extract_features(&s, &[fp_at(100), fp_at(228)], &[BeatLabel::Normal; 2], &default_schema()).unwrap();
        assert_eq!(traj.rows[0].values[0], 1000.0);
        // Last row imputed with the median of the present values.
        assert_eq!(traj.rows[1].values[0], 1000.0);
        assert_eq!(traj.rows[0].values[1], 20.0 * 1000.0 / 128.0);
    }

    #[test]
    fn single_beat_uses_default_rr() {
        let s = sig(vec![0.0; 400]);
        let traj = extract_features(&s, &[fp_at(100)], &[BeatLabel::Normal], &default_schema()).unwrap();
        assert_eq!(traj.rows[0].values[0], 800.0);
    }

    #[test]
    fn identical_beats_give_identical_rows() {
        let s = sig(vec![0.0; 2000]);
        let beats: Vec<_> = (0..10).map(|k| fp_at(100 + 128 * k)).collect();
        let traj = extract_features(&s, &beats, &[BeatLabel::Normal; 10], &default_schema()).unwrap();
        assert!(traj.rows.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn missing_fiducials_are_median_imputed() {
        let s = sig(vec![0.0; 2000]);
        let mut beats: Vec<_> = (0..3).map(|k| fp_at(100 + 100 * k)).collect();
        beats[1].p = None;
        beats[2].p = Some(Fiducial { index: 300 - 24, amp: 0.3 });
        let traj = extract_features(&s, &beats, &[BeatLabel::Normal; 3], &default_schema()).unwrap();
        let p_amp = traj.feature_column(Feature::PAmp).unwrap();
        assert_eq!(p_amp[1], 0.2);
    }

    #[test]
    fn empty_input_rejected() {
        let s = sig(vec![0.0; 10]);
        assert!(matches!(
            extract_features::<f64>(&s, &[], &[], &default_schema()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn standalone_descriptors() {
        let mut x = vec![0.0; 181];
        bump_beat(&mut x, 60);
        let d = beat_descriptors(&x, 60, 128, &default_store_schema()).unwrap();
        assert_eq!(d.len(), 7);
        assert_eq!(d[&Feature::RAmp], x[60]);
        assert_eq!(d[&Feature::TInt], 30.0 * 1000.0 / 128.0);
    }

    #[test]
    fn feature_names_round_trip() {
        for f in Feature::ALL {
            assert_eq!(f.as_str().parse::<Feature>().unwrap(), f);
        }
        assert!("X_Amp".parse::<Feature>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn peaks_strictly_increase(seed_vals in prop::collection::vec(-1.0f64..1.0, 256..600), beats in prop::collection::vec(20usize..500, 0..6)) {
                let mut x = seed_vals.iter().map(|v| v * 0.05).collect::<Vec<_>>();
                let n = x.len();
                for b in beats {
                    if b < n { bump_beat(&mut x, b); }
                }
                let s = sig(x);
                if let Ok(peaks) = detect_r_peaks(&s) {
                    prop_assert!(peaks.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] >= 26));
                    for &r in &peaks {
                        let fp = delineate(&s, r);
                        prop_assert_eq!(fp.r.amp, s.samples()[r]);
                        for f in [fp.p, fp.q, fp.s, fp.t].into_iter().flatten() {
                            prop_assert_eq!(f.amp, s.samples()[f.index]);
                        }
                    }
                }
            }
        }
    }
}
