//! Long-form assembly: match each target row to a stored beat, place the beats
//! at the target R-R offsets and smooth the seams.

mod matcher;

pub use matcher::{default_amplitude_edges, match_beat, match_histogram, MatchHistogram, MatchRecord, MatchWeights, Matcher};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delineate::{Feature, FeatureTrajectory};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::{baseline_of, ms_to_samples, BeatRecord, Signal};
use crate::store::{BeatStore, MatchMode};

/// How target R-R intervals in ms become sample offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RrRounding {
    /// Each interval rounded on its own: placed differences equal the rounded targets.
    #[default]
    PerInterval,
    /// Cumulative offsets rounded: no drift, differences within one sample of the targets.
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    /// Longest raised-cosine cross-fade, in samples.
    pub crossfade_max: usize,
    /// Seams are searched at least this far after the preceding R-peak...
    pub prev_guard_ms: f64,
    /// ...and at least this far before the following one, when the interval allows.
    pub next_guard_ms: f64,
    pub rounding: RrRounding,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            crossfade_max: 8,
            prev_guard_ms: 360.0,
            next_guard_ms: 240.0,
            rounding: RrRounding::PerInterval,
        }
    }
}

/// Samples `[start, end]` whose values were blended or interpolated at a seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seam {
    pub position: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSignal<T> {
    pub signal: Signal<T>,
    pub r_indices: Vec<usize>,
    pub matches: Vec<MatchRecord>,
    pub seams: Vec<Seam>,
}

/// R-peak sample positions for a trajectory; the first R sits at `pre_r`.
/// `R_Int` of row `n` is the interval from beat `n` to beat `n + 1`.
pub fn place_r_peaks<T: Scalar>(trajectory: &FeatureTrajectory<T>, fs: u32, pre_r: usize, rounding: RrRounding) -> Result<Vec<usize>> {
    let n = trajectory.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let col = trajectory
        .position(Feature::RInt)
        .ok_or_else(|| Error::SchemaMismatch("trajectory has no R_Int column".into()))?;
    let to_samples = |ms: f64| ms * fs as f64 / 1000.0;
    let mut r = Vec::with_capacity(n);
    r.push(pre_r);
    let mut cumulative = 0.0;
    for (i, row) in trajectory.rows[..n - 1].iter().enumerate() {
        let ms = row.values[col].as_f64();
        let step = match rounding {
            RrRounding::PerInterval => to_samples(ms).round(),
            RrRounding::Cumulative => {
                let before = to_samples(cumulative).round();
                cumulative += ms;
                to_samples(cumulative).round() - before
            }
        };
        if !step.is_finite() || step < 2.0 {
            return Err(Error::RrTooShort {
                position: i,
                samples: if step.is_finite() { step as i64 } else { i64::MIN },
            });
        }
        r.push(r[i] + step as usize);
    }
    Ok(r)
}

/// Matches every row (in parallel, row `n` drawing from `rng.fork(n)`).
pub fn match_trajectory<T: Scalar>(
    trajectory: &FeatureTrajectory<T>,
    store: &BeatStore<T>,
    weights: &MatchWeights,
    mode: MatchMode,
    rng: &RandomSource,
) -> Result<Vec<MatchRecord>> {
    mode.validate()?;
    let matcher = Matcher::new(store, &trajectory.schema, weights)?;
    trajectory
        .rows
        .par_iter()
        .enumerate()
        .map(|(n, row)| matcher.match_row(n, row, mode, &mut rng.fork(n as u64)))
        .collect()
}

pub fn assemble<T: Scalar>(
    trajectory: &FeatureTrajectory<T>,
    store: &BeatStore<T>,
    weights: &MatchWeights,
    mode: MatchMode,
    smoothing: &SmoothingConfig,
    rng: &RandomSource,
) -> Result<AssembledSignal<T>> {
    trajectory.validate()?;
    let window = store.window();
    let r_indices = place_r_peaks(trajectory, store.fs(), window.pre_r, smoothing.rounding)?;
    let matches = match_trajectory(trajectory, store, weights, mode, rng)?;
    let by_id: HashMap<u64, &BeatRecord<T>> = store.records().map(|b| (b.id, b)).collect();
    let waveforms: Vec<Vec<f64>> = matches
        .iter()
        .map(|m| by_id[&m.beat_id].waveform.iter().map(|v| v.as_f64()).collect())
        .collect();
    let (samples, seams) = concatenate(&waveforms, &r_indices, window.pre_r, store.fs(), smoothing);
    Ok(AssembledSignal {
        signal: Signal::new(samples.into_iter().map(T::lit).collect(), store.fs(), "assembled")?,
        r_indices,
        matches,
        seams,
    })
}

/// Places equal-length beats with their anchors at `r_indices` and resolves
/// overlaps by cross-fading and gaps by baseline interpolation.
pub fn concatenate(beats: &[Vec<f64>], r_indices: &[usize], pre_r: usize, fs: u32, cfg: &SmoothingConfig) -> (Vec<f64>, Vec<Seam>) {
    let w = beats[0].len();
    let post_r = w - pre_r - 1;
    let mut out: Vec<f64> = Vec::with_capacity(r_indices[r_indices.len() - 1] + post_r + 1);
    out.extend_from_slice(&beats[0]);
    let mut seams = Vec::with_capacity(beats.len().saturating_sub(1));
    let gp = ms_to_samples(cfg.prev_guard_ms, fs);
    let gn = ms_to_samples(cfg.next_guard_ms, fs);
    for n in 1..beats.len() {
        let next = &beats[n];
        let (prev_r, r) = (r_indices[n - 1], r_indices[n]);
        let start = r - pre_r;
        let prev_end = out.len() - 1;
        if start > prev_end {
            let gap = start - prev_end - 1;
            let b0 = baseline_of(&out[out.len() - 5.min(w)..]);
            let b1 = baseline_of(&next[..5.min(w)]);
            for j in 1..=gap {
                out.push(b0 + (b1 - b0) * j as f64 / (gap + 1) as f64);
            }
            out.extend_from_slice(next);
            seams.push(Seam {
                position: n,
                start: prev_end + 1,
                end: start,
            });
            continue;
        }
        // Overlap [start, prev_end]; never touch either R sample.
        let lo = start.max(prev_r + 1);
        let hi = prev_end.min(r - 1);
        let rr = r - prev_r;
        let (mut slo, mut shi) = if rr >= gp + gn {
            (prev_r + gp, r - gn)
        } else {
            let split = prev_r + (rr as f64 * gp as f64 / (gp + gn).max(1) as f64).round() as usize;
            (split.saturating_sub(2), split + 2)
        };
        slo = slo.max(lo);
        shi = shi.min(hi);
        if slo > shi {
            (slo, shi) = (lo, hi);
        }
        let mut c = slo;
        for i in slo..=shi {
            if (out[i] - next[i - start]).abs() < (out[c] - next[c - start]).abs() {
                c = i;
            }
        }
        let h = (cfg.crossfade_max / 2).min(c - lo).min(hi + 1 - c);
        let a = c - h;
        for i in a..c + h {
            let wgt = 0.5 * (1.0 - (std::f64::consts::PI * (i - a + 1) as f64 / (2 * h + 1) as f64).cos());
            out[i] = (1.0 - wgt) * out[i] + wgt * next[i - start];
        }
        out.truncate(c + h);
        out.extend_from_slice(&next[c + h - start..]);
        seams.push(Seam {
            position: n,
            start: a,
            end: c + h,
        });
    }
    (out, seams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delineate::FeatureVector;
    use crate::signal::{BeatLabel, BeatWindow};
    use crate::store::build_store;
    use std::collections::BTreeMap;

    fn traj(rr: &[f64]) -> FeatureTrajectory<f64> {
        let rows = rr
            .iter()
            .map(|&v| FeatureVector {
                values: vec![v, 1.0],
                label: BeatLabel::Normal,
            })
            .collect();
        FeatureTrajectory::new(vec![Feature::RInt, Feature::RAmp], rows).unwrap()
    }

    fn store() -> BeatStore<f64> {
        let window = BeatWindow { pre_r: 60, post_r: 120 };
        let beats = (0..5)
            .map(|i| {
                let amp = 0.9 + 0.05 * i as f64;
                let waveform: Vec<f64> = (0..window.len())
                    .map(|t| {
                        let d = t as f64 - window.pre_r as f64;
                        amp * (-d * d / 4.0).exp() + 0.2 * (-(d - 30.0).powi(2) / 50.0).exp()
                    })
                    .collect();
                BeatRecord {
                    id: i,
                    label: BeatLabel::Normal,
                    waveform,
                    descriptors: BTreeMap::from([(Feature::RAmp, amp)]),
                }
            })
            .collect();
        build_store(beats, &[Feature::RAmp], window, 128).unwrap()
    }

    fn run(rr: &[f64]) -> AssembledSignal<f64> {
        assemble(&traj(rr), &store(), &MatchWeights::default(), MatchMode::Exhaustive, &SmoothingConfig::default(), &RandomSource::new(0)).unwrap()
    }

    #[test]
    fn two_rows_at_500ms_are_64_samples_apart() {
        let a = run(&[500.0, 500.0]);
        assert_eq!(a.r_indices[1] - a.r_indices[0], 64);
        assert_eq!(a.signal.len(), a.r_indices[1] + 121);
    }

    #[test]
    fn single_row_is_the_beat_verbatim() {
        let s = store();
        let a = run(&[800.0]);
        assert_eq!(a.signal.samples(), &s.find(a.matches[0].beat_id).unwrap().waveform[..]);
        assert!(a.seams.is_empty());
    }

    #[test]
    fn r_samples_are_preserved() {
        let s = store();
        let a = run(&[700.0, 900.0, 1600.0, 2500.0, 400.0, 800.0]);
        for (m, &r) in a.matches.iter().zip(&a.r_indices) {
            let beat = s.find(m.beat_id).unwrap();
            assert_eq!(a.signal.samples()[r], beat.waveform[60]);
        }
        // A 2500 ms interval leaves a gap, which must be bridged.
        assert!(a.seams.iter().any(|s| s.end > s.start + 100));
    }

    #[test]
    fn rounding_modes() {
        let t = traj(&[7.9, 7.9, 7.9, 7.9, 7.9]);
        let per = place_r_peaks(&t, 128, 60, RrRounding::PerInterval);
        assert!(matches!(per, Err(Error::RrTooShort { position: 0, samples: 1 })));
        let t = traj(&[23.4, 23.4, 23.4, 23.4, 23.4]);
        let per = place_r_peaks(&t, 128, 60, RrRounding::PerInterval).unwrap();
        assert_eq!(per, vec![60, 63, 66, 69, 72]);
        let cum = place_r_peaks(&t, 128, 60, RrRounding::Cumulative).unwrap();
        // 23.4 ms is 2.995 samples; cumulative rounding tracks the exact offsets.
        let exact: Vec<usize> = (0..5).map(|k| 60 + (k as f64 * 2.9952).round() as usize).collect();
        assert_eq!(cum, exact);
    }

    #[test]
    fn missing_rr_column() {
        let t = FeatureTrajectory::new(vec![Feature::RAmp], vec![FeatureVector { values: vec![1.0], label: BeatLabel::Normal }]).unwrap();
        assert!(matches!(place_r_peaks(&t, 128, 60, RrRounding::PerInterval), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn crossfade_is_capped() {
        let a: Vec<f64> = vec![0.0; 21];
        let b: Vec<f64> = vec![0.0; 21];
        let (_, seams) = concatenate(&[a, b], &[10, 20], 10, 128, &SmoothingConfig::default());
        assert!(seams[0].end - seams[0].start <= 8);
    }
}
