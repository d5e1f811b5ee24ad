//! The candidate beat pool queried by the matcher.

use serde::{Deserialize, Serialize};

use crate::delineate::Feature;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::{mean, variance, Scalar};
use crate::signal::{BeatLabel, BeatRecord, BeatWindow};

/// Per-feature mean and population standard deviation over the whole store,
/// in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// How the matcher draws candidates from a label partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatchMode {
    Exhaustive,
    /// Uniform draws without replacement, in batches of `batch`, at most `max`.
    Sampled { batch: usize, max: usize },
}

impl Default for MatchMode {
    fn default() -> Self {
        MatchMode::Sampled { batch: 16, max: 64 }
    }
}

impl MatchMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MatchMode::Sampled { batch, max } if batch == 0 || max == 0 => {
                Err(Error::Config("sampled mode needs batch >= 1 and max >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatStore<T> {
    schema: Vec<Feature>,
    window: BeatWindow,
    fs: u32,
    partitions: [Vec<BeatRecord<T>>; 2],
    /// Row-major descriptor matrix per partition, schema order.
    descriptors: [Vec<f64>; 2],
    stats: DescriptorStats,
}

/// Builds a store, partitioning by label while keeping input order within each label.
pub fn build_store<T: Scalar>(
    beats: Vec<BeatRecord<T>>,
    schema: &[Feature],
    window: BeatWindow,
    fs: u32,
) -> Result<BeatStore<T>> {
    if beats.is_empty() {
        return Err(Error::EmptyInput);
    }
    if schema.is_empty() {
        return Err(Error::SchemaMismatch("store schema is empty".into()));
    }
    window.validate()?;
    let mut ids = std::collections::HashSet::with_capacity(beats.len());
    let mut partitions: [Vec<BeatRecord<T>>; 2] = [Vec::new(), Vec::new()];
    let mut descriptors: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for beat in beats {
        if !ids.insert(beat.id) {
            return Err(Error::DuplicateId(beat.id));
        }
        if beat.waveform.len() != window.len() {
            return Err(Error::LengthMismatch {
                expected: window.len(),
                got: beat.waveform.len(),
            });
        }
        if beat.waveform.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("beat {} has a non-finite sample", beat.id)));
        }
        let k = beat.label.index();
        for &feature in schema {
            let v = beat.descriptor(feature).ok_or(Error::MissingDescriptor { id: beat.id, feature: feature.to_string() })?;
            descriptors[k].push(v.as_f64());
        }
        partitions[k].push(beat);
    }
    let d = schema.len();
    let mut stat_mean = Vec::with_capacity(d);
    let mut stat_std = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = descriptors.iter().flat_map(|m| m.iter().skip(j).step_by(d).copied()).collect();
        stat_mean.push(mean(&col));
        stat_std.push(variance(&col).sqrt());
    }
    Ok(BeatStore {
        schema: schema.to_vec(),
        window,
        fs,
        partitions,
        descriptors,
        stats: DescriptorStats {
            mean: stat_mean,
            std: stat_std,
        },
    })
}

impl<T: Scalar> BeatStore<T> {
    pub fn schema(&self) -> &[Feature] {
        &self.schema
    }

    pub fn window(&self) -> BeatWindow {
        self.window
    }

    pub fn fs(&self) -> u32 {
        self.fs
    }

    pub fn stats(&self) -> &DescriptorStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count(&self, label: BeatLabel) -> usize {
        self.partitions[label.index()].len()
    }

    pub fn beats(&self, label: BeatLabel) -> &[BeatRecord<T>] {
        &self.partitions[label.index()]
    }

    /// All records, normal partition first.
    pub fn records(&self) -> impl Iterator<Item = &BeatRecord<T>> {
        self.partitions.iter().flatten()
    }

    pub fn into_records(self) -> Vec<BeatRecord<T>> {
        self.partitions.into_iter().flatten().collect()
    }

    /// Descriptor row of the `i`-th beat of `label`, schema order.
    pub fn descriptor_row(&self, label: BeatLabel, i: usize) -> &[f64] {
        let d = self.schema.len();
        &self.descriptors[label.index()][i * d..(i + 1) * d]
    }

    pub fn find(&self, id: u64) -> Option<&BeatRecord<T>> {
        self.records().find(|b| b.id == id)
    }

    /// Indices into `beats(label)` in the order the mode visits them.
    pub fn candidate_indices(&self, label: BeatLabel, mode: MatchMode, rng: &mut RandomSource) -> Result<Vec<usize>> {
        mode.validate()?;
        let n = self.count(label);
        if n == 0 {
            return Err(Error::LabelEmpty(label));
        }
        Ok(match mode {
            MatchMode::Exhaustive => (0..n).collect(),
            MatchMode::Sampled { max, .. } => rand::seq::index::sample(rng, n, max.min(n)).into_vec(),
        })
    }

    /// Candidate records of `label`. Sampled mode draws from `rng`.
    pub fn candidates(
        &self,
        label: BeatLabel,
        mode: MatchMode,
        rng: &mut RandomSource,
    ) -> Result<impl Iterator<Item = &BeatRecord<T>>> {
        let idx = self.candidate_indices(label, mode, rng)?;
        let beats = self.beats(label);
        Ok(idx.into_iter().map(move |i| &beats[i]))
    }

    /// Candidates grouped into the batches of a sampled mode (one batch when exhaustive).
    pub fn candidate_batches(&self, label: BeatLabel, mode: MatchMode, rng: &mut RandomSource) -> Result<Vec<Vec<&BeatRecord<T>>>> {
        let idx = self.candidate_indices(label, mode, rng)?;
        let beats = self.beats(label);
        let batch = match mode {
            MatchMode::Exhaustive => idx.len(),
            MatchMode::Sampled { batch, .. } => batch,
        };
        Ok(idx.chunks(batch).map(|c| c.iter().map(|&i| &beats[i]).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn record(id: u64, label: BeatLabel, r_amp: f64, t_amp: f64) -> BeatRecord<f64> {
        let mut descriptors = BTreeMap::new();
        descriptors.insert(Feature::RAmp, r_amp);
        descriptors.insert(Feature::TAmp, t_amp);
        BeatRecord {
            id,
            label,
            waveform: vec![0.0; 3],
            descriptors,
        }
    }

    fn window() -> BeatWindow {
        BeatWindow { pre_r: 1, post_r: 1 }
    }

    fn schema() -> Vec<Feature> {
        vec![Feature::RAmp, Feature::TAmp]
    }

    fn big(n: u64) -> BeatStore<f64> {
        let beats = (0..n)
            .map(|i| {
                let label = if i % 3 == 0 { BeatLabel::Abnormal } else { BeatLabel::Normal };
                record(i, label, i as f64 * 0.001, 0.3)
            })
            .collect();
        build_store(beats, &schema(), window(), 128).unwrap()
    }

    #[test]
    fn stats_match_hand_arithmetic() {
        let beats = vec![record(1, BeatLabel::Normal, 1.0, 0.2), record(2, BeatLabel::Abnormal, 1.4, 0.4)];
        let s = build_store(beats, &schema(), window(), 128).unwrap();
        assert!((s.stats().mean[0] - 1.2).abs() < 1e-12);
        assert!((s.stats().std[0] - 0.2).abs() < 1e-12);
        assert!((s.stats().mean[1] - 0.3).abs() < 1e-12);
        assert!((s.stats().std[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_store::<f64>(vec![], &schema(), window(), 128), Err(Error::EmptyInput)));
        let dup = vec![record(1, BeatLabel::Normal, 1.0, 0.2), record(1, BeatLabel::Normal, 1.0, 0.2)];
        assert!(matches!(build_store(dup, &schema(), window(), 128), Err(Error::DuplicateId(1))));
        let mut missing = record(4, BeatLabel::Normal, 1.0, 0.2);
        missing.descriptors.remove(&Feature::TAmp);
        assert!(matches!(
            build_store(vec![missing], &schema(), window(), 128),
            Err(Error::MissingDescriptor { id: 4, ref feature }) if feature == "T_Amp"
        ));
    }

    #[test]
    fn rebuild_reproduces_stats_exactly() {
        let s = big(500);
        let again = build_store(s.records().cloned().collect(), &schema(), window(), 128).unwrap();
        assert_eq!(s.stats(), again.stats());
        assert_eq!(s, again);
    }

    #[test]
    fn exhaustive_yields_each_beat_once() {
        let beats = vec![
            record(7, BeatLabel::Normal, 1.0, 0.2),
            record(3, BeatLabel::Normal, 1.0, 0.2),
            record(9, BeatLabel::Normal, 1.0, 0.2),
        ];
        let s = build_store(beats, &schema(), window(), 128).unwrap();
        let ids: Vec<u64> = s.candidates(BeatLabel::Normal, MatchMode::Exhaustive, &mut RandomSource::new(0)).unwrap().map(|b| b.id).collect();
        assert_eq!(ids, vec![7, 3, 9]);
        assert!(matches!(
            s.candidates(BeatLabel::Abnormal, MatchMode::Exhaustive, &mut RandomSource::new(0)).map(|_| ()),
            Err(Error::LabelEmpty(BeatLabel::Abnormal))
        ));
    }

    #[test]
    fn sampled_is_distinct_and_reproducible() {
        let s = big(10_000);
        let mode = MatchMode::Sampled { batch: 10, max: 10 };
        let draw = |seed| -> Vec<u64> { s.candidates(BeatLabel::Normal, mode, &mut RandomSource::new(seed)).unwrap().map(|b| b.id).collect() };
        let a = draw(4);
        assert_eq!(a.len(), 10);
        assert_eq!(a.iter().collect::<BTreeSet<_>>().len(), 10);
        assert_eq!(a, draw(4));
        assert_ne!(a, draw(5));
    }

    #[test]
    fn sampled_beyond_size_is_a_permutation() {
        let s = big(200);
        let mode = MatchMode::Sampled { batch: 16, max: 1000 };
        let got: BTreeSet<u64> = s.candidates(BeatLabel::Abnormal, mode, &mut RandomSource::new(1)).unwrap().map(|b| b.id).collect();
        let want: BTreeSet<u64> = s.beats(BeatLabel::Abnormal).iter().map(|b| b.id).collect();
        assert_eq!(got, want);
        let batches = s.candidate_batches(BeatLabel::Abnormal, mode, &mut RandomSource::new(1)).unwrap();
        assert!(batches.iter().all(|b| b.len() <= 16));
        assert_eq!(batches.iter().map(Vec::len).sum::<usize>(), want.len());
    }

    #[test]
    fn partitions_are_disjoint_and_complete() {
        let s = big(300);
        let n: BTreeSet<u64> = s.beats(BeatLabel::Normal).iter().map(|b| b.id).collect();
        let a: BTreeSet<u64> = s.beats(BeatLabel::Abnormal).iter().map(|b| b.id).collect();
        assert!(n.is_disjoint(&a));
        assert_eq!(n.len() + a.len(), 300);
    }
}
