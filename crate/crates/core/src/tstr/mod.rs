//! Train-on-synthetic / test-on-real evaluation.

mod classifier;
mod report;

pub use classifier::{train, Classifier, ClassifierKind, ClassifierSpec, Node, Standardizer, ITERATIONS, LEARNING_RATE, MAX_DEPTH, MIN_LEAF};
pub use report::{ClassMetrics, ClassReport, Confusion};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delineate::FeatureTrajectory;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::{BeatLabel, BeatRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<BeatLabel>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<BeatLabel>, provenance: Provenance) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        if let Some(first) = rows.first() {
            if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
                return Err(Error::LengthMismatch {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("dataset contains a non-finite value".into()));
        }
        Ok(Self { rows, labels, provenance })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Row counts of (normal, abnormal).
    pub fn class_counts(&self) -> [usize; 2] {
        let abnormal = self.labels.iter().filter(|l| **l == BeatLabel::Abnormal).count();
        [self.len() - abnormal, abnormal]
    }

    /// Both classes present, so the set can train a classifier.
    pub fn is_trainable(&self) -> bool {
        self.class_counts().iter().all(|&c| c > 0)
    }

    /// Share of the most frequent class.
    pub fn majority_rate(&self) -> f64 {
        let c = self.class_counts();
        c[0].max(c[1]) as f64 / self.len().max(1) as f64
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Same rows with labels permuted by `rng`.
    pub fn shuffled_labels(&self, rng: &mut RandomSource) -> Self {
        use rand::seq::SliceRandom;
        let mut labels = self.labels.clone();
        labels.shuffle(rng);
        Self { labels, ..self.clone() }
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            provenance: self.provenance,
        }
    }

    /// Stratified split: each class is shuffled and its first `fraction` goes to the
    /// first part. Rows keep their original relative order within each part.
    pub fn split(&self, fraction: f64, rng: &mut RandomSource) -> Result<(Self, Self)> {
        use rand::seq::SliceRandom;
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Config(format!("split fraction {fraction} outside (0, 1)")));
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        for label in BeatLabel::ALL {
            let mut idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == label).collect();
            idx.shuffle(rng);
            let cut = (idx.len() as f64 * fraction).round() as usize;
            first.extend_from_slice(&idx[..cut]);
            second.extend_from_slice(&idx[cut..]);
        }
        first.sort_unstable();
        second.sort_unstable();
        Ok((self.subset(&first), self.subset(&second)))
    }
}

/// How a multi-beat window inherits a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelingRule {
    /// Abnormal when any member beat is abnormal.
    #[default]
    AnyAbnormal,
    /// Abnormal when more than half the member beats are.
    Majority,
}

impl LabelingRule {
    pub fn apply(self, labels: &[BeatLabel]) -> BeatLabel {
        let abnormal = labels.iter().filter(|l| **l == BeatLabel::Abnormal).count();
        let hit = match self {
            LabelingRule::AnyAbnormal => abnormal > 0,
            LabelingRule::Majority => 2 * abnormal > labels.len(),
        };
        if hit {
            BeatLabel::Abnormal
        } else {
            BeatLabel::Normal
        }
    }
}

/// Non-overlapping windows of `window_beats` consecutive rows, each flattened to one
/// feature vector. A trailing partial window is dropped.
pub fn windows_to_dataset<T: Scalar>(
    trajectory: &FeatureTrajectory<T>,
    window_beats: usize,
    rule: LabelingRule,
    provenance: Provenance,
) -> Result<LabeledDataset> {
    if window_beats == 0 {
        return Err(Error::Config("window must hold at least one beat".into()));
    }
    if trajectory.len() < window_beats {
        return Err(Error::TooFewBeats {
            have: trajectory.len(),
            need: window_beats,
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for chunk in trajectory.rows.chunks_exact(window_beats) {
        rows.push(chunk.iter().flat_map(|r| r.values.iter().map(|v| v.as_f64())).collect());
        let member: Vec<BeatLabel> = chunk.iter().map(|r| r.label).collect();
        labels.push(rule.apply(&member));
    }
    LabeledDataset::new(rows, labels, provenance)
}

/// One row per beat, the raw waveform as features.
pub fn beats_to_dataset<T: Scalar>(beats: &[BeatRecord<T>], provenance: Provenance) -> Result<LabeledDataset> {
    LabeledDataset::new(
        beats.iter().map(|b| b.waveform.iter().map(|v| v.as_f64()).collect()).collect(),
        beats.iter().map(|b| b.label).collect(),
        provenance,
    )
}

pub fn evaluate(model: &Classifier, test: &LabeledDataset) -> Result<ClassReport> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let predicted = model.predict_all(&test.rows);
    ClassReport::from_confusion(Confusion::from_predictions(&test.labels, &predicted)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "TSTR")]
    Tstr,
    #[serde(rename = "TRTR")]
    Trtr,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Tstr => "TSTR",
            Protocol::Trtr => "TRTR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TstrRow {
    pub classifier: ClassifierSpec,
    pub protocol: Protocol,
    pub report: ClassReport,
}

/// Trains every classifier on `synth_train` (TSTR) and on `real_train` (TRTR) and
/// evaluates both on `real_test`. Rows come in classifier order, TSTR before TRTR.
pub fn tstr_protocol(
    synth_train: &LabeledDataset,
    real_train: &LabeledDataset,
    real_test: &LabeledDataset,
    classifiers: &[ClassifierSpec],
    seed: u64,
) -> Result<Vec<TstrRow>> {
    if real_test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    for d in [synth_train, real_train] {
        if d.dim() != real_test.dim() {
            return Err(Error::LengthMismatch {
                expected: real_test.dim(),
                got: d.dim(),
            });
        }
    }
    let jobs: Vec<(ClassifierSpec, Protocol)> = classifiers.iter().flat_map(|&c| [(c, Protocol::Tstr), (c, Protocol::Trtr)]).collect();
    jobs.par_iter()
        .map(|&(classifier, protocol)| {
            let train_set = match protocol {
                Protocol::Tstr => synth_train,
                Protocol::Trtr => real_train,
            };
            let model = train(classifier, train_set, seed)?;
            Ok(TstrRow {
                classifier,
                protocol,
                report: evaluate(&model, real_test)?,
            })
        })
        .collect()
}
