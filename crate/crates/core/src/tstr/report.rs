//! Binary confusion matrices and the per-class report built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::BeatLabel;

/// Binary confusion matrix with `Abnormal` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_predictions(truth: &[BeatLabel], predicted: &[BeatLabel]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::LengthMismatch {
                expected: truth.len(),
                got: predicted.len(),
            });
        }
        let mut c = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (BeatLabel::Abnormal, BeatLabel::Abnormal) => c.tp += 1,
                (BeatLabel::Abnormal, BeatLabel::Normal) => c.fn_ += 1,
                (BeatLabel::Normal, BeatLabel::Abnormal) => c.fp += 1,
                (BeatLabel::Normal, BeatLabel::Normal) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn trace(&self) -> u64 {
        self.tp + self.tn
    }

    /// Rows with true label `label`.
    pub fn support(&self, label: BeatLabel) -> u64 {
        match label {
            BeatLabel::Abnormal => self.tp + self.fn_,
            BeatLabel::Normal => self.tn + self.fp,
        }
    }

    /// Correct predictions of `label`.
    pub fn hits(&self, label: BeatLabel) -> u64 {
        match label {
            BeatLabel::Abnormal => self.tp,
            BeatLabel::Normal => self.tn,
        }
    }

    /// Rows predicted as `label`.
    pub fn predicted(&self, label: BeatLabel) -> u64 {
        match label {
            BeatLabel::Abnormal => self.tp + self.fp,
            BeatLabel::Normal => self.tn + self.fn_,
        }
    }

    /// Matthews correlation; 0 when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, fn_, fp, tn) = (self.tp as f64, self.fn_ as f64, self.fp as f64, self.tn as f64);
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fn_) / denom.sqrt()
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    /// Share of this class classified correctly; identical to `recall`.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub confusion: Confusion,
    pub overall_accuracy: f64,
    pub normal: ClassMetrics,
    pub abnormal: ClassMetrics,
    pub mcc: f64,
}

impl ClassReport {
    pub fn from_confusion(confusion: Confusion) -> Result<Self> {
        if confusion.total() == 0 {
            return Err(Error::EmptyTestSet);
        }
        let class = |label| {
            let precision = ratio(confusion.hits(label), confusion.predicted(label));
            let recall = ratio(confusion.hits(label), confusion.support(label));
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                accuracy: recall,
                precision,
                recall,
                f1,
            }
        };
        Ok(Self {
            confusion,
            overall_accuracy: ratio(confusion.trace(), confusion.total()),
            normal: class(BeatLabel::Normal),
            abnormal: class(BeatLabel::Abnormal),
            mcc: confusion.mcc(),
        })
    }

    pub fn class(&self, label: BeatLabel) -> &ClassMetrics {
        match label {
            BeatLabel::Normal => &self.normal,
            BeatLabel::Abnormal => &self.abnormal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_example() {
        let r = ClassReport::from_confusion(Confusion { tp: 4, fn_: 1, fp: 2, tn: 3 }).unwrap();
        assert!((r.abnormal.precision - 4.0 / 6.0).abs() < 1e-12);
        assert!((r.abnormal.recall - 0.8).abs() < 1e-12);
        assert!((r.abnormal.f1 - 0.7273).abs() < 1e-4);
        assert!((r.mcc - 0.4082).abs() < 1e-4);
        assert!((r.overall_accuracy - 0.7).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_constant() {
        let r = ClassReport::from_confusion(Confusion { tp: 5, fn_: 0, fp: 0, tn: 5 }).unwrap();
        for m in [r.normal, r.abnormal] {
            assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        }
        assert_eq!(r.mcc, 1.0);
        let r = ClassReport::from_confusion(Confusion { tp: 0, fn_: 5, fp: 0, tn: 5 }).unwrap();
        assert_eq!(r.mcc, 0.0);
        assert!(matches!(ClassReport::from_confusion(Confusion::default()), Err(Error::EmptyTestSet)));
    }

    proptest! {
        #[test]
        fn identities_and_ranges(tp in 0u64..50, fn_ in 0u64..50, fp in 0u64..50, tn in 0u64..50) {
            prop_assume!(tp + fn_ + fp + tn > 0);
            let c = Confusion { tp, fn_, fp, tn };
            let r = ClassReport::from_confusion(c).unwrap();
            let hits = r.normal.recall * c.support(BeatLabel::Normal) as f64 + r.abnormal.recall * c.support(BeatLabel::Abnormal) as f64;
            prop_assert!((hits - c.trace() as f64).abs() < 1e-9);
            prop_assert_eq!(r.overall_accuracy, c.trace() as f64 / c.total() as f64);
            for m in [r.normal, r.abnormal] {
                prop_assert_eq!(m.accuracy, m.recall);
                for v in [m.precision, m.recall, m.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            prop_assert!((-1.0..=1.0).contains(&r.mcc));
        }
    }
}
