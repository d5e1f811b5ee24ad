//! Small deterministic binary classifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::BeatLabel;

pub const ITERATIONS: usize = 500;
pub const LEARNING_RATE: f64 = 0.1;
pub const MAX_DEPTH: usize = 8;
pub const MIN_LEAF: usize = 5;
const SVM_L2: f64 = 1e-3;
const MIN_TRAIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianNaiveBayes,
    LogisticRegression,
    DecisionTree,
    LinearSvm,
}

/// A classifier kind plus class-frequency balancing (used by the linear models only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub balanced: bool,
}

impl ClassifierSpec {
    pub const fn plain(kind: ClassifierKind) -> Self {
        Self { kind, balanced: false }
    }

    pub const fn balanced(kind: ClassifierKind) -> Self {
        Self { kind, balanced: true }
    }

    pub fn name(&self) -> &'static str {
        match (self.kind, self.balanced) {
            (ClassifierKind::GaussianNaiveBayes, _) => "naive_bayes",
            (ClassifierKind::DecisionTree, _) => "decision_tree",
            (ClassifierKind::LogisticRegression, false) => "logistic_regression",
            (ClassifierKind::LogisticRegression, true) => "balanced_logistic_regression",
            (ClassifierKind::LinearSvm, false) => "svm",
            (ClassifierKind::LinearSvm, true) => "balanced_svm",
        }
    }

    /// The default roster.
    pub fn all() -> Vec<ClassifierSpec> {
        vec![
            Self::plain(ClassifierKind::GaussianNaiveBayes),
            Self::plain(ClassifierKind::LogisticRegression),
            Self::plain(ClassifierKind::DecisionTree),
            Self::plain(ClassifierKind::LinearSvm),
            Self::balanced(ClassifierKind::LinearSvm),
        ]
    }

    /// Parses a comma-separated list of names, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<ClassifierSpec>> {
        if s.trim() == "all" {
            return Ok(Self::all());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ClassifierKind::*;
        Ok(match s {
            "naive_bayes" | "nb" => Self::plain(GaussianNaiveBayes),
            "logistic_regression" | "lr" => Self::plain(LogisticRegression),
            "balanced_logistic_regression" => Self::balanced(LogisticRegression),
            "decision_tree" | "dt" => Self::plain(DecisionTree),
            "svm" => Self::plain(LinearSvm),
            "balanced_svm" => Self::balanced(LinearSvm),
            other => return Err(Error::Config(format!("unknown classifier {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let s = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(BeatLabel),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    NaiveBayes {
        /// Per class (normal, abnormal): log prior, means, variances.
        log_prior: [f64; 2],
        mean: [Vec<f64>; 2],
        var: [Vec<f64>; 2],
    },
    /// Linear score `w . z + b` on standardized inputs; positive means abnormal.
    Linear {
        scaler: Standardizer,
        weights: Vec<f64>,
        bias: f64,
    },
    Tree(Node),
}

impl Classifier {
    pub fn predict(&self, row: &[f64]) -> BeatLabel {
        match self {
            Classifier::NaiveBayes { log_prior, mean, var } => {
                let score = |k: usize| {
                    log_prior[k]
                        - 0.5
                            * row
                                .iter()
                                .zip(&mean[k])
                                .zip(&var[k])
                                .map(|((x, m), v)| (x - m).powi(2) / v + (2.0 * std::f64::consts::PI * v).ln())
                                .sum::<f64>()
                };
                if score(1) > score(0) {
                    BeatLabel::Abnormal
                } else {
                    BeatLabel::Normal
                }
            }
            Classifier::Linear { scaler, weights, bias } => {
                let z = scaler.apply(row);
                let s: f64 = z.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias;
                if s > 0.0 {
                    BeatLabel::Abnormal
                } else {
                    BeatLabel::Normal
                }
            }
            Classifier::Tree(node) => {
                let mut node = node;
                loop {
                    match node {
                        Node::Leaf(l) => return *l,
                        Node::Split { feature, threshold, left, right } => {
                            node = if row[*feature] <= *threshold { left } else { right };
                        }
                    }
                }
            }
        }
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<BeatLabel> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Trains one classifier. Needs both classes and at least 10 rows.
pub fn train(spec: ClassifierSpec, data: &LabeledDataset, seed: u64) -> Result<Classifier> {
    if data.len() < MIN_TRAIN_ROWS {
        return Err(Error::TooFewRows {
            have: data.len(),
            need: MIN_TRAIN_ROWS,
        });
    }
    let counts = data.class_counts();
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::SingleClass);
    }
    let mut rng = RandomSource::new(seed);
    Ok(match spec.kind {
        ClassifierKind::GaussianNaiveBayes => naive_bayes(data, counts),
        ClassifierKind::LogisticRegression => linear(data, counts, spec.balanced, &mut rng, Loss::Logistic),
        ClassifierKind::LinearSvm => linear(data, counts, spec.balanced, &mut rng, Loss::Hinge),
        ClassifierKind::DecisionTree => {
            let idx: Vec<usize> = (0..data.len()).collect();
            Classifier::Tree(grow(data, &idx, 0))
        }
    })
}

fn naive_bayes(data: &LabeledDataset, counts: [usize; 2]) -> Classifier {
    let d = data.dim();
    let n = data.len() as f64;
    let mut mean = [vec![0.0; d], vec![0.0; d]];
    let mut var = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in data.rows.iter().zip(&data.labels) {
        let k = label.index();
        for j in 0..d {
            mean[k][j] += row[j];
        }
    }
    for k in 0..2 {
        mean[k].iter_mut().for_each(|m| *m /= counts[k] as f64);
    }
    for (row, label) in data.rows.iter().zip(&data.labels) {
        let k = label.index();
        for j in 0..d {
            var[k][j] += (row[j] - mean[k][j]).powi(2);
        }
    }
    let mut max_var: f64 = 0.0;
    for k in 0..2 {
        var[k].iter_mut().for_each(|v| *v /= counts[k] as f64);
        max_var = var[k].iter().cloned().fold(max_var, f64::max);
    }
    // Variance floor keeps constant features from producing infinities.
    let floor = 1e-9 * max_var.max(1e-12);
    for v in var.iter_mut().flatten() {
        *v += floor;
    }
    Classifier::NaiveBayes {
        log_prior: [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()],
        mean,
        var,
    }
}

#[derive(Clone, Copy)]
enum Loss {
    Logistic,
    Hinge,
}

fn linear(data: &LabeledDataset, counts: [usize; 2], balanced: bool, rng: &mut RandomSource, loss: Loss) -> Classifier {
    let scaler = Standardizer::fit(&data.rows);
    let z: Vec<Vec<f64>> = data.rows.iter().map(|r| scaler.apply(r)).collect();
    let n = data.len();
    let d = data.dim();
    let class_weight = |k: usize| if balanced { n as f64 / (2.0 * counts[k] as f64) } else { 1.0 };
    let cw = [class_weight(0), class_weight(1)];
    let mut w: Vec<f64> = (0..d).map(|_| 0.01 * rng.standard_normal()).collect();
    let mut b = 0.0;
    let mut grad = vec![0.0; d];
    for _ in 0..ITERATIONS {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for (x, label) in z.iter().zip(&data.labels) {
            let k = label.index();
            let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
            let coef = match loss {
                Loss::Logistic => {
                    let y = k as f64;
                    cw[k] * (1.0 / (1.0 + (-s).exp()) - y)
                }
                Loss::Hinge => {
                    let y = if k == 1 { 1.0 } else { -1.0 };
                    if y * s < 1.0 {
                        -cw[k] * y
                    } else {
                        0.0
                    }
                }
            };
            if coef != 0.0 {
                for (g, xi) in grad.iter_mut().zip(x) {
                    *g += coef * xi;
                }
                gb += coef;
            }
        }
        let reg = match loss {
            Loss::Logistic => 0.0,
            Loss::Hinge => SVM_L2,
        };
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= LEARNING_RATE * (g / n as f64 + reg * *wi);
        }
        b -= LEARNING_RATE * gb / n as f64;
    }
    Classifier::Linear { scaler, weights: w, bias: b }
}

fn majority(data: &LabeledDataset, idx: &[usize]) -> BeatLabel {
    let abnormal = idx.iter().filter(|&&i| data.labels[i] == BeatLabel::Abnormal).count();
    if 2 * abnormal > idx.len() {
        BeatLabel::Abnormal
    } else {
        BeatLabel::Normal
    }
}

fn gini(abnormal: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = abnormal as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn grow(data: &LabeledDataset, idx: &[usize], depth: usize) -> Node {
    let total_abn = idx.iter().filter(|&&i| data.labels[i] == BeatLabel::Abnormal).count();
    if depth >= MAX_DEPTH || idx.len() < 2 * MIN_LEAF || total_abn == 0 || total_abn == idx.len() {
        return Node::Leaf(majority(data, idx));
    }
    let parent = gini(total_abn, idx.len());
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted = idx.to_vec();
    for j in 0..data.dim() {
        sorted.sort_by(|&a, &b| data.rows[a][j].total_cmp(&data.rows[b][j]).then(a.cmp(&b)));
        let mut left_abn = 0;
        for s in 1..sorted.len() {
            if data.labels[sorted[s - 1]] == BeatLabel::Abnormal {
                left_abn += 1;
            }
            let (lo, hi) = (data.rows[sorted[s - 1]][j], data.rows[sorted[s]][j]);
            if lo == hi || s < MIN_LEAF || sorted.len() - s < MIN_LEAF {
                continue;
            }
            let nl = s;
            let nr = sorted.len() - s;
            let impurity = (nl as f64 * gini(left_abn, nl) + nr as f64 * gini(total_abn - left_abn, nr)) / sorted.len() as f64;
            if best.is_none_or(|(b, _, _)| impurity < b) {
                best = Some((impurity, j, 0.5 * (lo + hi)));
            }
        }
    }
    match best {
        Some((impurity, feature, threshold)) if impurity < parent => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data.rows[i][feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow(data, &l, depth + 1)),
                right: Box::new(grow(data, &r, depth + 1)),
            }
        }
        _ => Node::Leaf(majority(data, idx)),
    }
}
