//! Weighted nearest-descriptor matching of target feature rows to stored beats.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::delineate::{Feature, FeatureVector};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::BeatLabel;
use crate::store::{BeatStore, MatchMode};

/// Per-feature cost weights. Features without an explicit entry get `default_weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchWeights {
    pub default_weight: f64,
    pub weights: BTreeMap<Feature, f64>,
    /// Compare z-scores under the store's descriptor statistics.
    pub standardize: bool,
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self {
            default_weight: 1.0,
            weights: BTreeMap::new(),
            standardize: true,
        }
    }
}

impl MatchWeights {
    /// Weight 1 on `feature`, 0 elsewhere.
    pub fn only(feature: Feature, standardize: bool) -> Self {
        Self {
            default_weight: 0.0,
            weights: BTreeMap::from([(feature, 1.0)]),
            standardize,
        }
    }

    pub fn weight(&self, feature: Feature) -> f64 {
        self.weights.get(&feature).copied().unwrap_or(self.default_weight)
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            default_weight: self.default_weight * factor,
            weights: self.weights.iter().map(|(&f, &w)| (f, w * factor)).collect(),
            standardize: self.standardize,
        }
    }
}

/// Outcome of matching one target row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRecord {
    pub position: usize,
    pub label: BeatLabel,
    pub target: BTreeMap<Feature, f64>,
    pub beat_id: u64,
    /// Descriptors of the chosen beat.
    pub chosen: BTreeMap<Feature, f64>,
    pub cost: f64,
    pub abs_diff: BTreeMap<Feature, f64>,
    pub candidates_evaluated: usize,
}

struct Term {
    store_col: usize,
    target_col: usize,
    weight: f64,
    scale: f64,
}

/// Matching plan binding a store to a target schema.
pub struct Matcher<'a, T> {
    store: &'a BeatStore<T>,
    terms: Vec<Term>,
    /// (store column, target column) of every shared feature, for reporting.
    shared: Vec<(usize, usize)>,
}

impl<'a, T: Scalar> Matcher<'a, T> {
    pub fn new(store: &'a BeatStore<T>, target_schema: &[Feature], weights: &MatchWeights) -> Result<Self> {
        let mut terms = Vec::new();
        let mut shared = Vec::new();
        for (j, &feature) in store.schema().iter().enumerate() {
            let w = weights.weight(feature);
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeights(format!("weight {w} for {feature}")));
            }
            let target_col = target_schema.iter().position(|&f| f == feature);
            if let Some(t) = target_col {
                shared.push((j, t));
            }
            if w == 0.0 {
                continue;
            }
            let target_col = target_col.ok_or_else(|| Error::SchemaMismatch(format!("target rows lack weighted store feature {feature}")))?;
            let std = store.stats().std[j];
            let scale = if weights.standardize && std > 0.0 { std } else { 1.0 };
            terms.push(Term {
                store_col: j,
                target_col,
                weight: w,
                scale,
            });
        }
        if terms.is_empty() {
            return Err(Error::InvalidWeights("no feature has a positive weight".into()));
        }
        Ok(Self { store, terms, shared })
    }

    /// Cost of store row `desc` against the target row.
    pub fn cost(&self, target: &[f64], desc: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let d = (target[t.target_col] - desc[t.store_col]) / t.scale;
                t.weight * d * d
            })
            .sum()
    }

    pub fn match_row(&self, position: usize, row: &FeatureVector<T>, mode: MatchMode, rng: &mut RandomSource) -> Result<MatchRecord> {
        let label = row.label;
        let target: Vec<f64> = row.values.iter().map(|v| v.as_f64()).collect();
        let idx = self.store.candidate_indices(label, mode, rng)?;
        let beats = self.store.beats(label);
        let mut best: Option<(f64, u64, usize)> = None;
        for &i in &idx {
            let c = self.cost(&target, self.store.descriptor_row(label, i));
            let id = beats[i].id;
            let better = match best {
                None => true,
                Some((bc, bid, _)) => c < bc || (c == bc && id < bid),
            };
            if better {
                best = Some((c, id, i));
            }
        }
        let (cost, beat_id, i) = best.ok_or(Error::LabelEmpty(label))?;
        let schema = self.store.schema();
        let desc = self.store.descriptor_row(label, i);
        let tschema: Vec<Feature> = self.shared.iter().map(|&(j, _)| schema[j]).collect();
        Ok(MatchRecord {
            position,
            label,
            target: self.shared.iter().zip(&tschema).map(|(&(_, t), &f)| (f, target[t])).collect(),
            beat_id,
            chosen: self.shared.iter().zip(&tschema).map(|(&(j, _), &f)| (f, desc[j])).collect(),
            cost,
            abs_diff: self.shared.iter().zip(&tschema).map(|(&(j, t), &f)| (f, (target[t] - desc[j]).abs())).collect(),
            candidates_evaluated: idx.len(),
        })
    }

    /// Index into `store.beats(label)` of the chosen beat.
    pub fn chosen_index(&self, record: &MatchRecord) -> Option<usize> {
        self.store.beats(record.label).iter().position(|b| b.id == record.beat_id)
    }
}

/// Matches one target row; see [`Matcher`] for repeated use.
pub fn match_beat<T: Scalar>(
    row: &FeatureVector<T>,
    target_schema: &[Feature],
    store: &BeatStore<T>,
    weights: &MatchWeights,
    mode: MatchMode,
    rng: &mut RandomSource,
) -> Result<MatchRecord> {
    Matcher::new(store, target_schema, weights)?.match_row(0, row, mode, rng)
}

/// Histogram of per-match absolute differences of `feature` over `[edges[i], edges[i+1])`;
/// values at or above the last edge are counted in `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchHistogram {
    pub feature: Feature,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub overflow: usize,
}

/// Edges of 0.01 mV up to 0.07 mV.
pub fn default_amplitude_edges() -> Vec<f64> {
    (0..=7).map(|i| i as f64 / 100.0).collect()
}

pub fn match_histogram(matches: &[MatchRecord], feature: Feature, edges: &[f64]) -> Result<MatchHistogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("histogram edges must be strictly increasing, at least two".into()));
    }
    let mut counts = vec![0; edges.len() - 1];
    let mut overflow = 0;
    for m in matches {
        let d = *m.abs_diff.get(&feature).ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
        if d >= edges[edges.len() - 1] {
            overflow += 1;
        } else {
            // Values below the first edge land in the first bin.
            let bin = edges[1..].iter().position(|&e| d < e).unwrap_or(0);
            counts[bin] += 1;
        }
    }
    Ok(MatchHistogram {
        feature,
        edges: edges.to_vec(),
        counts,
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{BeatRecord, BeatWindow};
    use crate::store::build_store;
    use proptest::prelude::*;

    fn store_of(rows: &[(u64, f64, f64)]) -> BeatStore<f64> {
        let beats = rows
            .iter()
            .map(|&(id, a, b)| BeatRecord {
                id,
                label: BeatLabel::Normal,
                waveform: vec![0.0; 3],
                descriptors: BTreeMap::from([(Feature::RAmp, a), (Feature::TAmp, b)]),
            })
            .collect();
        build_store(beats, &[Feature::RAmp, Feature::TAmp], BeatWindow { pre_r: 1, post_r: 1 }, 128).unwrap()
    }

    fn row(a: f64, b: f64) -> FeatureVector<f64> {
        FeatureVector {
            values: vec![a, b],
            label: BeatLabel::Normal,
        }
    }

    const SCHEMA: [Feature; 2] = [Feature::RAmp, Feature::TAmp];

    fn raw() -> MatchWeights {
        MatchWeights {
            standardize: false,
            ..Default::default()
        }
    }

    #[test]
    fn hand_computed_costs() {
        let store = store_of(&[(0, 0.8, 0.4), (1, 1.1, 0.45), (2, 0.5, 0.6)]);
        let m = Matcher::new(&store, &SCHEMA, &raw()).unwrap();
        let target = [1.0, 0.5];
        let costs: Vec<f64> = (0..3).map(|i| m.cost(&target, store.descriptor_row(BeatLabel::Normal, i))).collect();
        for (c, want) in costs.iter().zip([0.05, 0.0125, 0.26]) {
            assert!((c - want).abs() < 1e-12, "{c} vs {want}");
        }
        let rec = match_beat(&row(1.0, 0.5), &SCHEMA, &store, &raw(), MatchMode::Exhaustive, &mut RandomSource::new(0)).unwrap();
        assert_eq!(rec.beat_id, 1);
        assert!((rec.cost - 0.0125).abs() < 1e-12);
        assert_eq!(rec.candidates_evaluated, 3);
        assert!((rec.abs_diff[&Feature::RAmp] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exact_descriptor_wins_with_zero_cost() {
        let store = store_of(&[(0, 0.8, 0.4), (1, 1.0, 0.5), (2, 0.5, 0.6)]);
        let rec = match_beat(&row(1.0, 0.5), &SCHEMA, &store, &MatchWeights::default(), MatchMode::Exhaustive, &mut RandomSource::new(0)).unwrap();
        assert_eq!((rec.beat_id, rec.cost), (1, 0.0));
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let store = store_of(&[(9, 1.2, 0.5), (4, 0.8, 0.5)]);
        let rec = match_beat(&row(1.0, 0.5), &SCHEMA, &store, &raw(), MatchMode::Exhaustive, &mut RandomSource::new(0)).unwrap();
        assert_eq!(rec.beat_id, 4);
    }

    #[test]
    fn errors() {
        let store = store_of(&[(0, 0.8, 0.4)]);
        let abnormal = FeatureVector {
            values: vec![1.0, 0.5],
            label: BeatLabel::Abnormal,
        };
        assert!(matches!(
            match_beat(&abnormal, &SCHEMA, &store, &raw(), MatchMode::Exhaustive, &mut RandomSource::new(0)),
            Err(Error::LabelEmpty(BeatLabel::Abnormal))
        ));
        assert!(matches!(Matcher::new(&store, &[Feature::RAmp], &raw()), Err(Error::SchemaMismatch(_))));
        assert!(Matcher::new(&store, &[Feature::RAmp], &MatchWeights::only(Feature::RAmp, false)).is_ok());
        let zero = MatchWeights { default_weight: 0.0, ..raw() };
        assert!(matches!(Matcher::new(&store, &SCHEMA, &zero), Err(Error::InvalidWeights(_))));
    }

    fn record_with(diff: f64) -> MatchRecord {
        MatchRecord {
            position: 0,
            label: BeatLabel::Normal,
            target: BTreeMap::new(),
            beat_id: 0,
            chosen: BTreeMap::new(),
            cost: 0.0,
            abs_diff: BTreeMap::from([(Feature::RAmp, diff)]),
            candidates_evaluated: 1,
        }
    }

    #[test]
    fn histogram_examples() {
        let edges = default_amplitude_edges();
        let h = match_histogram(&[record_with(0.005), record_with(0.015), record_with(0.095)], Feature::RAmp, &edges).unwrap();
        assert_eq!(h.counts, vec![1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(h.overflow, 1);
        let h = match_histogram(&[record_with(0.0), record_with(0.0)], Feature::RAmp, &edges).unwrap();
        assert_eq!(h.counts[0], 2);
        let h = match_histogram(&[], Feature::RAmp, &edges).unwrap();
        assert_eq!((h.counts.iter().sum::<usize>(), h.overflow), (0, 0));
        assert!(matches!(match_histogram(&[record_with(0.0)], Feature::TAmp, &edges), Err(Error::UnknownFeature(_))));
    }

    proptest! {
        #[test]
        fn histogram_counts_every_match(diffs in proptest::collection::vec(0.0f64..0.2, 0..50)) {
            let recs: Vec<MatchRecord> = diffs.iter().map(|&d| record_with(d)).collect();
            let h = match_histogram(&recs, Feature::RAmp, &default_amplitude_edges()).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<usize>() + h.overflow, recs.len());
        }

        #[test]
        fn weight_scaling_keeps_choice(
            rows in proptest::collection::vec((0.0f64..2.0, 0.0f64..1.0), 2..60),
            target in (0.0f64..2.0, 0.0f64..1.0),
            w in (0.01f64..5.0, 0.01f64..5.0),
            factor in 0.01f64..100.0,
            standardize in any::<bool>(),
        ) {
            let rows: Vec<(u64, f64, f64)> = rows.iter().enumerate().map(|(i, &(a, b))| (i as u64, a, b)).collect();
            let store = store_of(&rows);
            let weights = MatchWeights { default_weight: 0.0, weights: BTreeMap::from([(Feature::RAmp, w.0), (Feature::TAmp, w.1)]), standardize };
            let pick = |wts: &MatchWeights| match_beat(&row(target.0, target.1), &SCHEMA, &store, wts, MatchMode::Exhaustive, &mut RandomSource::new(0)).unwrap().beat_id;
            prop_assert_eq!(pick(&weights), pick(&weights.scaled(factor)));
        }
    }
}
