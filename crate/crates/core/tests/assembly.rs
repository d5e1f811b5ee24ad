mod common;

use std::sync::OnceLock;

use longbeat::assemble::{assemble, MatchWeights, SmoothingConfig};
use longbeat::delineate::{detect_r_peaks, Feature, FeatureVector};
use longbeat::feature_model::FeatureModel;
use longbeat::io::{PipelineConfig, StoreSizes};
use longbeat::pipeline::generate_store;
use longbeat::store::MatchMode;
use longbeat::{AssembledSignal, BeatLabel, BeatStore, FeatureTrajectory, RandomSource};
use proptest::prelude::*;

use common::*;

struct Fixture {
    store: BeatStore,
    trajectory: FeatureTrajectory,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = PipelineConfig {
            store_sizes: StoreSizes { normal: 3000, abnormal: 1000 },
            ..PipelineConfig::default()
        };
        let desk = desk(2000, 41);
        let store = generate_store(&desk.templates, &cfg, &RandomSource::new(42)).unwrap();
        let model = FeatureModel::fit(cfg.feature_model, &desk.segmented.trajectory).unwrap();
        let trajectory = model.sample(1000, &mut RandomSource::new(43)).unwrap();
        Fixture { store, trajectory }
    })
}

fn max_jump(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Every seam's largest step stays within the steeper neighbour's largest step plus 0.05 mV.
fn assert_seams_bounded(out: &AssembledSignal, store: &BeatStore) {
    let x = out.signal.samples();
    for seam in &out.seams {
        let k = out.r_indices.partition_point(|&r| r < seam.position);
        let neighbours = [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|i| out.matches.get(i))
            .map(|m| max_jump(&store.find(m.beat_id).unwrap().waveform))
            .fold(0.0, f64::max);
        let lo = seam.start.saturating_sub(1);
        let hi = (seam.end + 1).min(x.len() - 1);
        let jump = max_jump(&x[lo..=hi]);
        assert!(jump <= neighbours + 0.05, "seam at {} jumps {jump} vs beats {neighbours}", seam.position);
    }
}

#[test]
fn seams_are_bounded_on_a_synthetic_trajectory() {
    let f = fixture();
    for mode in [MatchMode::default(), MatchMode::Exhaustive] {
        let out = assemble(&f.trajectory, &f.store, &MatchWeights::default(), mode, &SmoothingConfig::default(), &RandomSource::new(44)).unwrap();
        assert_eq!(out.seams.len(), f.trajectory.len() - 1);
        assert_seams_bounded(&out, &f.store);
    }
}

#[test]
fn equal_inputs_give_identical_waveforms() {
    let f = fixture();
    let run = || assemble(&f.trajectory, &f.store, &MatchWeights::default(), MatchMode::default(), &SmoothingConfig::default(), &RandomSource::new(45)).unwrap();
    let (a, b) = (run(), run());
    let bits = |s: &AssembledSignal| s.signal.samples().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.matches, b.matches);
}

#[test]
fn labels_follow_the_trajectory() {
    let f = fixture();
    let out = assemble(&f.trajectory, &f.store, &MatchWeights::default(), MatchMode::default(), &SmoothingConfig::default(), &RandomSource::new(46)).unwrap();
    for (m, row) in out.matches.iter().zip(&f.trajectory.rows) {
        assert_eq!(m.label, row.label);
        assert_eq!(f.store.find(m.beat_id).unwrap().label, row.label);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random intervals from very premature to long pauses keep seams bounded
    /// and every placed R-peak detectable.
    #[test]
    fn random_rhythms(intervals in prop::collection::vec((350.0f64..2200.0, prop::bool::weighted(0.2)), 8..40), seed in 0u64..1000) {
        let f = fixture();
        let schema = f.trajectory.schema.clone();
        let template = &f.trajectory.rows[0].values;
        let rows = intervals
            .iter()
            .map(|&(rr, abnormal)| {
                let mut values = template.clone();
                values[schema.iter().position(|&s| s == Feature::RInt).unwrap()] = rr;
                FeatureVector { values, label: if abnormal { BeatLabel::Abnormal } else { BeatLabel::Normal } }
            })
            .collect();
        let traj = FeatureTrajectory::new(schema, rows).unwrap();
        let out = assemble(&traj, &f.store, &MatchWeights::default(), MatchMode::default(), &SmoothingConfig::default(), &RandomSource::new(seed)).unwrap();
        prop_assert!(out.signal.samples().iter().all(|v| v.is_finite()));
        prop_assert!(out.r_indices.windows(2).all(|w| w[0] < w[1]));
        assert_seams_bounded(&out, &f.store);
        let detected = detect_r_peaks(&out.signal).unwrap();
        for &r in &out.r_indices {
            prop_assert!(detected.iter().any(|&d| d.abs_diff(r) <= 2), "R at {} not detected", r);
        }
    }
}
