mod common;

use longbeat::assemble::{assemble, MatchWeights, SmoothingConfig};
use longbeat::beat_synth::BeatTemplateModel;
use longbeat::delineate::detect_r_peaks;
use longbeat::feature_model::FeatureModel;
use longbeat::io::{self, PipelineConfig, StoreSizes};
use longbeat::pipeline::{self, MatchReport};
use longbeat::store::{build_store, MatchMode};
use longbeat::{BeatRecordF32, BeatStore, BeatStoreF32, FeatureTrajectory, FeatureTrajectoryF32, RandomSource};

use common::*;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

#[test]
fn pipeline_artifacts_reload_unchanged() {
    let cfg = PipelineConfig {
        seed: 61,
        store_sizes: StoreSizes { normal: 200, abnormal: 100 },
        synth_beats: 150,
        ..PipelineConfig::default()
    };
    let ecg = reference(500, 62);
    let out = pipeline::run(&ecg.signal, &annotations(&ecg), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    out.write(d).unwrap();

    let model: FeatureModel = io::read_json(d.join("model.json")).unwrap();
    assert_eq!(model, out.feature_model);
    let templates: Vec<BeatTemplateModel> = io::read_json(d.join("templates.json")).unwrap();
    assert_eq!(templates, out.templates);
    let report: MatchReport = io::read_json(d.join("matches.json")).unwrap();
    assert_eq!(report, out.match_report);

    let trajectory: FeatureTrajectory = io::read_features_csv(d.join("trajectory.csv")).unwrap();
    assert_eq!(trajectory.schema, out.synth_trajectory.schema);
    assert_eq!(trajectory.labels(), out.synth_trajectory.labels());
    for (a, b) in trajectory.rows.iter().zip(&out.synth_trajectory.rows) {
        assert!(close(&a.values, &b.values));
    }

    let store: BeatStore = io::load_store(d.join("store")).unwrap();
    assert_eq!(store.len(), out.store.len());
    assert_eq!(store.schema(), out.store.schema());
    assert_eq!(store.window(), out.store.window());
    for (a, b) in store.records().zip(out.store.records()) {
        assert_eq!((a.id, a.label), (b.id, b.label));
        assert!(close(&a.waveform, &b.waveform));
        assert_eq!(a.descriptors.keys().collect::<Vec<_>>(), b.descriptors.keys().collect::<Vec<_>>());
        assert!(a.descriptors.values().zip(b.descriptors.values()).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    let beats: Vec<longbeat::BeatRecord> = io::read_beats_csv(d.join("beats.csv")).unwrap();
    assert_eq!(beats.len(), out.segmented.beats.len());
    assert!(beats.iter().zip(&out.segmented.beats).all(|(a, b)| a.id == b.id && close(&a.waveform, &b.waveform)));

    let long: longbeat::Signal = io::read_signal_csv(d.join("long.csv"), ecg.signal.fs(), "ECG").unwrap();
    // Signal files carry six decimals.
    let samples = out.assembled.signal.samples();
    assert_eq!(long.len(), samples.len());
    assert!(long.samples().iter().zip(samples).all(|(a, b)| (a - b).abs() <= 5e-7));
}

#[test]
fn single_precision_assembly() {
    let desk = desk(800, 63);
    let narrow: Vec<BeatRecordF32> = desk
        .template(longbeat::BeatLabel::Normal)
        .generate_beats::<f32>(400, &RandomSource::new(64), 0, &longbeat::delineate::default_store_schema())
        .unwrap()
        .into_iter()
        .chain(
            desk.template(longbeat::BeatLabel::Abnormal)
                .generate_beats::<f32>(200, &RandomSource::new(65), 400, &longbeat::delineate::default_store_schema())
                .unwrap(),
        )
        .collect();
    let t = &desk.templates[0];
    let store: BeatStoreF32 = build_store(narrow, &longbeat::delineate::default_store_schema(), t.window, t.fs).unwrap();
    let model = FeatureModel::fit(Default::default(), &desk.segmented.trajectory).unwrap();
    let trajectory: FeatureTrajectoryF32 = model.sample(300, &mut RandomSource::new(66)).unwrap();
    let out = assemble(&trajectory, &store, &MatchWeights::default(), MatchMode::default(), &SmoothingConfig::default(), &RandomSource::new(67)).unwrap();
    assert_eq!(out.r_indices.len(), 300);
    assert!(out.signal.samples().iter().all(|v| v.is_finite()));
    let detected = detect_r_peaks(&out.signal).unwrap();
    let found = out.r_indices.iter().filter(|&&r| detected.iter().any(|&d| d.abs_diff(r) <= 2)).count();
    assert_eq!(found, out.r_indices.len());
}
