mod common;

use longbeat::io::PipelineConfig;
use longbeat::{BeatLabel, BeatRecord, RandomSource};

use common::*;

#[test]
fn generated_population_follows_the_implied_envelope() {
    let desk = desk(3000, 31);
    let model = desk.template(BeatLabel::Normal);
    let beats: Vec<BeatRecord> = model.generate_beats(10_000, &RandomSource::new(32), 0, &PipelineConfig::default().store_schema).unwrap();
    let waves: Vec<Vec<f64>> = beats.into_iter().map(|b| b.waveform).collect();
    let (implied_mean, implied_std) = model.implied_moments();
    let n = waves.len() as f64;
    for t in 0..implied_mean.len() {
        let col = column(&waves, t);
        let sd = sample_var(&col).sqrt();
        let stderr = sd / n.sqrt();
        assert!(
            (mean(&col) - implied_mean[t]).abs() <= 3.0 * stderr,
            "t={t}: mean {} vs implied {} (stderr {stderr})",
            mean(&col),
            implied_mean[t]
        );
        assert!((sd / implied_std[t] - 1.0).abs() <= 0.2, "t={t}: std {sd} vs implied {}", implied_std[t]);
    }
}

#[test]
fn every_generated_beat_is_anchored_at_r() {
    let desk = desk(2000, 33);
    let schema = PipelineConfig::default().store_schema;
    for label in BeatLabel::ALL {
        let model = desk.template(label);
        let pre = model.window.pre_r;
        let beats: Vec<BeatRecord> = model.generate_beats(2000, &RandomSource::new(34), 0, &schema).unwrap();
        for b in &beats {
            let peak = (0..b.waveform.len()).max_by(|&i, &j| b.waveform[i].abs().total_cmp(&b.waveform[j].abs())).unwrap();
            assert!(peak.abs_diff(pre) <= 5, "{label} beat {} peaks at {peak}", b.id);
            assert!(b.waveform.iter().all(|v| v.is_finite()));
            assert_eq!(b.descriptors.len(), schema.len());
        }
    }
}

#[test]
fn templates_reproduce_the_desk_morphology() {
    let desk = desk(2000, 35);
    // Ectopic beats are wider and taller with an inverted T wave.
    let normal = desk.template(BeatLabel::Normal);
    let ectopic = desk.template(BeatLabel::Abnormal);
    let pre = normal.window.pre_r;
    assert!(ectopic.mean_beat[pre] > normal.mean_beat[pre]);
    let t_region = pre + 25..pre + 50;
    let extreme = |m: &[f64]| m[t_region.clone()].iter().copied().fold(0.0, |a: f64, v| if v.abs() > a.abs() { v } else { a });
    assert!(extreme(&normal.mean_beat) > 0.1);
    assert!(extreme(&ectopic.mean_beat) < -0.1);
}
