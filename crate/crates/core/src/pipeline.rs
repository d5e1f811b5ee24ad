//! End-to-end driver: segment, fit, synthesize features, build the store,
//! assemble, evaluate and run the TSTR protocol.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assemble::{assemble, default_amplitude_edges, match_histogram, AssembledSignal, MatchHistogram, MatchRecord};
use crate::beat_synth::{fit_template, BeatTemplateModel};
use crate::delineate::{beat_descriptors, delineate, detect_r_peaks, extract_features, Feature, FeatureTrajectory};
use crate::error::{Error, Result};
use crate::feature_model::FeatureModel;
use crate::io::{self, PipelineConfig};
use crate::metrics::{beat_population_summary, density_heatmap, evaluate_beats, evaluate_features, DensityHeatmap, FeatureReport, MetricReport, PopulationSummary};
use crate::rng::RandomSource;
use crate::signal::{slice_beat, BeatLabel, BeatRecord, BeatWindow, Signal};
use crate::store::{build_store, BeatStore};
use crate::tstr::{tstr_protocol, windows_to_dataset, ClassifierSpec, LabeledDataset, Provenance, TstrRow};

/// Largest distance between a detected beat and the annotation that labels it.
pub const ANNOTATION_TOLERANCE_MS: f64 = 150.0;

/// Labels each detected R-peak from the nearest annotation within
/// [`ANNOTATION_TOLERANCE_MS`]; unannotated beats are normal.
pub fn label_beats(r_indices: &[usize], annotations: &[(usize, BeatLabel)], fs: u32) -> Vec<BeatLabel> {
    let tol = ANNOTATION_TOLERANCE_MS * fs as f64 / 1000.0;
    let mut sorted = annotations.to_vec();
    sorted.sort_unstable();
    r_indices
        .iter()
        .map(|&r| {
            let pos = sorted.partition_point(|&(s, _)| s < r);
            let near = [pos.checked_sub(1), Some(pos)]
                .into_iter()
                .flatten()
                .filter_map(|i| sorted.get(i))
                .min_by_key(|(s, _)| s.abs_diff(r));
            match near {
                Some(&(s, label)) if s.abs_diff(r) as f64 <= tol => label,
                _ => BeatLabel::Normal,
            }
        })
        .collect()
}

/// Detected beats of a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmented {
    pub r_indices: Vec<usize>,
    pub labels: Vec<BeatLabel>,
    /// Windowed beats (edge beats skipped); ids are beat ordinals in the recording.
    pub beats: Vec<BeatRecord<f64>>,
    pub trajectory: FeatureTrajectory<f64>,
}

pub fn segment_recording(
    signal: &Signal<f64>,
    annotations: &[(usize, BeatLabel)],
    window: BeatWindow,
    schema: &[Feature],
    store_schema: &[Feature],
) -> Result<Segmented> {
    let r_indices = detect_r_peaks(signal)?;
    let labels = label_beats(&r_indices, annotations, signal.fs());
    let fiducials: Vec<_> = r_indices.iter().map(|&r| delineate(signal, r)).collect();
    let trajectory = extract_features(signal, &fiducials, &labels, schema)?;
    let beats = r_indices
        .iter()
        .zip(&labels)
        .enumerate()
        .filter_map(|(k, (&r, &label))| {
            let waveform = slice_beat(signal, r, window).ok()?;
            let descriptors = beat_descriptors(&waveform, window.pre_r, signal.fs(), store_schema).unwrap_or_default();
            Some(BeatRecord {
                id: k as u64,
                label,
                waveform,
                descriptors,
            })
        })
        .collect();
    Ok(Segmented {
        r_indices,
        labels,
        beats,
        trajectory,
    })
}

/// Per-label beat template models; labels with too few beats are skipped.
pub fn fit_templates(beats: &[BeatRecord<f64>], window: BeatWindow, fs: u32, cfg: &PipelineConfig) -> Result<Vec<BeatTemplateModel>> {
    let mut out = Vec::new();
    for label in BeatLabel::ALL {
        let waves: Vec<Vec<f64>> = beats.iter().filter(|b| b.label == label).map(|b| b.waveform.clone()).collect();
        match fit_template(&waves, label, window, fs, &cfg.template) {
            Ok(m) => out.push(m),
            Err(Error::InsufficientBeats { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::InsufficientBeats {
            have: beats.len(),
            need: 20.max(cfg.template.components + 1),
        });
    }
    Ok(out)
}

/// Fills a store from template models: normal beats take ids `0..n`, abnormal
/// beats follow. Label `l` draws from `rng.fork(l)`.
pub fn generate_store(templates: &[BeatTemplateModel], cfg: &PipelineConfig, rng: &RandomSource) -> Result<BeatStore<f64>> {
    let mut beats = Vec::new();
    let mut next_id = 0u64;
    for label in BeatLabel::ALL {
        let Some(model) = templates.iter().find(|m| m.label == label) else {
            continue;
        };
        let count = match label {
            BeatLabel::Normal => cfg.store_sizes.normal,
            BeatLabel::Abnormal => cfg.store_sizes.abnormal,
        };
        if count == 0 {
            continue;
        }
        let mut generated = model.generate_beats(count, &rng.fork(label.index() as u64), next_id, &cfg.store_schema)?;
        next_id += count as u64;
        beats.append(&mut generated);
    }
    let first = templates.first().ok_or(Error::EmptyInput)?;
    build_store(beats, &cfg.store_schema, first.window, first.fs)
}

/// Matching instrumentation written next to an assembled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub r_indices: Vec<usize>,
    pub histogram: MatchHistogram,
    pub matches: Vec<MatchRecord>,
}

impl MatchReport {
    pub fn new(assembled: &AssembledSignal<f64>) -> Result<Self> {
        Ok(Self {
            r_indices: assembled.r_indices.clone(),
            histogram: match_histogram(&assembled.matches, Feature::RAmp, &default_amplitude_edges())?,
            matches: assembled.matches.clone(),
        })
    }
}

/// Beat-level metrics for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEvaluation {
    pub label: BeatLabel,
    pub real_beats: usize,
    pub synthetic_beats: usize,
    pub metrics: MetricReport,
    /// `(display name, value)` rows in table order.
    pub table: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub labels: Vec<LabelEvaluation>,
    pub heatmap: DensityHeatmap,
    pub real_summary: PopulationSummary<f64>,
    pub synth_summary: PopulationSummary<f64>,
}

/// Compares real and synthetic beats label by label; plots use the normal label
/// when both sides have it, else the first shared label.
pub fn evaluate_populations(real: &[BeatRecord<f64>], synth: &[BeatRecord<f64>], cfg: &PipelineConfig) -> Result<Evaluation> {
    let waves = |set: &[BeatRecord<f64>], label| -> Vec<Vec<f64>> { set.iter().filter(|b| b.label == label).map(|b| b.waveform.clone()).collect() };
    let mut labels = Vec::new();
    let mut plotted = None;
    for label in BeatLabel::ALL {
        let (r, s) = (waves(real, label), waves(synth, label));
        if r.is_empty() || s.is_empty() {
            continue;
        }
        let metrics = evaluate_beats(&r, &s, &cfg.metrics)?;
        labels.push(LabelEvaluation {
            label,
            real_beats: r.len(),
            synthetic_beats: s.len(),
            table: metrics.rows().into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            metrics,
        });
        if plotted.is_none() {
            plotted = Some((r, s));
        }
    }
    let (r, s) = plotted.ok_or(Error::EmptyInput)?;
    Ok(Evaluation {
        labels,
        heatmap: density_heatmap(&r, &s, &cfg.metrics)?,
        real_summary: beat_population_summary(&r)?,
        synth_summary: beat_population_summary(&s)?,
    })
}

/// Windows of the re-delineated assembled signal, labelled from the placed beats.
pub fn synthetic_windows(assembled: &AssembledSignal<f64>, cfg: &PipelineConfig) -> Result<LabeledDataset> {
    let placed: Vec<(usize, BeatLabel)> = assembled.r_indices.iter().copied().zip(assembled.matches.iter().map(|m| m.label)).collect();
    let seg = segment_recording(&assembled.signal, &placed, cfg.window, &cfg.schema, &cfg.store_schema)?;
    windows_to_dataset(&seg.trajectory, cfg.tstr.window_beats, cfg.tstr.labeling, Provenance::Synthetic)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutputs {
    pub segmented: Segmented,
    pub feature_model: FeatureModel,
    pub templates: Vec<BeatTemplateModel>,
    pub synth_trajectory: FeatureTrajectory<f64>,
    pub store: BeatStore<f64>,
    pub assembled: AssembledSignal<f64>,
    pub match_report: MatchReport,
    pub evaluation: Evaluation,
    pub feature_report: FeatureReport,
    pub tstr: Vec<TstrRow>,
}

/// Runs every stage from one seed. Stage streams: 1 trajectory, 2 store,
/// 3 matching, 4 real split; classifiers are seeded with the config seed.
pub fn run(signal: &Signal<f64>, annotations: &[(usize, BeatLabel)], cfg: &PipelineConfig) -> Result<PipelineOutputs> {
    cfg.validate()?;
    let root = RandomSource::new(cfg.seed);
    let segmented = segment_recording(signal, annotations, cfg.window, &cfg.schema, &cfg.store_schema)?;
    let feature_model = FeatureModel::fit(cfg.feature_model, &segmented.trajectory)?;
    let templates = fit_templates(&segmented.beats, cfg.window, signal.fs(), cfg)?;
    let synth_trajectory: FeatureTrajectory<f64> = feature_model.sample(cfg.synth_beats, &mut root.fork(1))?;
    let store = generate_store(&templates, cfg, &root.fork(2))?;
    let assembled = assemble(&synth_trajectory, &store, &cfg.match_weights, cfg.match_mode, &cfg.smoothing, &root.fork(3))?;
    let match_report = MatchReport::new(&assembled)?;
    let synth_beats: Vec<BeatRecord<f64>> = store.records().cloned().collect();
    let evaluation = evaluate_populations(&segmented.beats, &synth_beats, cfg)?;
    let feature_report = evaluate_features(&segmented.trajectory, &synth_trajectory, signal.fs(), &cfg.metrics)?;
    let real = windows_to_dataset(&segmented.trajectory, cfg.tstr.window_beats, cfg.tstr.labeling, Provenance::Real)?;
    let (real_train, real_test) = real.split(cfg.tstr.split, &mut root.fork(4))?;
    let synth = synthetic_windows(&assembled, cfg)?;
    let classifiers = classifier_roster(&cfg.tstr.classifiers)?;
    let tstr = tstr_protocol(&synth, &real_train, &real_test, &classifiers, cfg.seed)?;
    Ok(PipelineOutputs {
        segmented,
        feature_model,
        templates,
        synth_trajectory,
        store,
        assembled,
        match_report,
        evaluation,
        feature_report,
        tstr,
    })
}

pub fn classifier_roster(names: &[String]) -> Result<Vec<ClassifierSpec>> {
    let mut out = Vec::new();
    for n in names {
        out.extend(ClassifierSpec::parse_list(n)?);
    }
    if out.is_empty() {
        return Err(Error::Config("no classifiers selected".into()));
    }
    Ok(out)
}

/// Beat-metric document: one entry per compared label.
#[derive(Serialize)]
struct EvaluationDoc<'a> {
    labels: &'a [LabelEvaluation],
}

impl Evaluation {
    pub fn write_report(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_json(path, &EvaluationDoc { labels: &self.labels })
    }

    pub fn write_heatmap(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_file(path, io::heatmap_svg(&self.heatmap).as_bytes())
    }

    pub fn write_overlay(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_file(path, io::overlay_svg(&self.real_summary, &self.synth_summary).as_bytes())
    }
}

impl PipelineOutputs {
    /// Writes every artifact into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        io::write_with(dir.join("beats.csv"), |b| io::write_beats_csv(b, &self.segmented.beats))?;
        io::write_with(dir.join("features.csv"), |b| io::write_features_csv(b, &self.segmented.trajectory))?;
        io::write_json(dir.join("model.json"), &self.feature_model)?;
        io::write_json(dir.join("templates.json"), &self.templates)?;
        io::write_with(dir.join("trajectory.csv"), |b| io::write_features_csv(b, &self.synth_trajectory))?;
        io::save_store(dir.join("store"), &self.store)?;
        io::write_with(dir.join("long.csv"), |b| io::write_signal_csv(b, &self.assembled.signal))?;
        io::write_json(dir.join("matches.json"), &self.match_report)?;
        self.evaluation.write_report(dir.join("report.json"))?;
        io::write_json(dir.join("feature_report.json"), &self.feature_report)?;
        self.evaluation.write_heatmap(dir.join("heatmap.svg"))?;
        self.evaluation.write_overlay(dir.join("overlay.svg"))?;
        io::write_with(dir.join("tstr.csv"), |b| io::write_tstr_csv(b, &self.tstr))?;
        io::write_with(dir.join("tstr.txt"), |b| io::write_tstr_text(b, &self.tstr))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotations_label_nearby_beats_only() {
        let ann = [(100, BeatLabel::Abnormal), (500, BeatLabel::Normal)];
        let labels = label_beats(&[98, 300, 505, 900], &ann, 128);
        assert_eq!(labels, vec![BeatLabel::Abnormal, BeatLabel::Normal, BeatLabel::Normal, BeatLabel::Normal]);
        assert_eq!(label_beats(&[10], &[], 128), vec![BeatLabel::Normal]);
    }
}
