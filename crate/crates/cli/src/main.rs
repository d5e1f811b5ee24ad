//! `longbeat` command-line driver.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input (including length
//! mismatches), 3 no beats detected, 4 beat-store problems, 5 unusable
//! classification datasets, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use longbeat::assemble::assemble;
use longbeat::beat_synth::{reference_ecg, BeatTemplateModel, ReferenceConfig};
use longbeat::delineate::beat_descriptors;
use longbeat::feature_model::FeatureModel;
use longbeat::io::{self, Manifest, PipelineConfig};
use longbeat::pipeline::{self, evaluate_populations, fit_templates, generate_store, segment_recording, MatchReport};
use longbeat::signal::BeatWindow;
use longbeat::store::build_store;
use longbeat::tstr::{tstr_protocol, windows_to_dataset, LabeledDataset, Provenance};
use longbeat::{BeatRecord, Error, FeatureTrajectory, RandomSource, Result, Signal};

#[derive(Parser)]
#[command(name = "longbeat", version, about = "Long-form ECG synthesis by feature-guided beat assembly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect, delineate and slice the beats of a recording.
    Segment(SegmentArgs),
    /// Fit a feature model, and optionally per-label beat templates.
    Fit(FitArgs),
    /// Sample a synthetic feature trajectory from a fitted model.
    SynthFeatures(SynthFeaturesArgs),
    /// Build a beat store from templates or from a beat table.
    BuildStore(BuildStoreArgs),
    /// Assemble a long-form signal from a trajectory and a store.
    Assemble(AssembleArgs),
    /// Compare real and synthetic beat populations.
    Evaluate(EvaluateArgs),
    /// Train on synthetic, test on real, with the real-data baseline.
    Tstr(TstrArgs),
    /// Write a simulated annotated recording for desk experiments.
    Reference(ReferenceArgs),
    /// Run every stage end to end.
    Pipeline(PipelineArgs),
    /// Print the default pipeline configuration as JSON.
    Defaults,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<PipelineConfig> {
        PipelineConfig::load(self.config.as_deref())
    }
}

#[derive(Args)]
struct SegmentArgs {
    signal: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// `sample,label` annotations; unannotated beats are normal.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Feature table path (default: `features.csv` beside `--out`).
    #[arg(long)]
    features: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Beat table to fit templates from; requires `--templates`.
    #[arg(long, requires = "templates")]
    beats: Option<PathBuf>,
    #[arg(long, requires = "beats")]
    templates: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct SynthFeaturesArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    beats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildStoreArgs {
    /// Template models to sample stored beats from.
    #[arg(long, conflicts_with = "beats", required_unless_present = "beats")]
    templates: Option<PathBuf>,
    /// Beat table stored as is.
    #[arg(long)]
    beats: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct AssembleArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Also write the placed R-peaks and their labels as annotations.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct TstrArgs {
    /// Synthetic feature table to train on.
    #[arg(long)]
    synth_train: PathBuf,
    /// Real feature table to test on.
    #[arg(long)]
    real_test: PathBuf,
    /// Real feature table for the baseline. Without it both tables are split
    /// with the same seeded procedure and only the held-out real part is tested.
    #[arg(long)]
    real_train: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    classifiers: String,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the table as aligned text.
    #[arg(long)]
    text: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct ReferenceArgs {
    #[arg(long, default_value_t = 1000)]
    beats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    signal: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::Json { .. }
        | Error::LengthMismatch { .. }
        | Error::InvalidSignal(_)
        | Error::InvalidWindow(_)
        | Error::SchemaMismatch(_)
        | Error::UnknownFeature(_)
        | Error::EmptyInput
        | Error::Config(_) => 2,
        Error::NoBeatsFound | Error::TooShort { .. } => 3,
        Error::LabelEmpty(_) | Error::DuplicateId(_) | Error::MissingDescriptor { .. } => 4,
        Error::SingleClass | Error::TooFewRows { .. } | Error::TooFewBeats { .. } | Error::EmptyTestSet => 5,
        _ => 1,
    }
}

fn read_signal(path: &Path, manifest: &Manifest) -> Result<Signal> {
    io::read_signal_csv(path, manifest.fs, &manifest.channel_name)
}

fn read_annotations(path: Option<&Path>) -> Result<Vec<(usize, longbeat::BeatLabel)>> {
    path.map_or(Ok(Vec::new()), io::read_annotations_csv)
}

fn segment(a: SegmentArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let cfg = a.config.load()?;
    let signal = read_signal(&a.signal, &manifest)?;
    let ann = read_annotations(a.annotations.as_deref())?;
    let seg = segment_recording(&signal, &ann, manifest.window, &cfg.schema, &cfg.store_schema)?;
    let features = a.features.unwrap_or_else(|| a.out.with_file_name("features.csv"));
    io::write_with(&a.out, |b| io::write_beats_csv(b, &seg.beats))?;
    io::write_with(&features, |b| io::write_features_csv(b, &seg.trajectory))?;
    eprintln!("{} beats detected, {} windowed", seg.r_indices.len(), seg.beats.len());
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let traj: FeatureTrajectory = io::read_features_csv(&a.features)?;
    let model = FeatureModel::fit(cfg.feature_model, &traj)?;
    io::write_json(&a.out, &model)?;
    if let (Some(beats), Some(out)) = (a.beats, a.templates) {
        let beats: Vec<BeatRecord> = io::read_beats_csv(&beats)?;
        let templates = fit_templates(&beats, cfg.window, cfg.fs, &cfg)?;
        io::write_json(out, &templates)?;
    }
    Ok(())
}

fn synth_features(a: SynthFeaturesArgs) -> Result<()> {
    let model: FeatureModel = io::read_json(&a.model)?;
    let traj: FeatureTrajectory = model.sample(a.beats, &mut RandomSource::new(a.seed))?;
    io::write_with(&a.out, |b| io::write_features_csv(b, &traj))
}

/// Recomputes store descriptors of beats read from a table. Beats that cannot
/// be delineated keep no descriptors and are rejected by the store.
fn describe(mut beats: Vec<BeatRecord>, window: BeatWindow, cfg: &PipelineConfig) -> Result<Vec<BeatRecord>> {
    for b in &mut beats {
        if b.waveform.len() != window.len() {
            return Err(Error::LengthMismatch {
                expected: window.len(),
                got: b.waveform.len(),
            });
        }
        b.descriptors = beat_descriptors(&b.waveform, window.pre_r, cfg.fs, &cfg.store_schema).unwrap_or_default();
    }
    Ok(beats)
}

fn build_store_cmd(a: BuildStoreArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let store = match (a.templates, a.beats) {
        (Some(path), _) => {
            let templates: Vec<BeatTemplateModel> = io::read_json(&path)?;
            generate_store(&templates, &cfg, &RandomSource::new(a.seed))?
        }
        (None, Some(path)) => {
            let beats = describe(io::read_beats_csv(&path)?, cfg.window, &cfg)?;
            build_store(beats, &cfg.store_schema, cfg.window, cfg.fs)?
        }
        (None, None) => return Err(Error::Config("either --templates or --beats is required".into())),
    };
    io::save_store(&a.out, &store)?;
    eprintln!("stored {} beats", store.len());
    Ok(())
}

fn assemble_cmd(a: AssembleArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let traj: FeatureTrajectory = io::read_features_csv(&a.traj)?;
    let store = io::load_store(&a.store)?;
    let out = assemble(&traj, &store, &cfg.match_weights, cfg.match_mode, &cfg.smoothing, &RandomSource::new(a.seed))?;
    io::write_with(&a.out, |b| io::write_signal_csv(b, &out.signal))?;
    io::write_json(&a.report, &MatchReport::new(&out)?)?;
    if let Some(p) = a.annotations {
        let labels: Vec<_> = out.matches.iter().map(|m| m.label).collect();
        io::write_with(p, |b| io::write_annotations_csv(b, &out.r_indices, &labels))?;
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let real: Vec<BeatRecord> = io::read_beats_csv(&a.real)?;
    let synth: Vec<BeatRecord> = io::read_beats_csv(&a.synth)?;
    if let (Some(r), Some(s)) = (real.first(), synth.first()) {
        if r.waveform.len() != s.waveform.len() {
            return Err(Error::LengthMismatch {
                expected: r.waveform.len(),
                got: s.waveform.len(),
            });
        }
    }
    let eval = evaluate_populations(&real, &synth, &cfg)?;
    eval.write_report(&a.out)?;
    if let Some(p) = a.heatmap {
        eval.write_heatmap(p)?;
    }
    if let Some(p) = a.overlay {
        eval.write_overlay(p)?;
    }
    Ok(())
}

fn windows(path: &Path, cfg: &PipelineConfig, provenance: Provenance) -> Result<LabeledDataset> {
    let traj: FeatureTrajectory = io::read_features_csv(path)?;
    windows_to_dataset(&traj, cfg.tstr.window_beats, cfg.tstr.labeling, provenance)
}

fn tstr_cmd(a: TstrArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let split = a.split.unwrap_or(cfg.tstr.split);
    let classifiers = pipeline::classifier_roster(&[a.classifiers])?;
    let synth = windows(&a.synth_train, &cfg, Provenance::Synthetic)?;
    let real = windows(&a.real_test, &cfg, Provenance::Real)?;
    let (synth_train, real_train, real_test) = match a.real_train {
        Some(path) => (synth, windows(&path, &cfg, Provenance::Real)?, real),
        None => {
            let rng = RandomSource::new(a.seed);
            let (synth_train, _) = synth.split(split, &mut rng.clone())?;
            let (real_train, real_test) = real.split(split, &mut rng.clone())?;
            (synth_train, real_train, real_test)
        }
    };
    let rows = tstr_protocol(&synth_train, &real_train, &real_test, &classifiers, a.seed)?;
    io::write_with(&a.out, |b| io::write_tstr_csv(b, &rows))?;
    if let Some(p) = a.text {
        io::write_with(p, |b| io::write_tstr_text(b, &rows))?;
    }
    Ok(())
}

fn reference(a: ReferenceArgs) -> Result<()> {
    let cfg = ReferenceConfig {
        beats: a.beats,
        ..ReferenceConfig::default()
    };
    let ecg = reference_ecg(&cfg, &mut RandomSource::new(a.seed))?;
    io::write_with(&a.out, |b| io::write_signal_csv(b, &ecg.signal))?;
    io::write_with(&a.annotations, |b| io::write_annotations_csv(b, &ecg.r_indices, &ecg.labels))?;
    if let Some(p) = a.manifest {
        let source = format!("simulated reference recording, seed {}", a.seed);
        io::write_json(p, &Manifest::new(cfg.fs, ecg.signal.channel_name(), source, BeatWindow::default()))?;
    }
    Ok(())
}

fn pipeline_cmd(a: PipelineArgs) -> Result<()> {
    let manifest = Manifest::load(&a.manifest)?;
    let mut cfg = a.config.load()?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let signal = read_signal(&a.signal, &manifest)?;
    let ann = read_annotations(a.annotations.as_deref())?;
    let outputs = pipeline::run(&signal, &ann, &cfg)?;
    outputs.write(&a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(a) => segment(a),
        Command::Fit(a) => fit(a),
        Command::SynthFeatures(a) => synth_features(a),
        Command::BuildStore(a) => build_store_cmd(a),
        Command::Assemble(a) => assemble_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Tstr(a) => tstr_cmd(a),
        Command::Reference(a) => reference(a),
        Command::Pipeline(a) => pipeline_cmd(a),
        Command::Defaults => io::to_json_string(&PipelineConfig::default()).map(|json| println!("{json}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
