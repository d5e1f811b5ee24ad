//! Recording manifests and the pipeline configuration document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::read_json;
use crate::assemble::{MatchWeights, SmoothingConfig};
use crate::beat_synth::TemplateConfig;
use crate::delineate::{default_schema, default_store_schema, Feature};
use crate::error::{Error, Result};
use crate::feature_model::FeatureModelKind;
use crate::metrics::MetricParams;
use crate::signal::{BeatWindow, DEFAULT_FS};
use crate::store::MatchMode;
use crate::tstr::LabelingRule;

/// Sidecar describing a signal CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub fs: u32,
    pub channel_name: String,
    pub units: String,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub window: BeatWindow,
}

impl Manifest {
    pub fn new(fs: u32, channel_name: impl Into<String>, source: impl Into<String>, window: BeatWindow) -> Self {
        Self {
            fs,
            channel_name: channel_name.into(),
            units: "mV".into(),
            source: source.into(),
            window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fs == 0 {
            return Err(Error::Config("manifest fs must be positive".into()));
        }
        if self.units != "mV" {
            return Err(Error::Config(format!("manifest units must be \"mV\", found {:?}", self.units)));
        }
        self.window.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: Manifest = read_json(path)?;
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreSizes {
    pub normal: usize,
    pub abnormal: usize,
}

impl Default for StoreSizes {
    fn default() -> Self {
        Self {
            normal: 10_000,
            abnormal: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TstrConfig {
    /// Beats per classification window.
    pub window_beats: usize,
    pub labeling: LabelingRule,
    /// Classifier names, or `["all"]`.
    pub classifiers: Vec<String>,
    /// Share of real windows used for training the real baseline.
    pub split: f64,
}

impl Default for TstrConfig {
    fn default() -> Self {
        Self {
            window_beats: 5,
            labeling: LabelingRule::AnyAbnormal,
            classifiers: vec!["all".into()],
            split: 0.7,
        }
    }
}

/// Every knob of the end-to-end run. All fields default; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub fs: u32,
    pub window: BeatWindow,
    /// Trajectory feature schema; must contain `R_Int`.
    pub schema: Vec<Feature>,
    /// Descriptors cached on stored beats.
    pub store_schema: Vec<Feature>,
    pub match_mode: MatchMode,
    pub match_weights: MatchWeights,
    pub smoothing: SmoothingConfig,
    pub feature_model: FeatureModelKind,
    pub template: TemplateConfig,
    pub store_sizes: StoreSizes,
    /// Rows of the synthetic trajectory.
    pub synth_beats: usize,
    pub metrics: MetricParams,
    pub tstr: TstrConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            fs: DEFAULT_FS,
            window: BeatWindow::default(),
            schema: default_schema(),
            store_schema: default_store_schema(),
            match_mode: MatchMode::default(),
            match_weights: MatchWeights::default(),
            smoothing: SmoothingConfig::default(),
            feature_model: FeatureModelKind::default(),
            template: TemplateConfig::default(),
            store_sizes: StoreSizes::default(),
            synth_beats: 1000,
            metrics: MetricParams::default(),
            tstr: TstrConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fs == 0 {
            return Err(Error::Config("fs must be positive".into()));
        }
        self.window.validate()?;
        self.match_mode.validate()?;
        if !self.schema.contains(&Feature::RInt) {
            return Err(Error::Config("schema must contain R_Int".into()));
        }
        if self.store_schema.is_empty() || self.store_schema.contains(&Feature::RInt) {
            return Err(Error::Config("store schema must be non-empty and exclude R_Int".into()));
        }
        if self.synth_beats == 0 {
            return Err(Error::Config("synth_beats must be positive".into()));
        }
        if self.tstr.window_beats == 0 || !(self.tstr.split > 0.0 && self.tstr.split < 1.0) {
            return Err(Error::Config("tstr window_beats must be positive and split in (0, 1)".into()));
        }
        if self.metrics.bins == 0 {
            return Err(Error::Config("metric bins must be positive".into()));
        }
        Ok(())
    }

    /// Loads a config file; a missing path means defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            Some(p) => read_json(p)?,
            None => Self::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
