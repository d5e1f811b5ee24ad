//! Single-beat population generation.

pub mod reference;
pub mod template;

pub use reference::{reference_ecg, ReferenceConfig, ReferenceEcg};
pub use template::{fit_template, BeatTemplateModel, TemplateConfig, MAX_COMPONENTS};
