//! Long-form ECG synthesis by feature-guided beat assembly.
//!
//! Beats are delineated into per-beat feature rows, a generative model over those
//! rows produces a synthetic trajectory, and each synthetic row is matched to a
//! stored single beat which is placed at the target R-R offset. Fidelity metrics and
//! a train-on-synthetic / test-on-real harness evaluate the result.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod assemble;
pub mod beat_synth;
pub mod delineate;
pub mod error;
pub mod feature_model;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod store;
pub mod tstr;

pub use error::{Error, Result};
pub use rng::RandomSource;
pub use scalar::Scalar;
pub use signal::{BeatLabel, BeatWindow};

pub type Signal = signal::Signal<f64>;
pub type SignalF32 = signal::Signal<f32>;
pub type BeatRecord = signal::BeatRecord<f64>;
pub type BeatRecordF32 = signal::BeatRecord<f32>;
pub type FeatureTrajectory = delineate::FeatureTrajectory<f64>;
pub type FeatureTrajectoryF32 = delineate::FeatureTrajectory<f32>;
pub type FeatureVector = delineate::FeatureVector<f64>;
pub type BeatStore = store::BeatStore<f64>;
pub type BeatStoreF32 = store::BeatStore<f32>;
pub type AssembledSignal = assemble::AssembledSignal<f64>;
