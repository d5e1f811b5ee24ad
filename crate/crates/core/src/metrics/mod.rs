//! Fidelity metrics for beat populations and feature trajectories.

mod divergence;
mod heatmap;
mod report;
mod shape;

pub use divergence::{
    divergences, divergences_in_range, histogram, js_divergence, kl_divergence, ks_statistic, mmd_rbf, mmd_rbf_with, wasserstein1,
    Divergences, MetricParams,
};
pub use heatmap::{density_heatmap, timestep_kl_on_grid, DensityHeatmap};
pub use report::{
    beat_population_summary, evaluate_beats, evaluate_features, FeatureMetricRow, FeatureReport, MetricReport,
    PopulationSummary,
};
pub use shape::{dtw, frechet, pointwise_errors, PointwiseErrors};
