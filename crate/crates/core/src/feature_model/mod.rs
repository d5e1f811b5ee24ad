//! Generative models over feature trajectories.

mod bootstrap;
mod copula_var;
pub(crate) mod linalg;
mod marginal;

pub use bootstrap::{BlockBootstrapModel, DEFAULT_BLOCK_LEN};
pub use copula_var::{CopulaVarModel, LabelMarginals};
pub use marginal::MarginalModel;

use serde::{Deserialize, Serialize};

use crate::delineate::{Feature, FeatureTrajectory};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureModelKind {
    #[default]
    CopulaVar,
    BlockBootstrap,
}

/// A fitted trajectory generator of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureModel {
    CopulaVar(CopulaVarModel),
    BlockBootstrap(BlockBootstrapModel),
}

impl FeatureModel {
    pub fn fit<T: Scalar>(kind: FeatureModelKind, trajectory: &FeatureTrajectory<T>) -> Result<Self> {
        Ok(match kind {
            FeatureModelKind::CopulaVar => FeatureModel::CopulaVar(CopulaVarModel::fit(trajectory)?),
            FeatureModelKind::BlockBootstrap => {
                FeatureModel::BlockBootstrap(BlockBootstrapModel::fit(trajectory, DEFAULT_BLOCK_LEN)?)
            }
        })
    }

    pub fn schema(&self) -> &[Feature] {
        match self {
            FeatureModel::CopulaVar(m) => &m.schema,
            FeatureModel::BlockBootstrap(m) => &m.schema,
        }
    }

    pub fn sample<T: Scalar>(&self, n_beats: usize, rng: &mut RandomSource) -> Result<FeatureTrajectory<T>> {
        match self {
            FeatureModel::CopulaVar(m) => m.sample(n_beats, rng),
            FeatureModel::BlockBootstrap(m) => m.sample(n_beats, rng),
        }
    }
}

/// Pearson correlation matrix over trajectory rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub features: Vec<Feature>,
    pub matrix: Vec<Vec<f64>>,
    /// Constant features; their off-diagonal entries are reported as 0.
    pub degenerate: Vec<Feature>,
}

pub fn feature_correlations<T: Scalar>(trajectory: &FeatureTrajectory<T>) -> Result<CorrelationMatrix> {
    let n = trajectory.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} rows; correlations need at least 3")));
    }
    let d = trajectory.dim();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|k| trajectory.column(k).into_iter().map(|v| v.as_f64()).collect())
        .collect();
    let centred: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centred.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut matrix = vec![vec![0.0; d]; d];
    for i in 0..d {
        matrix[i][i] = 1.0;
        for j in i + 1..d {
            if norms[i] > 0.0 && norms[j] > 0.0 {
                let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
                matrix[i][j] = r;
                matrix[j][i] = r;
            }
        }
    }
    Ok(CorrelationMatrix {
        features: trajectory.schema.clone(),
        matrix,
        degenerate: (0..d).filter(|&k| norms[k] == 0.0).map(|k| trajectory.schema[k]).collect(),
    })
}
