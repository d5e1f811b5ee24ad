use serde::{Deserialize, Serialize};

use crate::delineate::{Feature, FeatureTrajectory, FeatureVector};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;
use crate::signal::BeatLabel;

pub const DEFAULT_BLOCK_LEN: usize = 8;

/// Distribution-free baseline: concatenates uniformly drawn contiguous blocks
/// of the training trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockBootstrapModel {
    pub schema: Vec<Feature>,
    pub block_len: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<BeatLabel>,
}

impl BlockBootstrapModel {
    pub fn fit<T: Scalar>(trajectory: &FeatureTrajectory<T>, block_len: usize) -> Result<Self> {
        trajectory.validate()?;
        if block_len == 0 {
            return Err(Error::Config("block length must be positive".into()));
        }
        Ok(Self {
            schema: trajectory.schema.clone(),
            block_len: block_len.min(trajectory.len()),
            rows: trajectory
                .rows
                .iter()
                .map(|r| r.values.iter().map(|v| v.as_f64()).collect())
                .collect(),
            labels: trajectory.labels(),
        })
    }

    pub fn sample<T: Scalar>(&self, n_beats: usize, rng: &mut RandomSource) -> Result<FeatureTrajectory<T>> {
        if n_beats == 0 {
            return Err(Error::EmptyInput);
        }
        let starts = self.rows.len() - self.block_len + 1;
        let mut out = Vec::with_capacity(n_beats);
        while out.len() < n_beats {
            let s = rng.index(starts);
            for i in s..s + self.block_len {
                if out.len() == n_beats {
                    break;
                }
                out.push(FeatureVector {
                    values: self.rows[i].iter().map(|&v| T::lit(v)).collect(),
                    label: self.labels[i],
                });
            }
        }
        FeatureTrajectory::new(self.schema.clone(), out)
    }
}
