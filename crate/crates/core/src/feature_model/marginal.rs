use serde::{Deserialize, Serialize};

use crate::delineate::Feature;

/// Empirical marginal of one feature: sorted training values with a
/// piecewise-linear quantile function clamped to the training support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalModel {
    pub feature: Feature,
    pub values: Vec<f64>,
}

impl MarginalModel {
    pub fn new(feature: Feature, mut values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "marginal needs at least one value");
        values.sort_by(f64::total_cmp);
        Self { feature, values }
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// A constant feature collapses to a point mass.
    pub fn is_degenerate(&self) -> bool {
        self.min() == self.max()
    }

    /// Quantile at `u`: linear between order statistics at positions `u (n - 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let pos = u.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        (a + frac * (b - a)).clamp(self.min(), self.max())
    }

    /// Inverse of [`Self::inverse_cdf`] on the support; 0 below, 1 above.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return if x < self.min() { 0.0 } else if x > self.max() { 1.0 } else { 0.5 };
        }
        if x <= self.min() {
            return 0.0;
        }
        if x >= self.max() {
            return 1.0;
        }
        let i = self.values.partition_point(|&v| v <= x) - 1;
        let (a, b) = (self.values[i], self.values[i + 1]);
        let frac = if b > a { (x - a) / (b - a) } else { 0.0 };
        (i as f64 + frac) / (n - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantiles_interpolate_and_clamp() {
        let m = MarginalModel::new(Feature::RAmp, vec![3.0, 1.0, 2.0]);
        assert_eq!(m.inverse_cdf(0.0), 1.0);
        assert_eq!(m.inverse_cdf(0.25), 1.5);
        assert_eq!(m.inverse_cdf(1.0), 3.0);
        assert_eq!(m.inverse_cdf(2.0), 3.0);
        assert_eq!(m.cdf(1.5), 0.25);
    }

    #[test]
    fn point_mass() {
        let m = MarginalModel::new(Feature::QAmp, vec![0.4; 5]);
        assert!(m.is_degenerate());
        assert_eq!(m.inverse_cdf(0.37), 0.4);
    }

    proptest! {
        #[test]
        fn inverse_is_monotone_and_round_trips(mut v in prop::collection::vec(-100.0f64..100.0, 2..50), u in 0.0f64..1.0, w in 0.0f64..1.0) {
            let m = MarginalModel::new(Feature::RInt, v.clone());
            let (lo, hi) = if u <= w { (u, w) } else { (w, u) };
            prop_assert!(m.inverse_cdf(lo) <= m.inverse_cdf(hi));
            v.sort_by(f64::total_cmp);
            let max_gap = v.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
            let x = m.min() + u * (m.max() - m.min());
            prop_assert!((m.inverse_cdf(m.cdf(x)) - x).abs() <= max_gap + 1e-9);
        }
    }
}
