//! Shape distances between two waveforms (typically population mean beats).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dynamic time warping with absolute-difference local cost, no window
/// constraint, and a path from `(0, 0)` to `(n-1, m-1)`.
pub fn dtw<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = b.len();
    let inf = T::infinity();
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, &ai) in a.iter().enumerate() {
        for j in 0..m {
            let cost = (ai - b[j]).abs();
            let best = if i == 0 && j == 0 {
                T::zero()
            } else {
                let up = if i > 0 { prev[j] } else { inf };
                let left = if j > 0 { cur[j - 1] } else { inf };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { inf };
                up.min(left).min(diag)
            };
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Discrete Fréchet distance between two 1-D curves indexed by position,
/// using the absolute difference of values as ground metric.
pub fn frechet<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = b.len();
    let inf = T::infinity();
    let mut prev = vec![inf; m];
    let mut cur = vec![inf; m];
    for (i, &ai) in a.iter().enumerate() {
        for j in 0..m {
            let d = (ai - b[j]).abs();
            cur[j] = if i == 0 && j == 0 {
                d
            } else {
                let up = if i > 0 { prev[j] } else { inf };
                let left = if j > 0 { cur[j - 1] } else { inf };
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { inf };
                up.min(left).min(diag).max(d)
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PointwiseErrors<T> {
    pub euclidean: T,
    pub rmse: T,
    pub mae: T,
    pub mse: T,
    /// Percentage root-mean-square difference relative to `a`.
    pub prd: T,
}

pub fn pointwise_errors<T: Scalar>(a: &[T], b: &[T]) -> Result<PointwiseErrors<T>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = T::from_usize_lossy(a.len());
    let sq: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let abs: T = a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum();
    let energy: T = a.iter().map(|&x| x * x).sum();
    if energy == T::zero() {
        return Err(Error::ZeroReference);
    }
    let mse = sq / n;
    Ok(PointwiseErrors {
        euclidean: sq.sqrt(),
        rmse: mse.sqrt(),
        mae: abs / n,
        mse,
        prd: T::lit(100.0) * (sq / energy).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dtw_examples() {
        assert_eq!(dtw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw(&[1.0, 2.0, 3.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(dtw(&[0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(dtw::<f64>(&[], &[1.0]), Err(Error::EmptyInput)));
    }

    #[test]
    fn frechet_examples() {
        assert_eq!(frechet(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert_eq!(frechet(&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(frechet(&[5.0], &[7.0]).unwrap(), 2.0);
        assert!(matches!(frechet::<f64>(&[1.0], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn pointwise_examples() {
        let e = pointwise_errors(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(e.euclidean, 1.0);
        assert_eq!(e.mse, 0.5);
        assert!((e.rmse - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(e.mae, 0.5);
        assert_eq!(e.prd, 100.0);
        assert_eq!(pointwise_errors(&[2.0], &[1.0]).unwrap().prd, 50.0);
        let z = pointwise_errors(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((z.euclidean, z.rmse, z.mae, z.mse, z.prd), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(matches!(pointwise_errors(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(pointwise_errors(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::ZeroReference)));
    }

    #[test]
    fn works_in_single_precision() {
        assert_eq!(dtw(&[1.0f32, 2.0, 3.0], &[1.0f32, 3.0]).unwrap(), 1.0f32);
        assert_eq!(frechet(&[0.0f32, 0.0, 0.0], &[0.0f32, 1.0, 0.0]).unwrap(), 1.0f32);
    }

    proptest! {
        #[test]
        fn dtw_properties(a in prop::collection::vec(-10.0f64..10.0, 1..20), b in prop::collection::vec(-10.0f64..10.0, 1..20)) {
            prop_assert!((dtw(&a, &b).unwrap() - dtw(&b, &a).unwrap()).abs() < 1e-9);
            prop_assert_eq!(dtw(&a, &a).unwrap(), 0.0);
            let m = a.len().min(b.len());
            let l1: f64 = a[..m].iter().zip(&b[..m]).map(|(x, y)| (x - y).abs()).sum();
            prop_assert!(dtw(&a[..m], &b[..m]).unwrap() <= l1 + 1e-9);
        }

        #[test]
        fn frechet_properties(a in prop::collection::vec(-10.0f64..10.0, 1..20), b in prop::collection::vec(-10.0f64..10.0, 1..20)) {
            let f = frechet(&a, &b).unwrap();
            prop_assert_eq!(f, frechet(&b, &a).unwrap());
            prop_assert_eq!(frechet(&a, &a).unwrap(), 0.0);
            prop_assert!(f >= (a[a.len() - 1] - b[b.len() - 1]).abs());
            prop_assert!(f >= (a[0] - b[0]).abs());
        }
    }
}
