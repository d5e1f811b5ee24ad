//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Clips eigenvalues below `floor` and rebuilds a symmetric matrix.
pub(crate) fn project_psd(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

/// PSD projection followed by rescaling to unit diagonal.
pub(crate) fn nearest_correlation(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let p = project_psd(m, floor);
    let d: Vec<f64> = (0..p.nrows()).map(|i| p[(i, i)].sqrt()).collect();
    DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| if i == j { 1.0 } else { p[(i, j)] / (d[i] * d[j]) })
}

/// Symmetric square root factor `L` with `L L^T = m` for PSD `m`.
pub(crate) fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let sym_err = (m - m.transpose()).abs().max();
    sym_err <= tol && SymmetricEigen::new(m.clone()).eigenvalues.iter().all(|&l| l >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indefinite_matrix_is_repaired() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        assert!(!is_psd(&m, 1e-12));
        let c = nearest_correlation(&m, 1e-10);
        assert!(is_psd(&c, 1e-9));
        for i in 0..3 {
            assert_eq!(c[(i, i)], 1.0);
        }
    }

    #[test]
    fn factor_reconstructs() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let l = psd_factor(&m);
        assert!((&l * l.transpose() - &m).abs().max() < 1e-12);
    }

    #[test]
    fn radius_of_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&m) - 0.5).abs() < 1e-12);
    }
}
