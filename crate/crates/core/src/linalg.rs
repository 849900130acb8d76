//! Spectral functions of symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor applied before a matrix logarithm.
pub const LOG_EIGEN_FLOOR: f64 = 1e-8;

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = max_asymmetry(m);
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn rebuild(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    v * d * v.transpose()
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrized(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Principal logarithm of a symmetric positive (semi)definite matrix.
///
/// Eigenvalues below `LOG_EIGEN_FLOOR × λ_max` are raised to that floor.
/// Returns the logarithm and the number of eigenvalues that were floored.
pub fn spd_log(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(symmetrized(m));
    let largest = eig.eigenvalues.max();
    if !(largest > 0.0) || !largest.is_finite() {
        return Err(Error::NotPositiveDefinite { largest });
    }
    spd_log_floored(m, LOG_EIGEN_FLOOR * largest)
}

/// Principal logarithm with eigenvalues raised to an absolute `floor > 0`.
pub fn spd_log_floored(m: &DMatrix<f64>, floor: f64) -> Result<(DMatrix<f64>, usize)> {
    check_symmetric(m)?;
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(Error::NotPositiveDefinite { largest: floor / LOG_EIGEN_FLOOR });
    }
    let eig = SymmetricEigen::new(symmetrized(m));
    let floored = eig.eigenvalues.iter().filter(|&&l| l < floor).count();
    Ok((rebuild(&eig, |l| l.max(floor).ln()), floored))
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// are clipped to zero first.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(symmetrized(m));
    Ok(rebuild(&eig, |l| l.max(0.0).sqrt()))
}

/// A factor `L` with `L Lᵀ = m` for symmetric PSD `m`, via the eigenbasis.
pub(crate) fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrized(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_and_sqrt_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 9.0, 1.0]));
        let (l, floored) = spd_log(&m).unwrap();
        assert_eq!(floored, 0);
        assert!((l[(0, 0)] - 4f64.ln()).abs() < 1e-12);
        assert!((l[(1, 1)] - 9f64.ln()).abs() < 1e-12);
        assert!(l[(0, 1)].abs() < 1e-12);
        let s = psd_sqrt(&m).unwrap();
        assert!((s[(1, 1)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn log_inverts_exp() {
        // exp of a symmetric matrix through its eigenbasis
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, -0.2, 1.1]);
        let e = rebuild(&SymmetricEigen::new(a.clone()), f64::exp);
        let (l, _) = spd_log(&e).unwrap();
        assert!((l - a).amax() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_floored() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (_, floored) = spd_log(&m).unwrap();
        assert_eq!(floored, 1);
        assert!(matches!(spd_log(&DMatrix::zeros(2, 2)), Err(Error::NotPositiveDefinite { .. })));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(spd_log(&asym), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn factor_reproduces_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.3, 0.0, 0.3, 0.0]);
        let m = &m * m.transpose();
        let l = psd_factor(&m);
        assert!((&l * l.transpose() - &m).amax() < 1e-12);
    }
}
