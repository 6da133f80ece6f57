//! Dense eigensolvers (faer, `f64`).

use crate::error::{Error, Result};
use faer::{Mat, Side};
use num_complex::Complex64;

/// Eigenpairs of a Hermitian matrix (lower triangle read), ascending.
pub(crate) fn hermitian_eigen(m: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = e.S();
    let vals = (0..n).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub(crate) fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut v = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Eigenpairs of a general complex matrix, unordered.
pub(crate) fn general_eigen(m: &Mat<Complex64>) -> Result<(Vec<Complex64>, Mat<Complex64>)> {
    let e = m.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = e.S();
    let vals = (0..n).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// `max|m − mᴴ| / max|m|`.
pub(crate) fn hermitian_defect(m: &Mat<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(m[(i, j)].norm());
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Rayleigh quotient of the dominant eigenvector by power iteration, stopping
/// when successive quotients agree to `tol` (relative).
pub(crate) fn power_iteration(m: &Mat<Complex64>, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.nrows();
    // deterministic, non-symmetric start so no parity sector is missed
    let mut v = Mat::<Complex64>::from_fn(n, 1, |i, _| Complex64::new(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.0));
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        let norm = v.norm_l2();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v *= faer::Scale(Complex64::new(1.0 / norm, 0.0));
        let w = m * &v;
        let q = (v.adjoint() * &w)[(0, 0)].re;
        if (q - last).abs() <= tol * q.abs() {
            return Ok(q);
        }
        last = q;
        v = w;
    }
    Err(Error::Eigen(format!("power iteration did not converge in {max_iter} steps")))
}
