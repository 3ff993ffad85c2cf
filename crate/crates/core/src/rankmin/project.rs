//! Nearest-point projections onto the pattern region and the low-rank sets.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use super::pattern::{Cell, PatternMatrix};
use crate::error::{Error, Result};

const EIG_TOL: f64 = 1e-14;
const EIG_MAX_ITERS: usize = 10_000;
const SYMMETRY_DRIFT: f64 = 1e-12;

/// Projection onto the pattern region: fixed cells set to their targets,
/// free cells copied.
pub fn project_d(m: &DMatrix<f64>, pattern: &PatternMatrix) -> DMatrix<f64> {
    let mut out = m.clone();
    project_d_in_place(&mut out, pattern);
    out
}

pub fn project_d_in_place(m: &mut DMatrix<f64>, pattern: &PatternMatrix) {
    debug_assert_eq!((m.nrows(), m.ncols()), (pattern.rows(), pattern.cols()));
    for j in 0..pattern.cols() {
        for i in 0..pattern.rows() {
            match pattern.cell(i, j) {
                Cell::Zero => m[(i, j)] = 0.0,
                Cell::One => m[(i, j)] = 1.0,
                Cell::Star => {}
            }
        }
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Symmetrizes in place when the asymmetry exceeds `1e-12`.
pub fn symmetrize_if_drifted(m: &mut DMatrix<f64>) {
    if max_asymmetry(m) > SYMMETRY_DRIFT {
        let t = m.transpose();
        *m += t;
        *m *= 0.5;
    }
}

/// Nearest positive semidefinite matrix of rank at most `r`: eigendecompose,
/// clamp negative eigenvalues, keep the `r` largest.
pub fn project_c_psd(m: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Precondition("PSD projection needs a square matrix".into()));
    }
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("rank {r} outside 1..={n}")));
    }
    let mut sym = m.clone();
    symmetrize_if_drifted(&mut sym);
    let eig = SymmetricEigen::try_new(sym, EIG_TOL, EIG_MAX_ITERS)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let kept: Vec<usize> = idx
        .into_iter()
        .take(r)
        .filter(|&k| eig.eigenvalues[k] > 0.0)
        .collect();
    let mut scaled = DMatrix::<f64>::zeros(n, kept.len());
    let mut basis = DMatrix::<f64>::zeros(n, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        basis.set_column(c, &v);
        scaled.set_column(c, &(v * eig.eigenvalues[k]));
    }
    let out = scaled * basis.transpose();
    check_finite(&out)?;
    Ok(out)
}

/// Best rank-`r` approximation (truncated SVD).
pub fn project_c_svd(m: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let k = m.nrows().min(m.ncols());
    if r == 0 || r > k {
        return Err(Error::InvalidParameter(format!("rank {r} outside 1..={k}")));
    }
    if r == k {
        return Ok(m.clone());
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut left = DMatrix::<f64>::zeros(m.nrows(), r);
    let mut right = DMatrix::<f64>::zeros(r, m.ncols());
    for (c, &i) in idx.iter().take(r).enumerate() {
        left.set_column(c, &(u.column(i) * svd.singular_values[i]));
        right.set_row(c, &vt.row(i));
    }
    let out = left * right;
    check_finite(&out)?;
    Ok(out)
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite entries".into()))
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Spectral norm of `project_d(c) - c`, the gap between a low-rank point and
/// its projection onto the pattern region. Only evaluates an SVD when the
/// Frobenius bounds cannot decide `<= eps` on their own.
pub(crate) fn pattern_gap(c: &DMatrix<f64>, pattern: &PatternMatrix, eps: f64) -> f64 {
    let mut fro2 = 0.0;
    for (i, j, t) in pattern.fixed_cells() {
        let d = c[(i, j)] - t;
        fro2 += d * d;
    }
    let fro = fro2.sqrt();
    let k = pattern.rows().min(pattern.cols()).max(1) as f64;
    // ||G||_2 <= ||G||_F <= sqrt(k) ||G||_2
    if fro <= eps || fro > eps * k.sqrt() {
        return fro;
    }
    let mut gap = DMatrix::<f64>::zeros(c.nrows(), c.ncols());
    for (i, j, t) in pattern.fixed_cells() {
        gap[(i, j)] = t - c[(i, j)];
    }
    spectral_norm(&gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_projection_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, -2.0]));
        let p = project_c_psd(&m, 1).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.0, 0.0]));
        assert!((p - want).norm() < 1e-12);
    }

    #[test]
    fn svd_projection_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 3.0, 1.0]));
        let p = project_c_svd(&m, 2).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 3.0, 0.0]));
        assert!((p - want).norm() < 1e-12);
    }

    #[test]
    fn rank_bounds_checked() {
        let m = DMatrix::<f64>::identity(3, 3);
        assert!(project_c_psd(&m, 0).is_err());
        assert!(project_c_psd(&m, 4).is_err());
        assert!(project_c_svd(&m, 0).is_err());
    }

    #[test]
    fn gap_falls_back_to_spectral_in_ambiguous_band() {
        let pattern = PatternMatrix::identity(4);
        // identity + small off-diagonal error in all zero cells
        let mut c = DMatrix::<f64>::identity(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    c[(i, j)] = 1e-3;
                }
            }
        }
        let g = pattern_gap(&c, &pattern, 3.2e-3);
        // gap matrix is -1e-3 * (J - I): spectral norm 3e-3, Frobenius ~3.46e-3
        assert!((g - 3e-3).abs() < 1e-12);
    }
}
