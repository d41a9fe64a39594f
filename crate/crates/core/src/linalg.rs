//! Dense linear-algebra helpers shared by the engines: Hermitian positivity,
//! eigenvalue-thresholded pseudoinverses, Schur complements and block
//! extraction by mode.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used by every pseudoinverse in the crate.
/// Regularized states at squeezing r = 8 have condition numbers near
/// e^32 ≈ 8e13, so the cutoff sits just above machine precision.
pub const PINV_THRESHOLD: f64 = 1e-15;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute asymmetry `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.transpose())
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && asymmetry(m) <= tol
}

/// Phase-space coordinate indices `(2i, 2i+1)` for each listed mode.
pub fn mode_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `re + i·im` as a complex matrix.
pub fn complexify(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    assert_eq!(re.shape(), im.shape());
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex::new(re[(i, j)], im[(i, j)])
    })
}

/// Positivity test for a Hermitian matrix. Returns `(min_eig >= -tol, min_eig)`.
pub fn is_psd_hermitian(m: &DMatrix<Complex<f64>>, tol: f64) -> Result<(bool, f64)> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let herm_err = m
        .iter()
        .zip(m.adjoint().iter())
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm()));
    if herm_err > tol.max(1e-12) {
        return Err(Error::Shape(format!("matrix is not Hermitian (deviation {herm_err:e})")));
    }
    let min = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    Ok((min >= -tol, min))
}

/// Moore-Penrose pseudoinverse of a symmetric matrix, discarding eigenvalues
/// below `PINV_THRESHOLD` times the largest magnitude. The flag reports
/// whether any direction was discarded.
pub fn pinv_sym(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let n = m.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), false);
    }
    let eig = symmetrize(m).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let cutoff = PINV_THRESHOLD * scale;
    let mut degenerate = scale == 0.0;
    let mut inv = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() <= cutoff || scale == 0.0 {
            degenerate = true;
            continue;
        }
        let u = eig.eigenvectors.column(k);
        inv += (u * u.transpose()) / lam;
    }
    (symmetrize(&inv), degenerate)
}

/// Inverse of a symmetric matrix, falling back to the pseudoinverse when
/// the matrix is numerically singular. The flag is set on fallback.
pub fn inverse_sym(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let ev = sym_eigenvalues(m);
    let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let smallest = ev.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if scale > 0.0 && smallest > PINV_THRESHOLD * scale {
        if let Some(chol) = m.clone().cholesky() {
            return (symmetrize(&chol.inverse()), false);
        }
        if let Some(inv) = m.clone().try_inverse() {
            return (symmetrize(&inv), false);
        }
    }
    pinv_sym(m)
}

/// Schur complement `c - bᵀ a⁻¹ b` of the leading `k×k` block of a symmetric
/// matrix `[[a, b], [bᵀ, c]]`. A near-singular `a` goes through `pinv_sym`.
pub fn schur_complement(m: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Shape("schur complement needs a square matrix".into()));
    }
    let n = m.nrows();
    if k == 0 || k >= n {
        return Err(Error::Shape(format!("partition index {k} out of range for {n}x{n}")));
    }
    let a = m.view((0, 0), (k, k)).into_owned();
    let b = m.view((0, k), (k, n - k)).into_owned();
    let c = m.view((k, k), (n - k, n - k)).into_owned();
    let (a_inv, _) = inverse_sym(&a);
    Ok(symmetrize(&(c - b.transpose() * a_inv * b)))
}

/// Log-determinant of a symmetric positive matrix, or `None` if it is not
/// numerically positive definite.
pub fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let ev = sym_eigenvalues(m);
    let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if ev[0] <= PINV_THRESHOLD * scale || scale == 0.0 {
        return None;
    }
    Some(ev.iter().map(|x| x.ln()).sum())
}

/// Pseudo-log-determinant over the retained eigen-directions, together with
/// the number of retained directions.
pub fn pseudo_log_det(m: &DMatrix<f64>) -> (f64, usize) {
    let ev = sym_eigenvalues(m);
    let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let cutoff = PINV_THRESHOLD * scale;
    ev.iter()
        .filter(|x| **x > cutoff)
        .fold((0.0, 0), |(s, c), x| (s + x.ln(), c + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn psd_examples() {
        let lam = 1.0;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(lam, 0.0),
                Complex::new(0.0, -lam),
                Complex::new(0.0, lam),
                Complex::new(lam, 0.0),
            ],
        );
        let (ok, min) = is_psd_hermitian(&m, 1e-10).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(min, 0.0, epsilon = 1e-12);

        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.5, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.5, 0.0),
            ],
        );
        let (ok, min) = is_psd_hermitian(&m, 1e-10).unwrap();
        assert!(!ok);
        assert_abs_diff_eq!(min, -0.5, epsilon = 1e-12);

        let id = DMatrix::<Complex<f64>>::identity(3, 3);
        let (ok, min) = is_psd_hermitian(&id, 1e-10).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(min, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 1.0),
                Complex::new(1.0, 0.0),
            ],
        );
        assert!(matches!(is_psd_hermitian(&m, 1e-10), Err(Error::Shape(_))));
    }

    #[test]
    fn schur_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_abs_diff_eq!(schur_complement(&id, 1).unwrap()[(0, 0)], 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_abs_diff_eq!(schur_complement(&m, 1).unwrap()[(0, 0)], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn schur_matches_inverse_block() {
        // A random SPD matrix; the Schur complement of the leading block is
        // the inverse of the trailing block of M⁻¹.
        let g = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.3, -1.2, 0.7, 0.1, 1.1, 0.4, -0.5, 0.9, -0.2, 0.8, 1.3, -0.6, 0.5, -0.3, 0.2, 1.4,
            ],
        );
        let m = &g * g.transpose() + DMatrix::identity(4, 4) * 0.5;
        let s = schur_complement(&m, 2).unwrap();
        let inv = m.clone().try_inverse().unwrap();
        let tail = inv.view((2, 2), (2, 2)).into_owned().try_inverse().unwrap();
        assert!(max_abs_diff(&s, &tail) < 1e-12);
    }

    #[test]
    fn schur_singular_leading_block_uses_pseudoinverse() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.5, 1.0, 1.0, 0.5, 0.5, 0.5, 2.0]);
        let s = schur_complement(&m, 2).unwrap();
        // pinv of [[1,1],[1,1]] is [[1,1],[1,1]]/4, so 2 - 0.25 * 4 * 0.25
        assert_abs_diff_eq!(s[(0, 0)], 1.75, epsilon = 1e-12);
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (p, degenerate) = pinv_sym(&m);
        assert!(degenerate);
        assert!(max_abs_diff(&(&m * &p * &m), &m) < 1e-12);
    }
}
