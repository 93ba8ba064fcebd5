//! SVD-backed rank decisions, kernels and spans.
//!
//! Every rank decision in the crate goes through this module so that the
//! thresholding policy is uniform: a singular value counts as non-zero when it
//! exceeds `tol` times the largest singular value, and a decision is flagged
//! as ill-conditioned when some singular value falls within a factor of 10 of
//! that threshold.
//!
//! Factorizations are delegated to `faer`; its SVD keeps `A v_i = s_i u_i`
//! consistent to machine precision on rank-deficient inputs and returns the
//! full factors, both of which the kernel extraction relies on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a thresholded rank decision.
#[derive(Debug, Clone)]
pub struct RankInfo {
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Number of singular values above `tol * sigma_max`.
    pub rank: usize,
    /// True when some normalized singular value lies in `(tol/10, 10*tol)`.
    pub ill_conditioned: bool,
}

impl RankInfo {
    /// Turns the ill-conditioned flag into an error carrying `context`.
    pub fn guard(&self, context: &'static str, tol: f64) -> Result<()> {
        if self.ill_conditioned {
            let sigma_max = self.singular_values.first().copied().unwrap_or(0.0);
            let offender = self
                .singular_values
                .iter()
                .map(|s| s / sigma_max)
                .find(|s| *s > tol / 10.0 && *s < tol * 10.0)
                .unwrap_or(f64::NAN);
            return Err(Error::IllConditioned {
                context,
                sigma: offender,
                tol,
            });
        }
        Ok(())
    }
}

fn rank_info(singular_values: &[f64], tol: f64) -> RankInfo {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    if sigma_max <= 0.0 {
        return RankInfo {
            singular_values: singular_values.to_vec(),
            rank: 0,
            ill_conditioned: false,
        };
    }
    let mut rank = 0;
    let mut ill = false;
    for &s in singular_values {
        let normalized = s / sigma_max;
        if normalized > tol {
            rank += 1;
        }
        if normalized > tol / 10.0 && normalized < tol * 10.0 {
            ill = true;
        }
    }
    RankInfo {
        singular_values: singular_values.to_vec(),
        rank,
        ill_conditioned: ill,
    }
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Full SVD `a = u * diag(s) * v^T` with `u` `r x r`, `v` `c x c`, and `s`
/// descending.
fn svd_full(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = to_faer(a).svd().expect("SVD did not converge");
    let u_ref = svd.U();
    let v_ref = svd.V();
    let s_ref = svd.S();
    let u = DMatrix::from_fn(u_ref.nrows(), u_ref.ncols(), |i, j| u_ref[(i, j)]);
    let v = DMatrix::from_fn(v_ref.nrows(), v_ref.ncols(), |i, j| v_ref[(i, j)]);
    let s: Vec<f64> = (0..s_ref.dim()).map(|i| s_ref[i]).collect();
    (u, s, v)
}

/// Orthonormal basis of the right null space `{v : a v = 0}` at tolerance `tol`.
///
/// Returns an `ncols x (ncols - rank)` matrix with orthonormal columns. A
/// matrix with no rows (or only zero rows) has the full space as kernel.
pub fn right_nullspace(a: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, RankInfo) {
    let c = a.ncols();
    if c == 0 {
        return (
            DMatrix::zeros(0, 0),
            RankInfo {
                singular_values: vec![],
                rank: 0,
                ill_conditioned: false,
            },
        );
    }
    if a.nrows() == 0 || a.amax() == 0.0 {
        return (
            DMatrix::identity(c, c),
            RankInfo {
                singular_values: vec![0.0; c],
                rank: 0,
                ill_conditioned: false,
            },
        );
    }
    let (_, sigmas, v) = svd_full(a);
    let info = rank_info(&sigmas, tol);
    let kernel = v.columns(info.rank, c - info.rank).into_owned();
    (kernel, info)
}

/// Orthonormal basis of the column space of `a` at tolerance `tol`.
pub fn column_space(a: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, RankInfo) {
    let r = a.nrows();
    if a.ncols() == 0 || r == 0 || a.amax() == 0.0 {
        return (
            DMatrix::zeros(r, 0),
            RankInfo {
                singular_values: vec![0.0; a.ncols().min(r)],
                rank: 0,
                ill_conditioned: false,
            },
        );
    }
    let (u, sigmas, _) = svd_full(a);
    let info = rank_info(&sigmas, tol);
    let range = u.columns(0, info.rank).into_owned();
    (range, info)
}

/// Stacks matrices vertically. All blocks must share the column count.
pub fn stack_rows(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Flattens an `n x n` matrix into an `n^2` column vector (column-major).
pub fn mat_to_vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`mat_to_vec`].
pub fn vec_to_mat(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Cholesky factor `L` with `g = L L^T`, or `SingularMetric`.
pub fn cholesky_factor(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    match nalgebra::Cholesky::new(g.clone()) {
        Some(chol) => Ok(chol.l()),
        None => {
            let eigenvalue = symmetric_eigenvalues_sorted(g).first().copied().unwrap_or(0.0);
            Err(Error::SingularMetric { eigenvalue })
        }
    }
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix, ascending.
pub fn symmetric_eigenpairs(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition did not converge");
    let s_ref = eig.S();
    let u_ref = eig.U();
    let values: Vec<f64> = (0..n).map(|i| s_ref[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u_ref[(i, j)]);
    (values, vectors)
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues_sorted(m: &DMatrix<f64>) -> Vec<f64> {
    symmetric_eigenpairs(m).0
}

/// Largest singular value (spectral norm); zero for empty matrices.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 || m.amax() == 0.0 {
        return 0.0;
    }
    let svd = to_faer(m).svd().expect("SVD did not converge");
    let s = svd.S();
    (0..s.dim()).map(|i| s[i]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix_is_complete() {
        // One constraint over four unknowns: kernel must be 3-dimensional.
        let a = DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 1.0, 1.0]);
        let (kernel, info) = right_nullspace(&a, 1e-8);
        assert_eq!(info.rank, 1);
        assert_eq!(kernel.ncols(), 3);
        assert!((&a * &kernel).amax() < 1e-12);
        let gram = kernel.transpose() * &kernel;
        assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_full_kernel_and_no_flag() {
        let a = DMatrix::zeros(3, 3);
        let (kernel, info) = right_nullspace(&a, 1e-8);
        assert_eq!(kernel.ncols(), 3);
        assert_eq!(info.rank, 0);
        assert!(!info.ill_conditioned);
    }

    #[test]
    fn near_threshold_singular_value_is_flagged() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3e-8, 1e-15]));
        let (_, info) = right_nullspace(&a, 1e-8);
        assert!(info.ill_conditioned);
        assert!(info.guard("test", 1e-8).is_err());
    }

    #[test]
    fn column_space_matches_rank() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let (range, info) = column_space(&a, 1e-10);
        assert_eq!(info.rank, 1);
        assert_eq!(range.ncols(), 1);
    }

    #[test]
    fn rank_deficient_range_is_orthonormal_and_spanning() {
        // Duplicated directions: the returned basis must still reproduce the
        // matrix by projection.
        let base = DMatrix::from_fn(36, 5, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0);
        let mut a = DMatrix::zeros(36, 10);
        a.view_mut((0, 0), (36, 5)).copy_from(&base);
        for c in 0..5 {
            let col = (base.column(c) + base.column((c + 1) % 5)).scale(0.3);
            a.set_column(5 + c, &col);
        }
        let (range, info) = column_space(&a, 1e-10);
        assert_eq!(info.rank, 5);
        let residual = &a - &range * (range.transpose() * &a);
        assert!(residual.amax() < 1e-12);
    }

    #[test]
    fn symmetric_eigenpairs_are_consistent() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let (values, vectors) = symmetric_eigenpairs(&m);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..3 {
            let v: DVector<f64> = vectors.column(i).into();
            assert!(((&m * &v) - v.scale(values[i])).amax() < 1e-12);
        }
    }

    #[test]
    fn mat_vec_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec_to_mat(&mat_to_vec(&m), 2), m);
    }
}
