//! Tolerance-aware linear subspaces of the tangent space.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{column_space, right_nullspace, spectral_norm, stack_rows};

/// A linear subspace of `R^n`, stored as a column-orthonormal basis matrix
/// together with the rank threshold used at construction.
///
/// Orthonormality is with respect to the standard inner product; the metric
/// enters only through the operators whose kernels and images these subspaces
/// record. Membership of `v` means `|v - proj v| <= tol * |v|`.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
    tol: f64,
}

impl Subspace {
    /// Builds a subspace from spanning columns, orthonormalizing by SVD and
    /// dropping directions below the relative threshold `tol`.
    pub fn from_columns(columns: &DMatrix<f64>, tol: f64) -> Self {
        let (basis, _) = column_space(columns, tol);
        Subspace {
            ambient_dim: columns.nrows(),
            basis,
            tol,
        }
    }

    /// Wraps an already orthonormal basis. Debug builds assert orthonormality.
    pub fn from_orthonormal(basis: DMatrix<f64>, tol: f64) -> Self {
        debug_assert!({
            let gram = basis.transpose() * &basis;
            (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax() < 1e-10
        });
        Subspace {
            ambient_dim: basis.nrows(),
            basis,
            tol,
        }
    }

    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
            tol,
        }
    }

    pub fn full(ambient_dim: usize, tol: f64) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
            tol,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Orthonormal basis matrix, `ambient_dim x dim`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<DVector<f64>> {
        (0..self.dim()).map(|i| self.basis.column(i).into()).collect()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(self.ambient_dim);
        }
        &self.basis * (self.basis.transpose() * v)
    }

    /// Relative distance of `v` from the subspace; zero vectors are members.
    pub fn membership_residual(&self, v: &DVector<f64>) -> f64 {
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (v - self.project(v)).norm() / norm
    }

    pub fn contains_vector(&self, v: &DVector<f64>) -> bool {
        self.membership_residual(v) <= self.tol
    }

    /// Sine of the largest principal angle of `other` against `self`;
    /// zero when `other` is contained.
    pub fn inclusion_residual(&self, other: &Subspace) -> f64 {
        if other.dim() == 0 {
            return 0.0;
        }
        if self.dim() == 0 {
            return 1.0;
        }
        let residual = other.basis() - &self.basis * (self.basis.transpose() * other.basis());
        spectral_norm(&residual)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.inclusion_residual(other) <= self.tol.max(other.tol)
    }

    pub fn equals(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains(other) && other.contains(self)
    }

    /// Subspace sum, re-orthonormalized by SVD (order independent).
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut cols = DMatrix::zeros(self.ambient_dim, self.dim() + other.dim());
        cols.view_mut((0, 0), (self.ambient_dim, self.dim()))
            .copy_from(&self.basis);
        cols.view_mut((0, self.dim()), (self.ambient_dim, other.dim()))
            .copy_from(other.basis());
        Subspace::from_columns(&cols, self.tol)
    }

    /// Intersection, computed from the null space of `[B_self | -B_other]`.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient_dim, self.tol);
        }
        let mut stacked = DMatrix::zeros(self.ambient_dim, self.dim() + other.dim());
        stacked
            .view_mut((0, 0), (self.ambient_dim, self.dim()))
            .copy_from(&self.basis);
        stacked
            .view_mut((0, self.dim()), (self.ambient_dim, other.dim()))
            .copy_from(&(-other.basis()));
        let (kernel, _) = right_nullspace(&stacked, self.tol);
        if kernel.ncols() == 0 {
            return Subspace::zero(self.ambient_dim, self.tol);
        }
        let coeffs = kernel.rows(0, self.dim()).into_owned();
        Subspace::from_columns(&(&self.basis * coeffs), self.tol)
    }

    /// Orthogonal complement with respect to the standard inner product.
    pub fn orthogonal_complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient_dim, self.tol);
        }
        let (kernel, _) = right_nullspace(&self.basis.transpose(), self.tol);
        Subspace::from_orthonormal(kernel, self.tol)
    }

    /// Image under a linear map, re-orthonormalized.
    pub fn map(&self, m: &DMatrix<f64>) -> Subspace {
        Subspace::from_columns(&(m * &self.basis), self.tol)
    }

    /// Span of this subspace together with extra columns.
    pub fn sum_columns(&self, extra: &DMatrix<f64>) -> Subspace {
        self.sum(&Subspace::from_columns(extra, self.tol))
    }
}

/// Span of a list of vectors.
pub fn span_of(vectors: &[DVector<f64>], ambient_dim: usize, tol: f64) -> Subspace {
    if vectors.is_empty() {
        return Subspace::zero(ambient_dim, tol);
    }
    let cols: Vec<DMatrix<f64>> = vectors
        .iter()
        .map(|v| DMatrix::from_column_slice(1, v.len(), v.as_slice()))
        .collect();
    Subspace::from_columns(&stack_rows(&cols).transpose(), tol)
}
