//! Curvature tensor at the base point, from Killing-field data.
//!
//! The curvature operator is assembled as
//! `R_{X,Y} = (nab [X,Y]) + [(nab X), (nab Y)]`,
//! evaluated at the base point. Sign conventions are fixed once: sectional
//! curvature is `<R_{x,y} y, x>` over the Gram determinant, and
//! `Ric(x, y) = trace(v -> R_{v,x} y)`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{basis_vector, MetricLieAlgebra, Tolerances};
use crate::connection::ConnectionTable;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, symmetric_eigenvalues_sorted};

/// The table of curvature operators `R_{X_i, X_j}` plus Ricci caches.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    dim: usize,
    /// Upper-triangular storage for i < j; antisymmetry is by construction.
    ops: Vec<DMatrix<f64>>,
    metric: DMatrix<f64>,
    ricci: RicciData,
}

/// Ricci views: the bilinear form in the input basis, the spectrum in a
/// metric-orthonormal frame (ascending) and the scalar curvature.
#[derive(Debug, Clone)]
pub struct RicciData {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub scalar: f64,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    fn slot(&self, i: usize, j: usize) -> &DMatrix<f64> {
        debug_assert!(i < j);
        &self.ops[i * self.dim - i * (i + 1) / 2 + (j - i - 1)]
    }

    /// `R_{X_i, X_j}` as an operator; `R_{X,Y} = -R_{Y,X}` exactly.
    pub fn operator_basis(&self, i: usize, j: usize) -> DMatrix<f64> {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.slot(i, j).clone(),
            Ordering::Greater => -self.slot(j, i),
            Ordering::Equal => DMatrix::zeros(self.dim, self.dim),
        }
    }

    /// Bilinear extension `R_{x, y}`.
    pub fn operator_of(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let weight = x[i] * y[j] - x[j] * y[i];
                if weight != 0.0 {
                    out += self.slot(i, j).scale(weight);
                }
            }
        }
        out
    }

    /// Applies `R_{x,y}` to `z` without materializing the operator.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let weight = x[i] * y[j] - x[j] * y[i];
                if weight != 0.0 {
                    out.axpy(weight, &(self.slot(i, j) * z), 1.0);
                }
            }
        }
        out
    }

    pub fn ricci(&self) -> &RicciData {
        &self.ricci
    }

    fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.metric * v)[(0, 0)]
    }
}

/// Builds the curvature table from the connection table.
pub fn curvature_table(alg: &MetricLieAlgebra, table: &ConnectionTable) -> Result<CurvatureTensor> {
    let n = alg.dim();
    if table.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: table.dim(),
        });
    }
    let mut ops = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let bracket_part = table.operator_of(alg.bracket_basis(i, j));
            let commutator = table.operator(i) * table.operator(j) - table.operator(j) * table.operator(i);
            ops.push(bracket_part + commutator);
        }
    }

    // Ric(e_i, e_j) = trace(v -> R_{v, e_i} e_j); the trace is frame
    // independent, so it can be read off the stored operators directly.
    let slot = |i: usize, j: usize| -> &DMatrix<f64> { &ops[i * n - i * (i + 1) / 2 + (j - i - 1)] };
    let mut ricci_form = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for m in 0..n {
                // (R_{e_m, e_i} e_j)_m with R_{e_m, e_i} = -R_{e_i, e_m}.
                if m < i {
                    sum += slot(m, i)[(m, j)];
                } else if m > i {
                    sum -= slot(i, m)[(m, j)];
                }
            }
            ricci_form[(i, j)] = sum;
        }
    }

    let l = cholesky_factor(alg.metric())?;
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { eigenvalue: 0.0 })?;
    let frame_matrix = &l_inv * &ricci_form * l_inv.transpose();
    let eigenvalues = symmetric_eigenvalues_sorted(&frame_matrix);
    let scalar = frame_matrix.trace();

    Ok(CurvatureTensor {
        dim: n,
        ops,
        metric: alg.metric().clone(),
        ricci: RicciData {
            matrix: ricci_form,
            eigenvalues,
            scalar,
        },
    })
}

/// Ricci views of a curvature tensor.
pub fn ricci(ct: &CurvatureTensor) -> &RicciData {
    ct.ricci()
}

/// Sectional curvature of the plane spanned by `x` and `y`.
pub fn sectional(
    ct: &CurvatureTensor,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    if x.len() != ct.dim() || y.len() != ct.dim() {
        return Err(Error::DimensionMismatch {
            expected: ct.dim(),
            got: x.len().max(y.len()),
        });
    }
    let xx = ct.inner(x, x);
    let yy = ct.inner(y, y);
    let xy = ct.inner(x, y);
    let gram = xx * yy - xy * xy;
    let scale = (xx * yy).max(f64::MIN_POSITIVE);
    if gram / scale <= tol.tol_alg {
        return Err(Error::DegeneratePlane { gram: gram / scale });
    }
    let numerator = ct.inner(&ct.apply(x, y, y), x);
    Ok(numerator / gram)
}

/// Jacobi operator `x -> R_{x, v} v`; metric-symmetric.
pub fn jacobi_operator(ct: &CurvatureTensor, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = ct.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let mut out = DMatrix::zeros(n, n);
    for m in 0..n {
        let em = basis_vector(n, m);
        out.set_column(m, &ct.apply(&em, v, v));
    }
    Ok(out)
}
