//! Metric Lie algebras: the whole input universe.
//!
//! A [`MetricLieAlgebra`] packs structure constants together with an inner
//! product at the base point. The bracket table is interpreted as the bracket
//! of the Killing fields induced by the basis elements of a simply transitive
//! presentation, so the tangent space at the base point is identified with the
//! algebra itself.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{column_space, right_nullspace, stack_rows};
use crate::subspace::Subspace;

/// Rank and residual thresholds used throughout an analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value threshold for every rank and residual decision.
    pub tol_alg: f64,
    /// Principal-angle threshold for subspace equality and inclusion.
    pub tol_sub: f64,
    /// Absolute lower bound on metric eigenvalues.
    pub tol_pd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_alg: 1e-8,
            tol_sub: 1e-8,
            tol_pd: 1e-12,
        }
    }
}

/// A finite-dimensional real Lie algebra with an inner product.
#[derive(Debug, Clone)]
pub struct MetricLieAlgebra {
    dim: usize,
    basis_labels: Vec<String>,
    /// `brackets[i][j]` holds the coefficients of `[X_i, X_j]` in the basis.
    brackets: Vec<Vec<DVector<f64>>>,
    /// Inner product at the base point, in the given basis.
    metric: DMatrix<f64>,
}

impl MetricLieAlgebra {
    pub fn new(
        basis_labels: Vec<String>,
        brackets: Vec<Vec<DVector<f64>>>,
        metric: DMatrix<f64>,
    ) -> Result<Self> {
        let dim = basis_labels.len();
        if brackets.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: brackets.len(),
            });
        }
        for row in &brackets {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
            }
        }
        if metric.nrows() != dim || metric.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: metric.nrows(),
            });
        }
        Ok(MetricLieAlgebra {
            dim,
            basis_labels,
            brackets,
            metric,
        })
    }

    /// Builds the table from a closure over basis index pairs `(i, j)` with
    /// `i < j`; the lower half is filled by antisymmetry.
    pub fn from_upper_brackets<F>(
        basis_labels: Vec<String>,
        metric: DMatrix<f64>,
        mut bracket: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize) -> DVector<f64>,
    {
        let dim = basis_labels.len();
        let zero = DVector::zeros(dim);
        let mut table = vec![vec![zero; dim]; dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let c = bracket(i, j);
                table[j][i] = -&c;
                table[i][j] = c;
            }
        }
        MetricLieAlgebra::new(basis_labels, table, metric)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// `[X_i, X_j]` as a coefficient vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.brackets[i][j]
    }

    /// Bilinear extension of the bracket table.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if y[j] == 0.0 {
                    continue;
                }
                out.axpy(x[i] * y[j], &self.brackets[i][j], 1.0);
            }
        }
        out
    }

    /// Matrix of `ad(x): v -> [x, v]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mut col = DVector::zeros(self.dim);
            for i in 0..self.dim {
                if x[i] != 0.0 {
                    col.axpy(x[i], &self.brackets[i][j], 1.0);
                }
            }
            out.set_column(j, &col);
        }
        out
    }

    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        self.ad(&e)
    }

    /// Inner product of coefficient vectors.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.metric * v)[(0, 0)]
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Killing form matrix `B(x, y) = trace(ad x . ad y)`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let ads: Vec<DMatrix<f64>> = (0..self.dim).map(|i| self.ad_basis(i)).collect();
        let mut b = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let value = (&ads[i] * &ads[j]).trace();
                b[(i, j)] = value;
                b[(j, i)] = value;
            }
        }
        b
    }
}

/// One violated invariant with the maximal residual observed.
#[derive(Debug, Clone)]
pub struct Violation {
    pub invariant: String,
    pub residual: f64,
}

/// Outcome of [`validate`]; an empty list means the input is a metric Lie
/// algebra at the given tolerances.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks antisymmetry (exact), the Jacobi identity (within `tol_alg`) and
/// that the metric is symmetric positive definite.
pub fn validate(alg: &MetricLieAlgebra, tol: &Tolerances) -> ValidationReport {
    let n = alg.dim();
    let mut report = ValidationReport::default();

    let mut antisym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let r = (alg.bracket_basis(i, j) + alg.bracket_basis(j, i)).amax();
            antisym = antisym.max(r);
        }
    }
    if antisym > 0.0 {
        report.violations.push(Violation {
            invariant: "bracket antisymmetry".into(),
            residual: antisym,
        });
    }

    let mut jacobi = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let ei = basis_vector(n, i);
                let ej = basis_vector(n, j);
                let ek = basis_vector(n, k);
                let cycle = alg.bracket(&alg.bracket(&ei, &ej), &ek)
                    + alg.bracket(&alg.bracket(&ej, &ek), &ei)
                    + alg.bracket(&alg.bracket(&ek, &ei), &ej);
                jacobi = jacobi.max(cycle.amax());
            }
        }
    }
    if jacobi > tol.tol_alg {
        report.violations.push(Violation {
            invariant: "Jacobi identity".into(),
            residual: jacobi,
        });
    }

    let asym = (alg.metric() - alg.metric().transpose()).amax();
    if asym > 1e-12 {
        report.violations.push(Violation {
            invariant: "metric symmetry".into(),
            residual: asym,
        });
    }
    let min_eig = crate::linalg::symmetric_eigenvalues_sorted(alg.metric())
        .first()
        .copied()
        .unwrap_or(0.0);
    if min_eig <= tol.tol_pd {
        report.violations.push(Violation {
            invariant: "metric positive definiteness".into(),
            residual: min_eig,
        });
    }

    report
}

/// Lie-theoretic structure of the input algebra.
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub solvable: bool,
    pub derived_series_dims: Vec<usize>,
    /// Smallest `s` with the lower central series vanishing at step `s + 1`.
    pub nilpotent_step: Option<usize>,
    pub lower_central_dims: Vec<usize>,
    /// Radical equals center (radical via the Killing-form orthocomplement of
    /// the derived algebra).
    pub reductive: bool,
    /// `trace(ad X_i)` per basis element; all zero means unimodular.
    pub unimodular_defects: Vec<f64>,
    pub center_dim: usize,
    pub killing_form: DMatrix<f64>,
}

impl StructureReport {
    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.unimodular_defects.iter().all(|d| d.abs() <= tol)
    }
}

/// Derived series, lower central series, radical/center comparison and
/// unimodularity defects. Rank decisions near the threshold abort with
/// `IllConditioned`.
pub fn structure_predicates(alg: &MetricLieAlgebra, tol: &Tolerances) -> Result<StructureReport> {
    let n = alg.dim();

    // Derived series g, [g, g], [[g, g], [g, g]], ...
    let mut derived_dims = vec![n];
    let mut current = DMatrix::identity(n, n);
    loop {
        let next = bracket_span(alg, &current, &current, tol, "derived series")?;
        let d = next.ncols();
        derived_dims.push(d);
        if d == 0 || d == *derived_dims.get(derived_dims.len() - 2).unwrap() {
            break;
        }
        current = next;
    }
    let solvable = *derived_dims.last().unwrap() == 0;

    // Lower central series g, [g, g], [g, [g, g]], ...
    let full = DMatrix::identity(n, n);
    let mut lower_dims = vec![n];
    let mut lc = full.clone();
    loop {
        let next = bracket_span(alg, &full, &lc, tol, "lower central series")?;
        let d = next.ncols();
        lower_dims.push(d);
        if d == 0 || d == *lower_dims.get(lower_dims.len() - 2).unwrap() {
            break;
        }
        lc = next;
    }
    let nilpotent_step = if *lower_dims.last().unwrap() == 0 {
        Some(lower_dims.len() - 1)
    } else {
        None
    };

    let killing = alg.killing_form();

    // Radical via Cartan's criterion: the Killing-orthogonal complement of
    // the derived algebra.
    let derived = bracket_span(alg, &full, &full, tol, "derived algebra")?;
    let radical = if derived.ncols() == 0 {
        Subspace::full(n, tol.tol_alg)
    } else {
        let constraints = derived.transpose() * &killing;
        let (kernel, info) = right_nullspace(&constraints, tol.tol_alg);
        info.guard("radical", tol.tol_alg)?;
        Subspace::from_orthonormal(kernel, tol.tol_alg)
    };

    // Center: common kernel of x -> [x, e_j].
    let blocks: Vec<DMatrix<f64>> = (0..n)
        .map(|j| {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                m.set_column(i, alg.bracket_basis(i, j));
            }
            m
        })
        .collect();
    let stacked = stack_rows(&blocks);
    let (center_basis, info) = right_nullspace(&stacked, tol.tol_alg);
    info.guard("center", tol.tol_alg)?;
    let center = Subspace::from_orthonormal(center_basis, tol.tol_alg);

    let reductive = radical.equals(&center);

    let unimodular_defects: Vec<f64> = (0..n).map(|i| alg.ad_basis(i).trace()).collect();

    Ok(StructureReport {
        solvable,
        derived_series_dims: derived_dims,
        nilpotent_step,
        lower_central_dims: lower_dims,
        reductive,
        unimodular_defects,
        center_dim: center.dim(),
        killing_form: killing,
    })
}

/// Span of `{[u, v] : u in cols(a), v in cols(b)}`.
fn bracket_span(
    alg: &MetricLieAlgebra,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tol: &Tolerances,
    context: &'static str,
) -> Result<DMatrix<f64>> {
    let n = alg.dim();
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut cols = DMatrix::zeros(n, a.ncols() * b.ncols());
    let mut at = 0;
    for i in 0..a.ncols() {
        for j in 0..b.ncols() {
            let u: DVector<f64> = a.column(i).into();
            let v: DVector<f64> = b.column(j).into();
            cols.set_column(at, &alg.bracket(&u, &v));
            at += 1;
        }
    }
    let (span, info) = column_space(&cols, tol.tol_alg);
    info.guard(context, tol.tol_alg)?;
    Ok(span)
}

/// The `i`-th standard basis vector of `R^n`.
pub fn basis_vector(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}
