//! Nomizu operators of the basis Killing fields at the base point.
//!
//! For Killing fields the Levi-Civita connection obeys
//! `2 <nab_X Y, Z> = <[X,Y], Z> + <[X,Z], Y> + <[Y,Z], X>`,
//! which pins every operator `(nab X_i)` from the bracket table and the
//! metric alone. The identity makes each operator metric-skew, and the pair
//! satisfies the torsion identity `nab_{X_j} X_i - nab_{X_i} X_j = [X_j, X_i]`
//! at the base point.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{basis_vector, MetricLieAlgebra};
use crate::error::{Error, Result};

/// The operators `(nab X_i)` at the base point: `operators[i]` maps
/// `v -> nab_v X_i` (columns indexed by basis directions).
#[derive(Debug, Clone)]
pub struct ConnectionTable {
    operators: Vec<DMatrix<f64>>,
    metric: DMatrix<f64>,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// `(nab X_i)` as a matrix.
    pub fn operator(&self, i: usize) -> &DMatrix<f64> {
        &self.operators[i]
    }

    pub fn operators(&self) -> &[DMatrix<f64>] {
        &self.operators
    }

    /// `(nab X)` for a Killing field with coefficient vector `x`; the Nomizu
    /// operator is linear in the field.
    pub fn operator_of(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] != 0.0 {
                out += self.operators[i].scale(x[i]);
            }
        }
        out
    }
}

/// Computes all Nomizu operators from the Koszul formula for Killing fields.
pub fn nomizu_table(alg: &MetricLieAlgebra) -> Result<ConnectionTable> {
    let n = alg.dim();
    let g = alg.metric().clone();
    let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(|| {
        let min = crate::linalg::symmetric_eigenvalues_sorted(&g)
            .first()
            .copied()
            .unwrap_or(0.0);
        Error::SingularMetric { eigenvalue: min }
    })?;

    let mut operators = Vec::with_capacity(n);
    for i in 0..n {
        let ei = basis_vector(n, i);
        // rhs[(l, j)] = <[X_j,X_i],X_l> + <[X_j,X_l],X_i> + <[X_i,X_l],X_j>
        let mut rhs = DMatrix::zeros(n, n);
        for j in 0..n {
            let ej = basis_vector(n, j);
            let g_cji = &g * alg.bracket_basis(j, i);
            for l in 0..n {
                rhs[(l, j)] = g_cji[l]
                    + alg.inner(alg.bracket_basis(j, l), &ei)
                    + alg.inner(alg.bracket_basis(i, l), &ej);
            }
        }
        let gamma = chol.solve(&rhs).scale(0.5);
        operators.push(gamma);
    }

    Ok(ConnectionTable { operators, metric: g })
}

/// `nab_v X_i`, linear in `v`.
pub fn covariant_derivative(
    table: &ConnectionTable,
    v: &DVector<f64>,
    i: usize,
) -> Result<DVector<f64>> {
    if v.len() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            got: v.len(),
        });
    }
    if i >= table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            got: i,
        });
    }
    Ok(table.operator(i) * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Tolerances;
    use crate::corpus;

    fn max_g_skew_residual(table: &ConnectionTable) -> f64 {
        let g = table.metric();
        table
            .operators()
            .iter()
            .map(|op| (op.transpose() * g + g * op).amax())
            .fold(0.0, f64::max)
    }

    fn max_torsion_residual(alg: &MetricLieAlgebra, table: &ConnectionTable) -> f64 {
        let n = alg.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let ei = basis_vector(n, i);
                let ej = basis_vector(n, j);
                let lhs = table.operator(i) * &ej - table.operator(j) * &ei;
                worst = worst.max((lhs - alg.bracket_basis(j, i)).amax());
            }
        }
        worst
    }

    #[test]
    fn abelian_connection_vanishes() {
        let alg = corpus::abelian(5);
        let table = nomizu_table(&alg).unwrap();
        for op in table.operators() {
            assert_eq!(op.amax(), 0.0);
        }
    }

    #[test]
    fn heisenberg_operators_match_hand_computation() {
        let alg = corpus::heisenberg3();
        let table = nomizu_table(&alg).unwrap();
        // nab X_1: e2 -> -X3/2, e3 -> X2/2.
        let g1 = table.operator(0);
        assert!((g1[(2, 1)] + 0.5).abs() < 1e-15);
        assert!((g1[(1, 2)] - 0.5).abs() < 1e-15);
        assert!(g1.column(0).amax() < 1e-15);
    }

    #[test]
    fn killing_and_torsion_identities() {
        for alg in [
            corpus::heisenberg3(),
            corpus::so3_bi_invariant(),
            corpus::line_times_so3(),
        ] {
            let table = nomizu_table(&alg).unwrap();
            assert!(max_g_skew_residual(&table) < 1e-12);
            assert!(max_torsion_residual(&alg, &table) < 1e-12);
        }
    }

    #[test]
    fn koszul_reconstruction() {
        let alg = corpus::so3_bi_invariant();
        let table = nomizu_table(&alg).unwrap();
        let n = alg.dim();
        let g = alg.metric();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = basis_vector(n, i);
                    let ej = basis_vector(n, j);
                    let lhs = 2.0 * (g * (table.operator(i) * &ej))[k];
                    let ek = basis_vector(n, k);
                    let rhs = alg.inner(alg.bracket_basis(j, i), &ek)
                        + alg.inner(alg.bracket_basis(j, k), &ei)
                        + alg.inner(alg.bracket_basis(i, k), &ej);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        assert!(worst < 1e-10);
    }

    #[test]
    fn covariant_derivative_guards_dimensions() {
        let alg = corpus::heisenberg3();
        let table = nomizu_table(&alg).unwrap();
        let bad = DVector::zeros(5);
        assert!(covariant_derivative(&table, &bad, 0).is_err());
        let zero = DVector::zeros(3);
        let out = covariant_derivative(&table, &zero, 0).unwrap();
        assert_eq!(out.amax(), 0.0);
    }

    #[test]
    fn basis_permutation_independence() {
        let alg = corpus::heisenberg3();
        let table = nomizu_table(&alg).unwrap();
        // Permute the basis (2, 0, 1) and recompute.
        let perm = [2usize, 0, 1];
        let n = alg.dim();
        let labels = perm.iter().map(|&p| alg.basis_labels()[p].clone()).collect();
        let mut metric = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                metric[(a, b)] = alg.metric()[(perm[a], perm[b])];
            }
        }
        let inv = {
            let mut inv = [0usize; 3];
            for (new_idx, &old_idx) in perm.iter().enumerate() {
                inv[old_idx] = new_idx;
            }
            inv
        };
        let permuted = MetricLieAlgebra::from_upper_brackets(labels, metric, |a, b| {
            let c = alg.bracket_basis(perm[a], perm[b]);
            DVector::from_fn(n, |k, _| c[perm[k]])
        })
        .unwrap();
        assert!(crate::algebra::validate(&permuted, &Tolerances::default()).is_valid());
        let table2 = nomizu_table(&permuted).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            let op = table.operator(i);
            let op2 = table2.operator(inv[i]);
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max((op[(a, b)] - op2[(inv[a], inv[b])]).abs());
                }
            }
        }
        assert!(worst < 1e-12);
    }
}
