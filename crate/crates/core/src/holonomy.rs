//! Holonomy algebra generated by the Nomizu operators, invariant-subspace
//! search, and flat-factor detection.
//!
//! The bracket span of all `(nab X)` contains the holonomy algebra and, for
//! spaces without a higher-dimensional flat factor, equals it. Reducibility
//! of the metric is decided by looking for a subspace invariant under every
//! operator of the closure.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Tolerances;
use crate::connection::ConnectionTable;
use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, mat_to_vec, right_nullspace, stack_rows, vec_to_mat};
use crate::nullity::nullity_space;
use crate::subspace::Subspace;

/// The Lie algebra generated by the Nomizu operators under commutators.
#[derive(Debug, Clone)]
pub struct HolonomyAlgebra {
    /// The generating operators (one per basis Killing field).
    pub generators: Vec<DMatrix<f64>>,
    /// Frobenius-orthonormal basis of the commutator closure.
    pub closure_basis: Vec<DMatrix<f64>>,
    /// Number of bracket rounds until the dimension stabilized.
    pub depth: usize,
}

impl HolonomyAlgebra {
    pub fn dim(&self) -> usize {
        self.closure_basis.len()
    }

    /// Frobenius-orthogonal projection residual of `m` against the closure.
    pub fn projection_residual(&self, m: &DMatrix<f64>) -> f64 {
        let norm = m.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut residual = m.clone();
        for b in &self.closure_basis {
            let coeff = m.dotc(b);
            residual -= b.scale(coeff);
        }
        residual.norm() / norm
    }
}

/// Iterated commutator closure of the Nomizu operators, with SVD-based span
/// maintenance until the dimension stabilizes.
pub fn kostant_span(table: &ConnectionTable, tol: &Tolerances) -> Result<HolonomyAlgebra> {
    let n = table.dim();
    let generators: Vec<DMatrix<f64>> = table.operators().to_vec();
    let limit = n * (n - 1) / 2 + 1;

    let vec_cols = |mats: &[DMatrix<f64>]| -> DMatrix<f64> {
        let mut cols = DMatrix::zeros(n * n, mats.len());
        for (k, m) in mats.iter().enumerate() {
            cols.set_column(k, &mat_to_vec(m));
        }
        cols
    };

    let (mut span, _) = crate::linalg::column_space(&vec_cols(&generators), tol.tol_alg);
    let mut depth = 0;
    loop {
        let basis: Vec<DMatrix<f64>> = (0..span.ncols())
            .map(|c| vec_to_mat(&span.column(c).into(), n))
            .collect();
        if basis.len() > limit {
            return Err(Error::ClosureOverflow { limit });
        }
        let mut candidates: Vec<DMatrix<f64>> = Vec::new();
        for a in 0..basis.len() {
            for b in (a + 1)..basis.len() {
                let bracket = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                let mut res = mat_to_vec(&bracket);
                // project off the current span
                res -= &span * (span.transpose() * &res);
                if res.norm() > tol.tol_alg {
                    candidates.push(vec_to_mat(&res, n));
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let mut all = DMatrix::zeros(n * n, span.ncols() + candidates.len());
        all.view_mut((0, 0), (n * n, span.ncols())).copy_from(&span);
        for (k, c) in candidates.iter().enumerate() {
            all.set_column(span.ncols() + k, &mat_to_vec(c));
        }
        let (next, _) = crate::linalg::column_space(&all, tol.tol_alg);
        if next.ncols() == span.ncols() {
            break;
        }
        span = next;
        depth += 1;
        if span.ncols() > limit {
            return Err(Error::ClosureOverflow { limit });
        }
    }

    let closure_basis: Vec<DMatrix<f64>> = (0..span.ncols())
        .map(|c| vec_to_mat(&span.column(c).into(), n))
        .collect();
    Ok(HolonomyAlgebra {
        generators,
        closure_basis,
        depth,
    })
}

/// Reproducible configuration for the randomized reducibility certificate.
#[derive(Debug, Clone, Copy)]
pub struct Certification {
    pub seed: u64,
    /// Number of independent generic combinations.
    pub rounds: usize,
}

impl Default for Certification {
    fn default() -> Self {
        Certification {
            seed: DEFAULT_SEED,
            rounds: 20,
        }
    }
}

/// Default seed of the certification RNG ("null" in ASCII).
pub const DEFAULT_SEED: u64 = 0x6e75_6c6c;

/// Outcome of the invariant-subspace search.
#[derive(Debug, Clone)]
pub enum SubspaceVerdict {
    Irreducible,
    Reducible {
        subspace: Subspace,
        /// All operators were zero; any line is invariant (split/flat factor).
        zero_algebra: bool,
    },
}

impl SubspaceVerdict {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, SubspaceVerdict::Irreducible)
    }
}

/// Finds a common non-trivial invariant subspace of `ops` or certifies that
/// none exists.
///
/// Method: a generic random combination of the (metric-skew) operators is
/// eigen-decomposed; every candidate eigenplane and the kernel is closed
/// under all operators. A proper closure is a verified invariant subspace.
/// Commuting families are handled exactly by testing the eigenpieces
/// themselves; otherwise the procedure repeats over `cert.rounds` independent
/// combinations, and rounds spoiled by eigenvalue clustering abstain. An
/// all-abstain run is surfaced as `Inconclusive`.
pub fn invariant_subspaces(
    ops: &[DMatrix<f64>],
    metric: &DMatrix<f64>,
    tol: &Tolerances,
    cert: &Certification,
) -> Result<SubspaceVerdict> {
    let n = metric.nrows();
    if n == 0 {
        return Ok(SubspaceVerdict::Irreducible);
    }

    let scale = ops.iter().map(|m| m.amax()).fold(0.0, f64::max);
    if ops.is_empty() || scale == 0.0 {
        let mut line = DMatrix::zeros(n, 1);
        line[(0, 0)] = 1.0;
        return Ok(SubspaceVerdict::Reducible {
            subspace: Subspace::from_orthonormal(line, tol.tol_sub),
            zero_algebra: true,
        });
    }

    // Work in a metric-orthonormal frame where the operators are skew.
    let l = cholesky_factor(metric)?;
    let l_t = l.transpose();
    let l_inv_t = l_t
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { eigenvalue: 0.0 })?;
    let skew_ops: Vec<DMatrix<f64>> = ops.iter().map(|m| &l_t * m * &l_inv_t).collect();

    // Map a subspace found in the orthonormal frame back to input coordinates.
    let back = |basis: &DMatrix<f64>| -> Subspace {
        Subspace::from_columns(&(&l_inv_t * basis), tol.tol_sub)
    };

    let invariance_residual = |basis: &DMatrix<f64>| -> f64 {
        let mut worst = 0.0f64;
        for op in &skew_ops {
            let image = op * basis;
            let residual = &image - basis * (basis.transpose() * &image);
            worst = worst.max(residual.amax() / scale.max(f64::MIN_POSITIVE));
        }
        worst
    };

    // Exact route for commuting (hence simultaneously decomposable) families.
    let mut max_comm = 0.0f64;
    for a in 0..skew_ops.len() {
        for b in (a + 1)..skew_ops.len() {
            let c = &skew_ops[a] * &skew_ops[b] - &skew_ops[b] * &skew_ops[a];
            max_comm = max_comm.max(c.amax());
        }
    }
    let commuting = max_comm <= tol.tol_alg * scale * scale;

    let mut ambiguous_rounds = 0;
    let rounds = if commuting { 1 } else { cert.rounds.max(1) };

    for round in 0..rounds {
        let mut rng_round = ChaCha8Rng::seed_from_u64(
            cert.seed ^ (round as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        );
        let mut combo = DMatrix::zeros(n, n);
        for op in &skew_ops {
            combo += op.scale(rng_round.random::<f64>() * 2.0 - 1.0);
        }

        let pieces = match eigenpieces(&combo, tol) {
            Ok(p) => p,
            Err(Error::EigenDegeneracy { gap }) => {
                if commuting {
                    // The exact route needs separated frequencies; there is
                    // no second chance for a commuting family.
                    return Err(Error::Inconclusive {
                        details: format!(
                            "commuting family with clustered frequencies (min relative gap {gap:e})"
                        ),
                    });
                }
                ambiguous_rounds += 1;
                continue;
            }
            Err(e) => return Err(e),
        };

        if commuting {
            // Every eigenpiece of a generic combination is invariant under a
            // commuting family; return the kernel first, then the smallest
            // proper piece.
            if pieces.len() <= 1 {
                return Ok(SubspaceVerdict::Irreducible);
            }
            let mut candidates: Vec<&DMatrix<f64>> = pieces
                .iter()
                .filter(|p| p.ncols() > 0 && p.ncols() < n)
                .collect();
            candidates.sort_by_key(|p| p.ncols());
            for piece in candidates {
                if invariance_residual(piece) <= 10.0 * tol.tol_alg {
                    return Ok(SubspaceVerdict::Reducible {
                        subspace: back(piece),
                        zero_algebra: false,
                    });
                }
            }
            return Ok(SubspaceVerdict::Irreducible);
        }

        // General family: close each candidate seed under all operators.
        for seed_basis in &pieces {
            if seed_basis.ncols() == 0 || seed_basis.ncols() >= n {
                continue;
            }
            let closed = close_under(seed_basis, &skew_ops, tol);
            if closed.ncols() < n && invariance_residual(&closed) <= 10.0 * tol.tol_alg {
                return Ok(SubspaceVerdict::Reducible {
                    subspace: back(&closed),
                    zero_algebra: false,
                });
            }
        }
    }

    if !commuting && ambiguous_rounds == rounds {
        return Err(Error::Inconclusive {
            details: format!(
                "all {rounds} certification rounds hit eigenvalue clustering"
            ),
        });
    }
    Ok(SubspaceVerdict::Irreducible)
}

/// Invariant eigenpieces of a skew matrix: the kernel first, then the real
/// two-planes of the non-zero eigenvalue pairs. Errors with `EigenDegeneracy`
/// when distinct non-zero frequencies collide.
pub(crate) fn eigenpieces(skew: &DMatrix<f64>, tol: &Tolerances) -> Result<Vec<DMatrix<f64>>> {
    let n = skew.nrows();
    // S^T S = -S^2 is positive semidefinite with doubled eigenvalues theta^2.
    let sq = skew.transpose() * skew;
    let (values, vectors) = crate::linalg::symmetric_eigenpairs(&sq);
    let max = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    // Cluster the ascending eigenvalues by relative gap.
    let cluster_gap = (tol.tol_alg * 100.0).max(1e-7);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in 0..n {
        let value = values[idx];
        match clusters.last_mut() {
            Some(cluster)
                if (value - values[*cluster.last().unwrap()]).abs() <= cluster_gap * max =>
            {
                cluster.push(idx)
            }
            _ => clusters.push(vec![idx]),
        }
    }

    let mut pieces = Vec::new();
    let mut kernel_cols: Vec<usize> = Vec::new();
    for cluster in &clusters {
        if values[cluster[0]] <= tol.tol_alg * max {
            kernel_cols.extend_from_slice(cluster);
        }
    }
    if !kernel_cols.is_empty() {
        let mut kernel = DMatrix::zeros(n, kernel_cols.len());
        for (c, &idx) in kernel_cols.iter().enumerate() {
            kernel.set_column(c, &vectors.column(idx));
        }
        pieces.push(kernel);
    }
    let mut degenerate_gap: Option<f64> = None;
    for cluster in &clusters {
        if values[cluster[0]] <= tol.tol_alg * max {
            continue;
        }
        if cluster.len() != 2 {
            // Distinct frequencies collide: the plane split is ambiguous.
            degenerate_gap = Some(
                cluster
                    .windows(2)
                    .map(|w| (values[w[1]] - values[w[0]]).abs() / max)
                    .fold(f64::INFINITY, f64::min),
            );
            let mut block = DMatrix::zeros(n, cluster.len());
            for (c, &idx) in cluster.iter().enumerate() {
                block.set_column(c, &vectors.column(idx));
            }
            pieces.push(block);
            continue;
        }
        let mut plane = DMatrix::zeros(n, 2);
        plane.set_column(0, &vectors.column(cluster[0]));
        plane.set_column(1, &vectors.column(cluster[1]));
        pieces.push(plane);
    }

    if let Some(gap) = degenerate_gap {
        return Err(Error::EigenDegeneracy { gap });
    }
    Ok(pieces)
}

/// Smallest subspace containing `seed` and invariant under all `ops`.
fn close_under(seed: &DMatrix<f64>, ops: &[DMatrix<f64>], tol: &Tolerances) -> DMatrix<f64> {
    let n = seed.nrows();
    let (mut span, _) = crate::linalg::column_space(seed, tol.tol_alg);
    loop {
        let mut all = DMatrix::zeros(n, span.ncols() * (ops.len() + 1));
        all.view_mut((0, 0), (n, span.ncols())).copy_from(&span);
        let mut at = span.ncols();
        for op in ops {
            let image = op * &span;
            all.view_mut((0, at), (n, span.ncols())).copy_from(&image);
            at += span.ncols();
        }
        let (next, _) = crate::linalg::column_space(&all, tol.tol_alg);
        if next.ncols() == span.ncols() || next.ncols() == n {
            return next;
        }
        span = next;
    }
}

/// Common kernel of the holonomy closure intersected with the nullity: the
/// tangent space of the local Euclidean factor candidate.
pub fn flat_factor_detector(
    hol: &HolonomyAlgebra,
    ct: &CurvatureTensor,
    tol: &Tolerances,
) -> Result<Subspace> {
    let nullity = nullity_space(ct, tol)?;
    if hol.closure_basis.is_empty() {
        return Ok(nullity);
    }
    let stacked = stack_rows(&hol.closure_basis);
    let (kernel, info) = right_nullspace(&stacked, tol.tol_alg);
    info.guard("flat factor kernel", tol.tol_alg)?;
    let common = Subspace::from_orthonormal(kernel, tol.tol_sub);
    Ok(common.intersection(&nullity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::nomizu_table;
    use crate::corpus;
    use crate::curvature::curvature_table;

    #[test]
    fn abelian_closure_is_zero_and_splits() {
        let alg = corpus::abelian(3);
        let tol = Tolerances::default();
        let table = nomizu_table(&alg).unwrap();
        let hol = kostant_span(&table, &tol).unwrap();
        assert_eq!(hol.dim(), 0);
        let verdict =
            invariant_subspaces(&hol.closure_basis, alg.metric(), &tol, &Certification::default())
                .unwrap();
        match verdict {
            SubspaceVerdict::Reducible { subspace, zero_algebra } => {
                assert!(zero_algebra);
                assert_eq!(subspace.dim(), 1);
                assert!((subspace.basis()[(0, 0)]).abs() == 1.0);
            }
            _ => panic!("zero algebra must split"),
        }
    }

    #[test]
    fn so3_closure_is_full_so3() {
        // Brute-force expectation: the three Nomizu generators of the
        // bi-invariant metric already close onto all skew matrices.
        let alg = corpus::so3_bi_invariant();
        let tol = Tolerances::default();
        let table = nomizu_table(&alg).unwrap();
        let hol = kostant_span(&table, &tol).unwrap();
        assert_eq!(hol.dim(), 3);
        let verdict =
            invariant_subspaces(&hol.closure_basis, alg.metric(), &tol, &Certification::default())
                .unwrap();
        assert!(verdict.is_irreducible());
    }

    #[test]
    fn block_rotation_exposes_fixed_plane() {
        // One generator: rotation in the (1,2)-plane, zero on the rest.
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -1.0;
        let tol = Tolerances::default();
        let verdict = invariant_subspaces(
            &[j],
            &DMatrix::identity(4, 4),
            &tol,
            &Certification::default(),
        )
        .unwrap();
        match verdict {
            SubspaceVerdict::Reducible { subspace, zero_algebra } => {
                assert!(!zero_algebra);
                // Kernel comes first: the fixed coordinate plane (3,4).
                assert_eq!(subspace.dim(), 2);
                let e3 = crate::algebra::basis_vector(4, 2);
                let e4 = crate::algebra::basis_vector(4, 3);
                assert!(subspace.contains_vector(&e3));
                assert!(subspace.contains_vector(&e4));
            }
            _ => panic!("expected the 0-block plane"),
        }
    }

    #[test]
    fn twin_rotation_blocks_are_surfaced_as_inconclusive() {
        // Two identical rotation frequencies: the eigenplane split is
        // ambiguous and the family is commuting, so the verdict must be
        // surfaced rather than guessed.
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -1.0;
        j[(2, 3)] = 1.0;
        j[(3, 2)] = -1.0;
        let tol = Tolerances::default();
        let verdict = invariant_subspaces(
            &[j],
            &DMatrix::identity(4, 4),
            &tol,
            &Certification::default(),
        );
        assert!(matches!(verdict, Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn product_flat_factor_is_the_line() {
        let alg = corpus::line_times_so3();
        let tol = Tolerances::default();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let hol = kostant_span(&table, &tol).unwrap();
        let flat = flat_factor_detector(&hol, &ct, &tol).unwrap();
        assert_eq!(flat.dim(), 1);
        assert!(flat.contains_vector(&crate::algebra::basis_vector(4, 0)));
    }

    #[test]
    fn so3_and_heisenberg_have_no_flat_factor() {
        for alg in [corpus::so3_bi_invariant(), corpus::heisenberg3()] {
            let tol = Tolerances::default();
            let table = nomizu_table(&alg).unwrap();
            let ct = curvature_table(&alg, &table).unwrap();
            let hol = kostant_span(&table, &tol).unwrap();
            let flat = flat_factor_detector(&hol, &ct, &tol).unwrap();
            assert_eq!(flat.dim(), 0);
        }
    }

    #[test]
    fn ambrose_singer_containment() {
        for alg in [corpus::so3_bi_invariant(), corpus::heisenberg3()] {
            let tol = Tolerances::default();
            let table = nomizu_table(&alg).unwrap();
            let ct = curvature_table(&alg, &table).unwrap();
            let hol = kostant_span(&table, &tol).unwrap();
            let n = alg.dim();
            for i in 0..n {
                for j in 0..n {
                    assert!(hol.projection_residual(&ct.operator_basis(i, j)) < 1e-10);
                }
            }
        }
    }
}
