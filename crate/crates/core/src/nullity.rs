//! Nullity distribution and the tower of invariant distributions at the base
//! point: nullity, adapted, first and second osculating, bounded.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{MetricLieAlgebra, Tolerances};
use crate::connection::ConnectionTable;
use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::right_nullspace;
use crate::subspace::Subspace;

/// All distributions of the tower at the base point.
#[derive(Debug, Clone)]
pub struct DistributionChain {
    /// Nullity of the curvature tensor.
    pub nullity: Subspace,
    /// Adapted distribution: span of `nab_w Z` over nullity vectors `w`.
    pub adapted: Subspace,
    /// First osculating distribution: nullity + adapted.
    pub osc1: Subspace,
    /// Second osculating distribution.
    pub osc2: Subspace,
    /// Bounded distribution (values of the bounded algebra).
    pub bounded: Subspace,
    /// Basis of the bounded algebra as coefficient vectors in the algebra.
    pub bounded_algebra_basis: Vec<DVector<f64>>,
    /// Codimension of the nullity.
    pub conullity: usize,
}

/// Kernel of the stacked map `v -> (R_{v, e_j})_j` at `tol_alg`.
pub fn nullity_space(ct: &CurvatureTensor, tol: &Tolerances) -> Result<Subspace> {
    let n = ct.dim();
    let mut stacked = DMatrix::zeros(n * n * n, n);
    for i in 0..n {
        let mut rows = DVector::zeros(n * n * n);
        for j in 0..n {
            let op = ct.operator_basis(i, j);
            rows.rows_mut(j * n * n, n * n).copy_from_slice(op.as_slice());
        }
        stacked.set_column(i, &rows);
    }
    let (kernel, info) = right_nullspace(&stacked, tol.tol_alg);
    info.guard("nullity kernel", tol.tol_alg)?;
    Ok(Subspace::from_orthonormal(kernel, tol.tol_sub))
}

/// Relative residual of `v` against the nullity condition
/// `R_{v, e_j} = 0` for all `j`.
pub fn nullity_membership_residual(ct: &CurvatureTensor, v: &DVector<f64>) -> f64 {
    let n = ct.dim();
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            scale = scale.max(ct.operator_basis(i, j).amax());
        }
    }
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..n {
        let ej = crate::algebra::basis_vector(n, j);
        let mut op = DMatrix::zeros(n, n);
        for k in 0..n {
            let ek = crate::algebra::basis_vector(n, k);
            op.set_column(k, &ct.apply(v, &ej, &ek));
        }
        worst = worst.max(op.amax());
    }
    worst / (scale * norm)
}

/// Adapted and osculating distributions derived from a computed nullity.
#[derive(Debug, Clone)]
pub struct AdaptedOsculating {
    pub adapted: Subspace,
    pub osc1: Subspace,
    pub osc2: Subspace,
}

/// `adapted = span{nab_w Z}`, `osc1 = nullity + adapted`,
/// `osc2 = osc1 + span{nab_v Z : v in adapted}`.
pub fn adapted_and_osculating(
    _alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    nullity: &Subspace,
) -> AdaptedOsculating {
    let adapted = derivative_span(table, nullity);
    let osc1 = nullity.sum(&adapted);
    let osc2 = osc1.sum(&derivative_span(table, &adapted));
    AdaptedOsculating { adapted, osc1, osc2 }
}

/// Span of `{op_i(v) : i basis field, v in cols(seed)}`.
fn derivative_span(table: &ConnectionTable, seed: &Subspace) -> Subspace {
    let n = table.dim();
    if seed.dim() == 0 {
        return Subspace::zero(n, seed.tol());
    }
    let mut cols = DMatrix::zeros(n, n * seed.dim());
    let mut at = 0;
    for op in table.operators() {
        for w in 0..seed.dim() {
            let v: DVector<f64> = seed.basis().column(w).into();
            cols.set_column(at, &(op * v));
            at += 1;
        }
    }
    Subspace::from_columns(&cols, seed.tol())
}

/// The bounded algebra and its distribution at the base point.
#[derive(Debug, Clone)]
pub struct BoundedAlgebra {
    /// Coefficient vectors of Killing fields `U` with `nab_{nullity} U`
    /// staying inside the nullity.
    pub algebra_basis: Vec<DVector<f64>>,
    pub distribution: Subspace,
    /// Largest bracket-closure residual observed during the subalgebra check.
    pub closure_residual: f64,
}

/// Solves the linear condition `(nab U)(nullity) inside nullity` and checks
/// the solution space is a Lie subalgebra.
pub fn bounded_algebra(
    alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    nullity: &Subspace,
    tol: &Tolerances,
) -> Result<BoundedAlgebra> {
    let n = alg.dim();
    let blocks: Vec<DMatrix<f64>> = (0..nullity.dim())
        .map(|w| {
            let v: DVector<f64> = nullity.basis().column(w).into();
            // Column u of the block: component of op_u(v) orthogonal to
            // the nullity.
            let mut block = DMatrix::zeros(n, n);
            for (u, op) in table.operators().iter().enumerate() {
                let image = op * &v;
                block.set_column(u, &(&image - nullity.project(&image)));
            }
            block
        })
        .collect();
    let kernel = if blocks.is_empty() {
        DMatrix::identity(n, n)
    } else {
        let (kernel, info) = right_nullspace(&crate::linalg::stack_rows(&blocks), tol.tol_alg);
        info.guard("bounded algebra", tol.tol_alg)?;
        kernel
    };

    let distribution = Subspace::from_orthonormal(kernel.clone(), tol.tol_sub);
    let algebra_basis: Vec<DVector<f64>> =
        (0..kernel.ncols()).map(|c| kernel.column(c).into()).collect();

    // The solution space must be closed under the bracket. Residuals are
    // measured against the bracket-table scale; the basis vectors are unit
    // length, so a vanishing bracket must not be mistaken for a violation.
    let mut bracket_scale = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            bracket_scale = bracket_scale.max(alg.bracket_basis(i, j).amax());
        }
    }
    let mut closure_residual = 0.0f64;
    if bracket_scale > 0.0 {
        for a in &algebra_basis {
            for b in &algebra_basis {
                let br = alg.bracket(a, b);
                let outside = (&br - distribution.project(&br)).norm() / bracket_scale;
                closure_residual = closure_residual.max(outside);
            }
        }
    }
    if closure_residual > 10.0 * tol.tol_alg {
        return Err(Error::SubalgebraClosureViolation {
            residual: closure_residual,
        });
    }

    Ok(BoundedAlgebra {
        algebra_basis,
        distribution,
        closure_residual,
    })
}

/// Iterates `H -> H + span{nab_v Z : v in H}` until stabilization or
/// `max_steps`, returning the strictly increasing prefix (seed included).
pub fn osculating_tower(
    _alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    seed: &Subspace,
    max_steps: usize,
) -> Vec<Subspace> {
    let mut tower = vec![seed.clone()];
    for _ in 0..max_steps {
        let current = tower.last().unwrap();
        let next = current.sum(&derivative_span(table, current));
        if next.dim() == current.dim() {
            break;
        }
        tower.push(next);
    }
    tower
}

/// One inclusion of the chain with its residual and strictness flag.
#[derive(Debug, Clone)]
pub struct InclusionCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Strictness is decided by dimension difference, never by residuals.
    pub strict: bool,
    pub residual: f64,
}

/// Verdict on the chain of distributions.
#[derive(Debug, Clone)]
pub struct ChainVerdict {
    pub ambient_dim: usize,
    pub nullity_dim: usize,
    pub adapted_dim: usize,
    pub osc1_dim: usize,
    pub osc2_dim: usize,
    pub bounded_dim: usize,
    pub conullity: usize,
    /// Nullity is `{0}` or the whole space, or matches a detected flat factor.
    pub trivial_nullity: bool,
    pub flat_factor_detected: bool,
    pub inclusions: Vec<InclusionCheck>,
    /// The strict chain `0 != nullity < osc1 < osc2 <= bounded < full`.
    pub strict_chain: bool,
    pub k3: Option<K3Specialization>,
    pub notes: Vec<String>,
}

/// The specialization forced by conullity 3.
#[derive(Debug, Clone)]
pub struct K3Specialization {
    pub osc1_codim_two: bool,
    pub osc2_equals_bounded: bool,
    pub bounded_codim_one: bool,
}

/// Records dimensions, inclusions and strictness of a computed chain.
pub fn chain_report(chain: &DistributionChain, flat_factor_detected: bool) -> ChainVerdict {
    let n = chain.nullity.ambient_dim();
    let trivial = chain.nullity.dim() == 0 || chain.nullity.is_full() || flat_factor_detected;

    let pairs: [(&'static str, &Subspace, &Subspace); 3] = [
        ("nullity in osc1", &chain.nullity, &chain.osc1),
        ("osc1 in osc2", &chain.osc1, &chain.osc2),
        ("osc2 in bounded", &chain.osc2, &chain.bounded),
    ];
    let mut inclusions: Vec<InclusionCheck> = pairs
        .iter()
        .map(|(name, small, big)| InclusionCheck {
            name,
            holds: big.contains(small),
            strict: big.dim() > small.dim(),
            residual: big.inclusion_residual(small),
        })
        .collect();
    inclusions.push(InclusionCheck {
        name: "bounded in full space",
        holds: true,
        strict: chain.bounded.dim() < n,
        residual: 0.0,
    });

    let strict_chain = !trivial
        && chain.nullity.dim() > 0
        && inclusions[0].holds
        && inclusions[0].strict
        && inclusions[1].holds
        && inclusions[1].strict
        && inclusions[2].holds
        && inclusions[3].strict;

    let mut notes = Vec::new();
    if trivial {
        notes.push(if chain.nullity.dim() == 0 {
            "trivial nullity: the nullity is zero".to_string()
        } else if chain.nullity.is_full() {
            "trivial nullity / flat: the nullity is the whole tangent space".to_string()
        } else {
            "nullity matches the detected flat factor".to_string()
        });
    }

    let k3 = if chain.conullity == 3 && !trivial {
        Some(K3Specialization {
            osc1_codim_two: n - chain.osc1.dim() == 2,
            osc2_equals_bounded: chain.osc2.equals(&chain.bounded),
            bounded_codim_one: n - chain.bounded.dim() == 1,
        })
    } else {
        None
    };

    ChainVerdict {
        ambient_dim: n,
        nullity_dim: chain.nullity.dim(),
        adapted_dim: chain.adapted.dim(),
        osc1_dim: chain.osc1.dim(),
        osc2_dim: chain.osc2.dim(),
        bounded_dim: chain.bounded.dim(),
        conullity: chain.conullity,
        trivial_nullity: trivial,
        flat_factor_detected,
        inclusions,
        strict_chain,
        k3,
        notes,
    }
}

/// Computes the whole chain for one algebra.
pub fn distribution_chain(
    alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    ct: &CurvatureTensor,
    tol: &Tolerances,
) -> Result<DistributionChain> {
    let nullity = nullity_space(ct, tol)?;
    let osc = adapted_and_osculating(alg, table, &nullity);
    let bounded = bounded_algebra(alg, table, &nullity, tol)?;
    let conullity = alg.dim() - nullity.dim();
    Ok(DistributionChain {
        nullity,
        adapted: osc.adapted,
        osc1: osc.osc1,
        osc2: osc.osc2,
        bounded: bounded.distribution,
        bounded_algebra_basis: bounded.algebra_basis,
        conullity,
    })
}
