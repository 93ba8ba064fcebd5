//! Transvections, the Cartan subspace, and the index of symmetry.
//!
//! Everything here is computed inside the input algebra, which presents a
//! lower bound for invariants defined over the full isometry algebra. The
//! reports label the result accordingly.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{basis_vector, MetricLieAlgebra, Tolerances};
use crate::connection::ConnectionTable;
use crate::curvature::{jacobi_operator, CurvatureTensor};
use crate::error::{Error, Result};
use crate::linalg::{mat_to_vec, right_nullspace, stack_rows};
use crate::nullity::DistributionChain;
use crate::subspace::{span_of, Subspace};

/// Transvections at the base point and derived symmetry data.
#[derive(Debug, Clone)]
pub struct TransvectionSet {
    /// Basis of the Cartan subspace inside the input algebra: solutions of
    /// `(nab X) = 0`.
    pub cartan_basis: Vec<DVector<f64>>,
    /// Values of the Cartan subspace at the base point.
    pub symmetric_subspace: Subspace,
    /// Transvections commuting with the whole Cartan subspace.
    pub abelian_part_basis: Vec<DVector<f64>>,
    /// Values of the abelian part at the base point.
    pub flat_symmetry: Subspace,
    /// Transvections with vanishing Jacobi operator.
    pub null_jacobi_basis: Vec<DVector<f64>>,
    /// Dimension of the symmetric subspace, relative to the input algebra.
    pub index_of_symmetry: usize,
    pub co_index: usize,
}

/// Computes the Cartan subspace (kernel of `X -> (nab X)`), its abelian part,
/// the null-Jacobi transvections, and the relative index of symmetry.
///
/// The null-Jacobi condition is quadratic; it is evaluated on the computed
/// Cartan basis and the accepted set is re-verified for linearity on pairwise
/// sums, since linearity is a theorem only under hypotheses the tool cannot
/// always confirm.
pub fn transvection_set(
    alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    ct: &CurvatureTensor,
    tol: &Tolerances,
) -> Result<TransvectionSet> {
    let n = alg.dim();

    // Kernel of the linear map X -> (nab X).
    let mut stacked = DMatrix::zeros(n * n, n);
    for i in 0..n {
        stacked.set_column(i, &mat_to_vec(table.operator(i)));
    }
    let (cartan, info) = right_nullspace(&stacked, tol.tol_alg);
    info.guard("cartan subspace", tol.tol_alg)?;
    let cartan_basis: Vec<DVector<f64>> =
        (0..cartan.ncols()).map(|c| cartan.column(c).into()).collect();
    let symmetric_subspace = Subspace::from_orthonormal(cartan.clone(), tol.tol_sub);

    // Abelian part: [X, cartan] = 0, solved in Cartan coordinates.
    let abelian_part_basis: Vec<DVector<f64>> = if cartan_basis.is_empty() {
        Vec::new()
    } else {
        let r = cartan_basis.len();
        let blocks: Vec<DMatrix<f64>> = cartan_basis
            .iter()
            .map(|p| {
                let mut block = DMatrix::zeros(n, r);
                for (c, q) in cartan_basis.iter().enumerate() {
                    block.set_column(c, &alg.bracket(q, p));
                }
                block
            })
            .collect();
        let (alpha, info) = right_nullspace(&stack_rows(&blocks), tol.tol_alg);
        info.guard("abelian part", tol.tol_alg)?;
        (0..alpha.ncols())
            .map(|c| &cartan * DVector::from(alpha.column(c)))
            .collect()
    };
    let flat_symmetry = span_of(&abelian_part_basis, n, tol.tol_sub);

    // Null-Jacobi transvections: filter the Cartan basis, then verify that the
    // accepted set is closed under sums.
    let jacobi_scale = curvature_scale(ct).max(f64::MIN_POSITIVE);
    let mut null_jacobi_basis = Vec::new();
    for p in &cartan_basis {
        let j = jacobi_operator(ct, p)?;
        if j.amax() <= tol.tol_alg * jacobi_scale {
            null_jacobi_basis.push(p.clone());
        }
    }
    for a in 0..null_jacobi_basis.len() {
        for b in (a + 1)..null_jacobi_basis.len() {
            let s = &null_jacobi_basis[a] + &null_jacobi_basis[b];
            let j = jacobi_operator(ct, &s)?;
            let residual = j.amax() / jacobi_scale;
            if residual > 10.0 * tol.tol_alg {
                return Err(Error::NonlinearNullJacobiSet { residual });
            }
        }
    }

    let index_of_symmetry = symmetric_subspace.dim();
    Ok(TransvectionSet {
        cartan_basis,
        symmetric_subspace,
        abelian_part_basis,
        flat_symmetry,
        null_jacobi_basis,
        index_of_symmetry,
        co_index: n - index_of_symmetry,
    })
}

fn curvature_scale(ct: &CurvatureTensor) -> f64 {
    let n = ct.dim();
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            scale = scale.max(ct.operator_basis(i, j).amax());
        }
    }
    scale
}

/// Residual norms certifying a witness transvection, all evaluated on the
/// unit-normalized witness vector.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    /// `|(nab Y)|`, must vanish (transvection).
    pub connection_norm: f64,
    /// `|R_{., Y} Y|`, must vanish (null Jacobi operator).
    pub jacobi_norm: f64,
    /// `|ad_Y^2|` on the algebra, must vanish.
    pub ad_squared_norm: f64,
    /// `|ad_Y|`, must *not* vanish.
    pub ad_norm: f64,
    /// Threshold the first three norms are held to; `ad_norm` must exceed it.
    pub threshold: f64,
}

impl WitnessCertificate {
    pub fn passes(&self) -> bool {
        self.connection_norm <= self.threshold
            && self.jacobi_norm <= self.threshold
            && self.ad_squared_norm <= self.threshold
            && self.ad_norm > self.threshold
    }
}

/// An adapted transvection: value in the adapted distribution, not in the
/// nullity, with certified nilpotency data.
#[derive(Debug, Clone)]
pub struct TransvectionWitness {
    /// Coefficient vector, scaled so its first maximal coordinate is one.
    pub vector: DVector<f64>,
    /// Base-point direction and basis field that produced the witness, when
    /// the direct search succeeded.
    pub source: Option<WitnessSource>,
    pub certificate: WitnessCertificate,
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessSource {
    /// Coordinate axis whose nullity projection served as the direction.
    pub nullity_axis: usize,
    /// Index of the basis field that was differentiated.
    pub field: usize,
}

fn certificate_for(
    alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    ct: &CurvatureTensor,
    y: &DVector<f64>,
    threshold: f64,
) -> Result<WitnessCertificate> {
    let unit = y / y.norm();
    let ad = alg.ad(&unit);
    Ok(WitnessCertificate {
        connection_norm: table.operator_of(&unit).amax(),
        jacobi_norm: jacobi_operator(ct, &unit)?.amax(),
        ad_squared_norm: (&ad * &ad).amax(),
        ad_norm: ad.amax(),
        threshold,
    })
}

/// Scales `y` so that its first coordinate of maximal absolute value is `+1`.
fn canonical_scale(y: &DVector<f64>) -> DVector<f64> {
    let mut pivot = 0;
    let mut best = 0.0f64;
    for (i, value) in y.iter().enumerate() {
        if value.abs() > best {
            best = value.abs();
            pivot = i;
        }
    }
    y / y[pivot]
}

/// Searches the adapted distribution for a transvection with value outside
/// the nullity and certifies it.
///
/// The search is deterministic: coordinate axes are projected onto the
/// nullity in order and differentiated against the basis fields in order;
/// the first candidate that is a transvection wins. A subspace-level search
/// over (Cartan subspace) intersected with (adapted distribution) is the
/// fallback.
pub fn adapted_transvection_witness(
    alg: &MetricLieAlgebra,
    table: &ConnectionTable,
    ct: &CurvatureTensor,
    chain: &DistributionChain,
    tol: &Tolerances,
) -> Result<TransvectionWitness> {
    let n = alg.dim();
    if chain.nullity.dim() == 0 || chain.nullity.is_full() {
        return Err(Error::Precondition(
            "witness search requires a non-trivial nullity".into(),
        ));
    }
    let conn_scale = table
        .operators()
        .iter()
        .map(|op| op.amax())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    for axis in 0..n {
        let v = chain.nullity.project(&basis_vector(n, axis));
        if v.norm() <= 10.0 * tol.tol_alg {
            continue;
        }
        for field in 0..n {
            let y = table.operator(field) * &v;
            if y.norm() <= 10.0 * tol.tol_alg * conn_scale {
                continue;
            }
            if chain.nullity.membership_residual(&y) <= tol.tol_sub {
                continue;
            }
            if table.operator_of(&y).amax() > tol.tol_alg * conn_scale * y.norm() {
                continue;
            }
            let vector = canonical_scale(&y);
            let certificate = certificate_for(alg, table, ct, &vector, tol.tol_alg)?;
            if certificate.passes() {
                return Ok(TransvectionWitness {
                    vector,
                    source: Some(WitnessSource {
                        nullity_axis: axis,
                        field,
                    }),
                    certificate,
                });
            }
        }
    }

    // Fallback: any direction of (cartan ∩ adapted) outside the nullity.
    let tset = transvection_set(alg, table, ct, tol)?;
    let candidates = tset.symmetric_subspace.intersection(&chain.adapted);
    for b in candidates.basis_vectors() {
        if chain.nullity.membership_residual(&b) <= tol.tol_sub {
            continue;
        }
        let vector = canonical_scale(&b);
        let certificate = certificate_for(alg, table, ct, &vector, tol.tol_alg)?;
        if certificate.passes() {
            return Ok(TransvectionWitness {
                vector,
                source: None,
                certificate,
            });
        }
    }

    Err(Error::NoWitness)
}
