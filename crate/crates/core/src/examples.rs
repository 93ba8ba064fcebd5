//! The built-in solvable example family `R^d x| R`, its certificate, the
//! skew-matrix invariant-subspace check, and the geodesic transport check on
//! the matrix-group realization.
//!
//! The family is generated by `d + 1` upper-triangular matrices: nilpotent
//! columns `E_1, ..., E_d` and a rotation-plus-dilation block `A` acting on
//! them. With the normalization `trace(A A^T) = 1` the basis is orthonormal
//! for the left-invariant metric, the nullity has codimension exactly 3, the
//! index of symmetry is `n - 2`, and the Ricci spectrum has four distinct
//! values.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{
    basis_vector, structure_predicates, validate, MetricLieAlgebra, Tolerances,
};
use crate::connection::nomizu_table;
use crate::curvature::curvature_table;
use crate::error::{Error, Result};
use crate::holonomy::{
    eigenpieces, flat_factor_detector, invariant_subspaces, kostant_span, Certification,
};
use crate::nullity::{
    chain_report, distribution_chain, nullity_membership_residual,
};
use crate::symmetry::{adapted_transvection_witness, transvection_set, TransvectionWitness};
use crate::subspace::span_of;

/// Generator data for one member of the example family.
#[derive(Debug, Clone)]
pub struct ExampleSpec {
    d: usize,
    a: f64,
    matrix: DMatrix<f64>,
    mode: ExampleMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleMode {
    /// `A = a [[M, e1], [-e1^T, 1]]` with the normalization
    /// `a^2 = 1 / (3 + (n-2)(n-3))`.
    PaperDefault,
    /// A user-supplied `d x d` matrix; analysis runs but nothing is certified.
    CustomMatrix,
}

impl ExampleSpec {
    /// The default family member of algebra dimension `n = d + 1`.
    pub fn default_family(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::BadDimension { min: 3, got: d });
        }
        let n = d + 1;
        let a = (1.0 / (3.0 + ((n - 2) * (n - 3)) as f64)).sqrt();
        let m = skew_seed(d - 1);
        let mut matrix = DMatrix::zeros(d, d);
        matrix.view_mut((0, 0), (d - 1, d - 1)).copy_from(&m);
        matrix[(0, d - 1)] = 1.0;
        matrix[(d - 1, 0)] = -1.0;
        matrix[(d - 1, d - 1)] = 1.0;
        matrix.scale_mut(a);
        Ok(ExampleSpec {
            d,
            a,
            matrix,
            mode: ExampleMode::PaperDefault,
        })
    }

    /// A custom variant acting by the given `d x d` matrix.
    pub fn custom(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.ncols(),
            });
        }
        if d < 3 {
            return Err(Error::BadDimension { min: 3, got: d });
        }
        Ok(ExampleSpec {
            d,
            a: 0.0,
            matrix,
            mode: ExampleMode::CustomMatrix,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Algebra dimension `n = d + 1`.
    pub fn n(&self) -> usize {
        self.d + 1
    }

    /// Normalization constant; zero in custom mode.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mode(&self) -> ExampleMode {
        self.mode
    }

    /// The `(d+1) x (d+1)` matrix realizations of the basis: the nilpotent
    /// columns first, the acting block last.
    pub fn basis_matrices(&self) -> Vec<DMatrix<f64>> {
        let d = self.d;
        let mut out = Vec::with_capacity(d + 1);
        for i in 0..d {
            let mut e = DMatrix::zeros(d + 1, d + 1);
            e[(i, d)] = 1.0;
            out.push(e);
        }
        let mut a = DMatrix::zeros(d + 1, d + 1);
        a.view_mut((0, 0), (d, d)).copy_from(&self.matrix);
        out.push(a);
        out
    }
}

/// The `m x m` skew matrix with `+1` everywhere above the diagonal.
pub fn skew_seed(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => 1.0,
            Ordering::Greater => -1.0,
            Ordering::Equal => 0.0,
        }
    })
}

/// Builds the metric Lie algebra of the family member: brackets are the
/// matrix commutators of the basis realizations, and the metric is the
/// identity in this basis.
pub fn build_example(spec: &ExampleSpec) -> MetricLieAlgebra {
    let d = spec.d;
    let n = d + 1;
    let mut labels: Vec<String> = (1..=d).map(|i| format!("E{i}")).collect();
    labels.push("A".to_string());
    let a_matrix = spec.matrix.clone();
    MetricLieAlgebra::from_upper_brackets(labels, DMatrix::identity(n, n), |i, j| {
        // Pairs with i < j: [E_i, E_j] = 0 and [E_i, A] = -(column i of A).
        let mut c = DVector::zeros(n);
        if j == n - 1 && i < d {
            for k in 0..d {
                c[k] = -a_matrix[(k, i)];
            }
        }
        c
    })
    .expect("example family dimensions are consistent")
}

/// Closed-form operator `(nab E_d)` of the default family.
pub fn closed_form_nomizu_ed(spec: &ExampleSpec) -> DMatrix<f64> {
    let d = spec.d;
    let mut out = DMatrix::zeros(d + 1, d + 1);
    out[(d - 1, d)] = spec.a;
    out[(d, d - 1)] = -spec.a;
    out
}

/// Closed-form operator `(nab A)` of the default family.
pub fn closed_form_nomizu_a(spec: &ExampleSpec) -> DMatrix<f64> {
    let d = spec.d;
    let a = spec.a;
    let mut out = DMatrix::zeros(d + 1, d + 1);
    out.view_mut((0, 0), (d - 1, d - 1))
        .copy_from(&skew_seed(d - 1).scale(-a));
    out[(d - 1, 0)] = a;
    out[(0, d - 1)] = -a;
    out
}

/// The four-value Ricci spectrum of the default family, ascending, with the
/// zero eigenvalue carrying multiplicity `n - 3`.
pub fn closed_form_ricci_spectrum(spec: &ExampleSpec) -> Vec<f64> {
    let n = spec.n();
    let a2 = spec.a * spec.a;
    let phi = 5.0f64.sqrt();
    let mut out = vec![a2 * (-1.0 - phi) / 2.0, -a2];
    out.extend(std::iter::repeat(0.0).take(n - 3));
    out.push(a2 * (-1.0 + phi) / 2.0);
    out
}

/// One checked clause of the family certificate.
#[derive(Debug, Clone)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    /// Residual compared against the threshold; for yes/no clauses 0 or 1.
    pub residual: f64,
    pub threshold: f64,
}

impl Clause {
    fn residual_clause(name: &str, residual: f64, threshold: f64) -> Self {
        Clause {
            name: name.to_string(),
            passed: residual <= threshold,
            residual,
            threshold,
        }
    }

    fn bool_clause(name: &str, passed: bool) -> Self {
        Clause {
            name: name.to_string(),
            passed,
            residual: if passed { 0.0 } else { 1.0 },
            threshold: 0.0,
        }
    }
}

/// The full certified verdict for one default-family member.
#[derive(Debug, Clone)]
pub struct FamilyCertificate {
    pub d: usize,
    pub n: usize,
    pub a: f64,
    /// Observed Ricci spectrum, ascending.
    pub ricci_eigenvalues: Vec<f64>,
    /// Observed scalar curvature.
    pub scalar_curvature: f64,
    pub clauses: Vec<Clause>,
    pub notes: Vec<String>,
}

impl FamilyCertificate {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Clause> {
        self.clauses.iter().find(|c| !c.passed)
    }
}

/// Evaluates every certificate clause for a default-family member without
/// failing on clause violations (hard numerical errors still propagate).
pub fn family_certificate(
    spec: &ExampleSpec,
    tol: &Tolerances,
    cert: &Certification,
) -> Result<FamilyCertificate> {
    if spec.mode != ExampleMode::PaperDefault {
        return Err(Error::BadMode);
    }
    let d = spec.d;
    let n = spec.n();
    let a = spec.a;
    let alg = build_example(spec);
    let mut clauses = Vec::new();
    let mut notes = Vec::new();

    let validation = validate(&alg, tol);
    clauses.push(Clause::bool_clause("input validates", validation.is_valid()));

    let table = nomizu_table(&alg)?;
    let mut transvection_residual = 0.0f64;
    for i in 0..(d - 1) {
        transvection_residual = transvection_residual.max(table.operator(i).amax());
    }
    clauses.push(Clause::residual_clause(
        "operators of E1..E(d-1) vanish",
        transvection_residual,
        1e-12,
    ));
    clauses.push(Clause::residual_clause(
        "operator of Ed matches its closed form",
        (table.operator(d - 1) - closed_form_nomizu_ed(spec)).amax(),
        1e-12,
    ));
    clauses.push(Clause::residual_clause(
        "operator of A matches its closed form",
        (table.operator(d) - closed_form_nomizu_a(spec)).amax(),
        1e-12,
    ));

    let ct = curvature_table(&alg, &table)?;
    let chain = distribution_chain(&alg, &table, &ct, tol)?;

    let expected_nullity = span_of(
        &(1..(d - 1)).map(|i| basis_vector(n, i)).collect::<Vec<_>>(),
        n,
        tol.tol_sub,
    );
    let nullity_residual = expected_nullity
        .inclusion_residual(&chain.nullity)
        .max(chain.nullity.inclusion_residual(&expected_nullity));
    clauses.push(Clause::residual_clause(
        "nullity equals span{E2..E(d-1)}",
        if chain.nullity.dim() == d.saturating_sub(2) {
            nullity_residual
        } else {
            1.0
        },
        tol.tol_sub,
    ));
    notes.push(format!(
        "nullity kernel resolved to span{{E2..E{}}} of dimension {}; the direction E{} is \
         excluded because its curvature pairing with A is non-zero",
        d - 1,
        chain.nullity.dim(),
        d
    ));

    clauses.push(Clause::bool_clause(
        "chain dimensions are (n-3, n-2, n-1) with conullity 3",
        chain.nullity.dim() == n - 3
            && chain.osc1.dim() == n - 2
            && chain.osc2.dim() == n - 1
            && chain.bounded.dim() == n - 1
            && chain.conullity == 3,
    ));

    let hol = kostant_span(&table, tol)?;
    let flat = flat_factor_detector(&hol, &ct, tol)?;
    let verdict = chain_report(&chain, flat.dim() > 0 && flat.equals(&chain.nullity));
    clauses.push(Clause::bool_clause("strict chain", verdict.strict_chain));

    let ricci = ct.ricci();
    let expected = closed_form_ricci_spectrum(spec);
    let spectrum_residual = ricci
        .eigenvalues
        .iter()
        .zip(expected.iter())
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    clauses.push(Clause::residual_clause(
        "Ricci spectrum matches the four-value closed form",
        spectrum_residual,
        1e-9,
    ));
    clauses.push(Clause::residual_clause(
        "scalar curvature equals -2 a^2",
        (ricci.scalar + 2.0 * a * a).abs(),
        1e-9,
    ));
    notes.push(
        "the non-zero Ricci eigenvalues live on the orthogonal complement of the nullity, \
         spanned at the base point by E1, Ed and A"
            .to_string(),
    );

    let subspace_verdict = invariant_subspaces(&hol.closure_basis, alg.metric(), tol, cert)?;
    clauses.push(Clause::bool_clause(
        "holonomy closure acts irreducibly",
        subspace_verdict.is_irreducible(),
    ));
    clauses.push(Clause::bool_clause("no flat factor", flat.dim() == 0));

    let structure = structure_predicates(&alg, tol)?;
    clauses.push(Clause::bool_clause("solvable", structure.solvable));
    clauses.push(Clause::residual_clause(
        "not unimodular: |trace ad A| stays above threshold",
        // pass when the defect is LARGE: encode as threshold on the inverse gap
        if structure.unimodular_defects[n - 1].abs() > 1e-8 {
            0.0
        } else {
            1.0
        },
        0.5,
    ));

    let tset = transvection_set(&alg, &table, &ct, tol)?;
    clauses.push(Clause::bool_clause(
        "relative index of symmetry is n-2 (co-index 2)",
        tset.index_of_symmetry == n - 2 && tset.co_index == 2,
    ));

    Ok(FamilyCertificate {
        d,
        n,
        a,
        ricci_eigenvalues: ricci.eigenvalues.clone(),
        scalar_curvature: ricci.scalar,
        clauses,
        notes,
    })
}

/// Runs the certificate and fails with the first violated clause.
pub fn verify_family(
    spec: &ExampleSpec,
    tol: &Tolerances,
    cert: &Certification,
) -> Result<FamilyCertificate> {
    let certificate = family_certificate(spec, tol, cert)?;
    if let Some(clause) = certificate.first_failure() {
        return Err(Error::CertificateFailure {
            clause: clause.name.clone(),
            details: format!(
                "residual {:e} exceeds threshold {:e}",
                clause.residual, clause.threshold
            ),
        });
    }
    Ok(certificate)
}

/// Verdict of the invariant-subspace sweep of the seed skew matrix.
#[derive(Debug, Clone)]
pub struct SeedInvarianceVerdict {
    /// Size of the skew matrix (`d - 1`).
    pub matrix_size: usize,
    /// True when no proper invariant subspace lies inside the hyperplane
    /// orthogonal to the first coordinate.
    pub none_contained: bool,
    pub subspaces_tested: usize,
    /// Kernel direction when the matrix size is odd, normalized with a
    /// positive first coordinate.
    pub kernel: Option<DVector<f64>>,
    /// Smallest first-coordinate mass seen over all invariant subspaces; a
    /// large value means every subspace sticks out of the hyperplane.
    pub closest_call: f64,
}

/// Enumerates all real invariant subspaces of the seed skew matrix (kernel
/// plus sums of eigenplanes) and tests each for containment in the hyperplane
/// `{first coordinate = 0}`.
pub fn skew_seed_invariance_check(d: usize, tol: &Tolerances) -> Result<SeedInvarianceVerdict> {
    if d < 3 {
        return Err(Error::BadDimension { min: 3, got: d });
    }
    let m = d - 1;
    let seed = skew_seed(m);
    let pieces = eigenpieces(&seed, tol)?;

    let kernel = pieces
        .iter()
        .find(|p| (&seed * *p).amax() <= tol.tol_alg * seed.amax() && p.ncols() == 1)
        .map(|p| {
            let mut v: DVector<f64> = p.column(0).into();
            if v[0] < 0.0 {
                v = -v;
            }
            v
        });

    // All invariant subspaces are sums of the primitive pieces.
    let count = pieces.len();
    let mut none_contained = true;
    let mut closest_call = f64::INFINITY;
    let mut tested = 0usize;
    for mask in 1u64..(1u64 << count) {
        let members: Vec<&DMatrix<f64>> = (0..count)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| &pieces[k])
            .collect();
        let cols: usize = members.iter().map(|p| p.ncols()).sum();
        let mut basis = DMatrix::zeros(m, cols);
        let mut at = 0;
        for p in members {
            basis.view_mut((0, at), (m, p.ncols())).copy_from(p);
            at += p.ncols();
        }
        tested += 1;
        // Contained in the hyperplane iff the first row of the basis vanishes.
        let first_mass = basis.row(0).amax();
        closest_call = closest_call.min(first_mass);
        if first_mass <= tol.tol_sub {
            none_contained = false;
        }
    }

    Ok(SeedInvarianceVerdict {
        matrix_size: m,
        none_contained,
        subspaces_tested: tested,
        kernel,
        closest_call,
    })
}

/// Matrix exponential by scaling and squaring with a [13/13] Pade
/// approximant.
pub fn matrix_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let theta13 = 5.371_920_351_148_152;
    // 1-norm (max column sum)
    let norm = (0..m.ncols())
        .map(|c| m.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(0.5f64.powi(s as i32));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = DMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (a6.scale(B[13]) + a4.scale(B[11]) + a2.scale(B[9]))
        + a6.scale(B[7])
        + a4.scale(B[5])
        + a2.scale(B[3])
        + id.scale(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(B[12]) + a4.scale(B[10]) + a2.scale(B[8]))
        + a6.scale(B[6])
        + a4.scale(B[4])
        + a2.scale(B[2])
        + id.scale(B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut result = lhs
        .lu()
        .solve(&rhs)
        .expect("Pade denominator is well conditioned after scaling");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// One sampled comparison of the Killing-field norm along the geodesic with
/// the linear-growth prediction from base-point data.
#[derive(Debug, Clone)]
pub struct TransportSample {
    pub t: f64,
    /// Norm of the induced Killing field at the group point `exp(t v)`.
    pub killing_norm: f64,
    /// `|Z_e + t (nab_v Z)|` from base-point data alone.
    pub predicted_norm: f64,
    pub relative_error: f64,
}

/// Finite-difference check of the second covariant derivative of the field
/// along the witness-transvection geodesic.
#[derive(Debug, Clone)]
pub struct SecondDerivativeCheck {
    pub step: f64,
    pub max_norm: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Report of the transport check.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub samples: Vec<TransportSample>,
    pub max_relative_error: f64,
    /// Largest defect when expanding conjugated fields back into the basis;
    /// the adjoint action must stay inside the algebra.
    pub expansion_residual: f64,
    pub second_derivative: Option<SecondDerivativeCheck>,
}

/// Step used for the finite-difference second derivative.
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-4;

/// Evaluates the induced Killing field of basis element `z` along the
/// one-parameter subgroup of the nullity direction `v` and compares its norm
/// with the base-point prediction; then checks the second covariant
/// derivative of the same field along the witness-transvection geodesic.
pub fn transport_check(
    spec: &ExampleSpec,
    v: &DVector<f64>,
    z: usize,
    t_samples: &[f64],
    tol: &Tolerances,
) -> Result<TransportReport> {
    let alg = build_example(spec);
    let n = alg.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if z >= n {
        return Err(Error::DimensionMismatch { expected: n, got: z });
    }
    let table = nomizu_table(&alg)?;
    let ct = curvature_table(&alg, &table)?;

    let residual = nullity_membership_residual(&ct, v);
    if residual > tol.tol_sub {
        return Err(Error::NotInNullity { residual });
    }

    let basis = spec.basis_matrices();
    let gram: Vec<f64> = basis.iter().map(|b| (b * b.transpose()).trace()).collect();
    let to_matrix = |coeffs: &DVector<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(spec.d + 1, spec.d + 1);
        for (k, b) in basis.iter().enumerate() {
            if coeffs[k] != 0.0 {
                out += b.scale(coeffs[k]);
            }
        }
        out
    };
    // The basis realizations are orthogonal for the trace pairing; expansion
    // coefficients are trace projections.
    let mut expansion_residual = 0.0f64;
    let mut expand = |m: &DMatrix<f64>| -> DVector<f64> {
        let coeffs = DVector::from_fn(n, |k, _| (m * basis[k].transpose()).trace() / gram[k]);
        let rebuilt = to_matrix(&coeffs);
        let scale = m.amax().max(1.0);
        expansion_residual = expansion_residual.max((m - rebuilt).amax() / scale);
        coeffs
    };

    let v_hat = to_matrix(v);
    let z_hat = basis[z].clone();
    let z_coeffs = basis_vector(n, z);
    let growth = table.operator(z) * v;

    let mut samples = Vec::with_capacity(t_samples.len());
    let mut max_relative_error = 0.0f64;
    for &t in t_samples {
        let flow_in = matrix_exp(&v_hat.scale(t));
        let flow_out = matrix_exp(&v_hat.scale(-t));
        let conjugated = &flow_out * &z_hat * &flow_in;
        let coords = expand(&conjugated);
        let killing_norm = alg.norm(&coords);
        let predicted_norm = alg.norm(&(&z_coeffs + growth.scale(t)));
        let relative_error =
            (killing_norm - predicted_norm).abs() / predicted_norm.max(f64::MIN_POSITIVE);
        max_relative_error = max_relative_error.max(relative_error);
        samples.push(TransportSample {
            t,
            killing_norm,
            predicted_norm,
            relative_error,
        });
    }

    // Second covariant derivative along the witness-transvection geodesic.
    let second_derivative = match distribution_chain(&alg, &table, &ct, tol)
        .and_then(|chain| adapted_transvection_witness(&alg, &table, &ct, &chain, tol))
    {
        Ok(TransvectionWitness { vector, .. }) => {
            let y_hat = to_matrix(&vector);
            let h = SECOND_DERIVATIVE_STEP;
            let mut max_norm = 0.0f64;
            let mut rows = Vec::with_capacity(t_samples.len());
            for &t in t_samples {
                let mut pulled = |s: f64| -> DVector<f64> {
                    let fwd = matrix_exp(&y_hat.scale(s));
                    let bwd = matrix_exp(&y_hat.scale(-s));
                    expand(&(&bwd * &z_hat * &fwd))
                };
                let second = (pulled(t + h) - pulled(t).scale(2.0) + pulled(t - h)) / (h * h);
                let norm = alg.norm(&second);
                max_norm = max_norm.max(norm);
                rows.push((t, norm));
            }
            Some(SecondDerivativeCheck {
                step: h,
                max_norm,
                samples: rows,
            })
        }
        Err(_) => None,
    };

    Ok(TransportReport {
        samples,
        max_relative_error,
        expansion_residual,
        second_derivative,
    })
}

/// Convenience: the nullity direction used by the stock transport check.
pub fn nullity_axis_direction(spec: &ExampleSpec, axis: usize) -> DVector<f64> {
    basis_vector(spec.n(), axis)
}
