//! JSON report schema.
//!
//! Every float is serialized through [`Fx`], which pins the formatting to 17
//! significant digits in scientific notation. Two runs over the same input
//! therefore produce byte-identical files, and parsing the number back yields
//! the exact same `f64`.

use serde::{Deserialize, Serialize, Serializer};

use nullitylab_core::analysis::Analysis;
use nullitylab_core::examples::{FamilyCertificate, TransportReport};
use nullitylab_core::holonomy::SubspaceVerdict;
use nullitylab_core::Tolerances;

/// An `f64` that serializes as a JSON number with exactly 17 significant
/// digits (lossless for binary64).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fx(pub f64);

impl Serialize for Fx {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float in report"));
        }
        let literal = format!("{:.16e}", self.0);
        let number: serde_json::Number = literal
            .parse()
            .map_err(|e| serde::ser::Error::custom(format!("bad float literal: {e}")))?;
        number.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fx {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Fx)
    }
}

fn fx_vec(values: &[f64]) -> Vec<Fx> {
    values.iter().map(|v| Fx(*v)).collect()
}

fn fx_matrix(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<Fx>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Fx(m[(i, j)])).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TolerancesReport {
    pub tol_alg: Fx,
    pub tol_sub: Fx,
    pub tol_pd: Fx,
}

impl From<Tolerances> for TolerancesReport {
    fn from(t: Tolerances) -> Self {
        TolerancesReport {
            tol_alg: Fx(t.tol_alg),
            tol_sub: Fx(t.tol_sub),
            tol_pd: Fx(t.tol_pd),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub invariant: String,
    pub residual: Fx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSection {
    pub valid: bool,
    pub violations: Vec<ViolationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    pub solvable: bool,
    pub nilpotent_step: Option<usize>,
    pub reductive: bool,
    pub unimodular: bool,
    pub unimodular_defects: Vec<Fx>,
    pub center_dim: usize,
    pub derived_series_dims: Vec<usize>,
    pub lower_central_dims: Vec<usize>,
    pub killing_form: Vec<Vec<Fx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub name: String,
    pub holds: bool,
    pub strict: bool,
    pub residual: Fx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSection {
    pub ambient_dim: usize,
    pub nullity_dim: usize,
    pub adapted_dim: usize,
    pub osc1_dim: usize,
    pub osc2_dim: usize,
    pub bounded_dim: usize,
    pub conullity: usize,
    pub trivial_nullity: bool,
    pub flat_factor_detected: bool,
    pub strict_chain: bool,
    pub inclusions: Vec<InclusionReport>,
    pub k3: Option<K3Report>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K3Report {
    pub osc1_codim_two: bool,
    pub osc2_equals_bounded: bool,
    pub bounded_codim_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciSection {
    /// Ascending eigenvalues in a metric-orthonormal frame.
    pub eigenvalues: Vec<Fx>,
    pub scalar: Fx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySection {
    pub index: usize,
    pub co_index: usize,
    /// Computed inside the input algebra only: a lower bound for the index
    /// over the full isometry algebra.
    pub relative: bool,
    pub cartan_dim: usize,
    pub abelian_part_dim: usize,
    pub null_jacobi_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomySection {
    pub closure_dim: usize,
    pub depth: usize,
    pub verdict: String,
    pub invariant_subspace_dim: Option<usize>,
    pub zero_algebra: bool,
    pub flat_factor_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub vector: Vec<Fx>,
    pub connection_norm: Fx,
    pub jacobi_norm: Fx,
    pub ad_squared_norm: Fx,
    pub ad_norm: Fx,
    pub threshold: Fx,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSection {
    pub adapted_transvection: Option<WitnessReport>,
}

/// The full report: validation always present, the remaining sections only
/// when the input validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub input_digest: String,
    pub tolerances: TolerancesReport,
    pub certification_seed: u64,
    pub certification_rounds: usize,
    pub validation: ValidationSection,
    pub structure: Option<StructureSection>,
    pub chain: Option<ChainSection>,
    pub ricci: Option<RicciSection>,
    pub symmetry: Option<SymmetrySection>,
    pub holonomy: Option<HolonomySection>,
    pub witnesses: WitnessSection,
    pub warnings: Vec<String>,
}

pub fn digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let mut out = String::from("sha256:");
    for byte in hasher.finalize() {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn analysis_report(analysis: &Analysis, input_digest: String) -> AnalysisReport {
    let validation = ValidationSection {
        valid: analysis.validation.is_valid(),
        violations: analysis
            .validation
            .violations
            .iter()
            .map(|v| ViolationReport {
                invariant: v.invariant.clone(),
                residual: Fx(v.residual),
            })
            .collect(),
    };

    let computed = analysis.computed.as_ref();
    let structure = computed.map(|c| StructureSection {
        solvable: c.structure.solvable,
        nilpotent_step: c.structure.nilpotent_step,
        reductive: c.structure.reductive,
        unimodular: c.structure.is_unimodular(analysis.tolerances.tol_alg),
        unimodular_defects: fx_vec(&c.structure.unimodular_defects),
        center_dim: c.structure.center_dim,
        derived_series_dims: c.structure.derived_series_dims.clone(),
        lower_central_dims: c.structure.lower_central_dims.clone(),
        killing_form: fx_matrix(&c.structure.killing_form),
    });

    let chain = computed.map(|c| ChainSection {
        ambient_dim: c.chain_verdict.ambient_dim,
        nullity_dim: c.chain_verdict.nullity_dim,
        adapted_dim: c.chain_verdict.adapted_dim,
        osc1_dim: c.chain_verdict.osc1_dim,
        osc2_dim: c.chain_verdict.osc2_dim,
        bounded_dim: c.chain_verdict.bounded_dim,
        conullity: c.chain_verdict.conullity,
        trivial_nullity: c.chain_verdict.trivial_nullity,
        flat_factor_detected: c.chain_verdict.flat_factor_detected,
        strict_chain: c.chain_verdict.strict_chain,
        inclusions: c
            .chain_verdict
            .inclusions
            .iter()
            .map(|i| InclusionReport {
                name: i.name.to_string(),
                holds: i.holds,
                strict: i.strict,
                residual: Fx(i.residual),
            })
            .collect(),
        k3: c.chain_verdict.k3.as_ref().map(|k| K3Report {
            osc1_codim_two: k.osc1_codim_two,
            osc2_equals_bounded: k.osc2_equals_bounded,
            bounded_codim_one: k.bounded_codim_one,
        }),
        notes: c.chain_verdict.notes.clone(),
    });

    let ricci = computed.map(|c| RicciSection {
        eigenvalues: fx_vec(&c.ricci.eigenvalues),
        scalar: Fx(c.ricci.scalar),
    });

    let symmetry = computed.map(|c| SymmetrySection {
        index: c.transvections.index_of_symmetry,
        co_index: c.transvections.co_index,
        relative: true,
        cartan_dim: c.transvections.cartan_basis.len(),
        abelian_part_dim: c.transvections.abelian_part_basis.len(),
        null_jacobi_dim: c.transvections.null_jacobi_basis.len(),
    });

    let holonomy = computed.map(|c| {
        let (verdict, invariant_subspace_dim, zero_algebra) = match &c.holonomy_verdict {
            SubspaceVerdict::Irreducible => ("irreducible".to_string(), None, false),
            SubspaceVerdict::Reducible {
                subspace,
                zero_algebra,
            } => ("reducible".to_string(), Some(subspace.dim()), *zero_algebra),
        };
        HolonomySection {
            closure_dim: c.holonomy.dim(),
            depth: c.holonomy.depth,
            verdict,
            invariant_subspace_dim,
            zero_algebra,
            flat_factor_dim: c.flat_factor.dim(),
        }
    });

    let witnesses = WitnessSection {
        adapted_transvection: computed.and_then(|c| c.witness.as_ref()).map(|w| WitnessReport {
            vector: w.vector.iter().map(|x| Fx(*x)).collect(),
            connection_norm: Fx(w.certificate.connection_norm),
            jacobi_norm: Fx(w.certificate.jacobi_norm),
            ad_squared_norm: Fx(w.certificate.ad_squared_norm),
            ad_norm: Fx(w.certificate.ad_norm),
            threshold: Fx(w.certificate.threshold),
            passes: w.certificate.passes(),
        }),
    };

    AnalysisReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_digest,
        tolerances: analysis.tolerances.into(),
        certification_seed: analysis.certification.seed,
        certification_rounds: analysis.certification.rounds,
        validation,
        structure,
        chain,
        ricci,
        symmetry,
        holonomy,
        witnesses,
        warnings: analysis.warnings.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub name: String,
    pub passed: bool,
    pub residual: Fx,
    pub threshold: Fx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub tool_version: String,
    pub d: usize,
    pub n: usize,
    pub a: Fx,
    pub ricci_eigenvalues: Vec<Fx>,
    pub scalar_curvature: Fx,
    pub passed: bool,
    pub clauses: Vec<ClauseReport>,
    pub notes: Vec<String>,
    pub tolerances: TolerancesReport,
    pub certification_seed: u64,
}

pub fn certificate_report(
    cert: &FamilyCertificate,
    tol: Tolerances,
    seed: u64,
) -> CertificateReport {
    CertificateReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        d: cert.d,
        n: cert.n,
        a: Fx(cert.a),
        ricci_eigenvalues: fx_vec(&cert.ricci_eigenvalues),
        scalar_curvature: Fx(cert.scalar_curvature),
        passed: cert.passed(),
        clauses: cert
            .clauses
            .iter()
            .map(|c| ClauseReport {
                name: c.name.clone(),
                passed: c.passed,
                residual: Fx(c.residual),
                threshold: Fx(c.threshold),
            })
            .collect(),
        notes: cert.notes.clone(),
        tolerances: tol.into(),
        certification_seed: seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSampleReport {
    pub t: Fx,
    pub killing_norm: Fx,
    pub predicted_norm: Fx,
    pub relative_error: Fx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivativeReport {
    pub step: Fx,
    pub max_norm: Fx,
    pub samples: Vec<(Fx, Fx)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReportJson {
    pub tool_version: String,
    pub d: usize,
    pub v_index: usize,
    pub z_index: usize,
    pub samples: Vec<TransportSampleReport>,
    pub max_relative_error: Fx,
    pub expansion_residual: Fx,
    pub second_derivative: Option<SecondDerivativeReport>,
}

pub fn transport_report(
    report: &TransportReport,
    d: usize,
    v_index: usize,
    z_index: usize,
) -> TransportReportJson {
    TransportReportJson {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        d,
        v_index,
        z_index,
        samples: report
            .samples
            .iter()
            .map(|s| TransportSampleReport {
                t: Fx(s.t),
                killing_norm: Fx(s.killing_norm),
                predicted_norm: Fx(s.predicted_norm),
                relative_error: Fx(s.relative_error),
            })
            .collect(),
        max_relative_error: Fx(report.max_relative_error),
        expansion_residual: Fx(report.expansion_residual),
        second_derivative: report.second_derivative.as_ref().map(|s| SecondDerivativeReport {
            step: Fx(s.step),
            max_norm: Fx(s.max_norm),
            samples: s.samples.iter().map(|(t, n)| (Fx(*t), Fx(*n))).collect(),
        }),
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_significant_digits() {
        let json = serde_json::to_string(&Fx(0.5)).unwrap();
        assert_eq!(json, "5.0000000000000000e-1");
        let json = serde_json::to_string(&Fx(-1.0 / 3.0)).unwrap();
        assert_eq!(json, "-3.3333333333333331e-1");
    }

    #[test]
    fn floats_roundtrip_losslessly() {
        for v in [0.1, -2.0 / 7.0, 1e-300, 123456.789, 0.0] {
            let json = serde_json::to_string(&Fx(v)).unwrap();
            let back: Fx = serde_json::from_str(&json).unwrap();
            assert_eq!(back.0.to_bits(), v.to_bits(), "value {v}");
        }
    }

    #[test]
    fn digest_is_prefixed_hex() {
        let d = digest(b"abc");
        assert!(d.starts_with("sha256:"));
        assert_eq!(d.len(), 7 + 64);
    }
}
