//! One-call driver running the whole pipeline on a metric Lie algebra.

use crate::algebra::{
    structure_predicates, validate, MetricLieAlgebra, StructureReport, Tolerances,
    ValidationReport,
};
use crate::connection::nomizu_table;
use crate::curvature::{curvature_table, RicciData};
use crate::error::{Error, Result};
use crate::holonomy::{
    flat_factor_detector, invariant_subspaces, kostant_span, Certification, HolonomyAlgebra,
    SubspaceVerdict,
};
use crate::nullity::{chain_report, distribution_chain, ChainVerdict, DistributionChain};
use crate::subspace::Subspace;
use crate::symmetry::{
    adapted_transvection_witness, transvection_set, TransvectionSet, TransvectionWitness,
};

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub tolerances: Tolerances,
    pub certification: Certification,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tolerances: Tolerances::default(),
            certification: Certification::default(),
        }
    }
}

/// Everything the pipeline derives from a valid input.
#[derive(Debug, Clone)]
pub struct Computed {
    pub structure: StructureReport,
    pub ricci: RicciData,
    pub chain: DistributionChain,
    pub chain_verdict: ChainVerdict,
    pub transvections: TransvectionSet,
    /// Present when the nullity is non-trivial and a certified witness was
    /// found.
    pub witness: Option<TransvectionWitness>,
    pub holonomy: HolonomyAlgebra,
    pub holonomy_verdict: SubspaceVerdict,
    pub flat_factor: Subspace,
}

/// Validation outcome plus, for valid inputs, every computed verdict.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub tolerances: Tolerances,
    pub certification: Certification,
    pub validation: ValidationReport,
    pub computed: Option<Computed>,
    pub warnings: Vec<String>,
}

/// Runs validation and, when it passes, the full analysis pipeline.
pub fn analyze(alg: &MetricLieAlgebra, options: &AnalysisOptions) -> Result<Analysis> {
    let tol = options.tolerances;
    let validation = validate(alg, &tol);
    let mut warnings = Vec::new();
    if !validation.is_valid() {
        return Ok(Analysis {
            tolerances: tol,
            certification: options.certification,
            validation,
            computed: None,
            warnings,
        });
    }

    let structure = structure_predicates(alg, &tol)?;
    let table = nomizu_table(alg)?;
    let ct = curvature_table(alg, &table)?;
    let chain = distribution_chain(alg, &table, &ct, &tol)?;
    let holonomy = kostant_span(&table, &tol)?;
    let flat_factor = flat_factor_detector(&holonomy, &ct, &tol)?;
    let holonomy_verdict =
        invariant_subspaces(&holonomy.closure_basis, alg.metric(), &tol, &options.certification)?;

    let flat_accounts_for_nullity = flat_factor.dim() > 0 && flat_factor.equals(&chain.nullity);
    if flat_factor.dim() > 0 && !flat_accounts_for_nullity {
        warnings.push(
            "a non-trivial flat factor was detected that does not account for the whole \
             nullity; the chain guarantees assume no flat factor"
                .to_string(),
        );
    }
    let chain_verdict = chain_report(&chain, flat_accounts_for_nullity);

    let transvections = transvection_set(alg, &table, &ct, &tol)?;
    // Witness existence presumes a non-trivial nullity not explained by a
    // flat factor.
    let witness = if !chain_verdict.trivial_nullity {
        match adapted_transvection_witness(alg, &table, &ct, &chain, &tol) {
            Ok(w) => Some(w),
            Err(Error::NoWitness) => {
                warnings.push(
                    "the nullity is non-trivial but no certified adapted transvection was \
                     found inside the input algebra"
                        .to_string(),
                );
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(Analysis {
        tolerances: tol,
        certification: options.certification,
        validation,
        computed: Some(Computed {
            structure,
            ricci: ct.ricci().clone(),
            chain,
            chain_verdict,
            transvections,
            witness,
            holonomy,
            holonomy_verdict,
            flat_factor,
        }),
        warnings,
    })
}
