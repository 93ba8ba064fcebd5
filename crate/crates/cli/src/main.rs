//! Command-line interface.
//!
//! Exit codes: 0 success / certificate passed, 1 validation or certificate
//! failure, 2 usage error, 3 numerical inconclusiveness. Diagnostics go to
//! stderr; reports go to stdout or to files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nullitylab_cli::input;
use nullitylab_cli::report;
use nullitylab_core::algebra::basis_vector;
use nullitylab_core::analysis::{analyze, AnalysisOptions};
use nullitylab_core::examples::{
    build_example, family_certificate, transport_check, ExampleSpec,
};
use nullitylab_core::holonomy::{Certification, DEFAULT_SEED};
use nullitylab_core::{Error as CoreError, MetricLieAlgebra, Tolerances};

#[derive(Parser)]
#[command(
    name = "nullitylab",
    version,
    about = "Curvature nullity analysis for Lie groups with left-invariant metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy, Debug)]
struct TolArgs {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Principal-angle threshold for subspace comparisons.
    #[arg(long = "tol-sub", default_value_t = 1e-8)]
    tol_sub: f64,
    /// Lower bound on metric eigenvalues.
    #[arg(long = "tol-pd", default_value_t = 1e-12)]
    tol_pd: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol_alg: self.tol,
            tol_sub: self.tol_sub,
            tol_pd: self.tol_pd,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check an algebra file against the input invariants.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
    },
    /// Run the full analysis and emit a JSON report.
    Analyze {
        file: PathBuf,
        /// Write the report to this file instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        tols: TolArgs,
        /// Certification seed (overrides NULLITYLAB_SEED).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a member of the built-in solvable family as an algebra file.
    Example {
        /// Number of nilpotent generators (algebra dimension is dim + 1).
        #[arg(long)]
        dim: usize,
        /// Write the algebra file here instead of stdout.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Use a custom action matrix (CSV) instead of the default one.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Run the certified verdict for one default-family member.
    Certify {
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze a range of family dimensions, one report file per dimension.
    Sweep {
        /// Inclusive range, e.g. 3..12.
        #[arg(long)]
        dims: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate Killing-field growth along a nullity geodesic of the family.
    Transport {
        #[arg(long)]
        dim: usize,
        /// 1-based basis index of the nullity direction.
        #[arg(long)]
        v: usize,
        /// 1-based basis index of the field to evaluate.
        #[arg(long)]
        z: usize,
        /// Comma-separated sample times, e.g. 1,10,100.
        #[arg(long)]
        t: String,
        #[command(flatten)]
        tols: TolArgs,
    },
}

enum Failure {
    Usage(String),
    Verdict(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Verdict(_) => 1,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verdict(m) | Failure::Numerical(m) => m,
        }
    }
}

fn classify(err: CoreError) -> Failure {
    match err {
        CoreError::DimensionMismatch { .. }
        | CoreError::BadDimension { .. }
        | CoreError::BadMode
        | CoreError::NotInNullity { .. }
        | CoreError::DegeneratePlane { .. }
        | CoreError::Precondition(_) => Failure::Usage(err.to_string()),
        CoreError::CertificateFailure { .. } => Failure::Verdict(err.to_string()),
        CoreError::IllConditioned { .. }
        | CoreError::Inconclusive { .. }
        | CoreError::EigenDegeneracy { .. }
        | CoreError::SubalgebraClosureViolation { .. }
        | CoreError::NonlinearNullJacobiSet { .. }
        | CoreError::SingularMetric { .. }
        | CoreError::ClosureOverflow { .. }
        | CoreError::NoWitness => Failure::Numerical(err.to_string()),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("NULLITYLAB_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|e| Failure::Usage(format!("NULLITYLAB_SEED is not a u64: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn load_algebra(path: &Path) -> Result<(MetricLieAlgebra, String), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Failure::Usage(format!("{} is not UTF-8: {e}", path.display())))?;
    let alg = input::parse_algebra(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((alg, report::digest(&bytes)))
}

/// Write-then-rename so readers never observe a half-written report.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Failure::Usage(format!("cannot move report into {}: {e}", path.display())))
}

fn run_validate(file: &Path, tols: TolArgs) -> Result<u8, Failure> {
    let (alg, _) = load_algebra(file)?;
    let validation = nullitylab_core::algebra::validate(&alg, &tols.tolerances());
    let section = report::ValidationSection {
        valid: validation.is_valid(),
        violations: validation
            .violations
            .iter()
            .map(|v| report::ViolationReport {
                invariant: v.invariant.clone(),
                residual: report::Fx(v.residual),
            })
            .collect(),
    };
    print!("{}", report::to_json_pretty(&section));
    Ok(if validation.is_valid() { 0 } else { 1 })
}

fn run_analyze(
    file: &Path,
    json: Option<&Path>,
    tols: TolArgs,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    let (alg, digest) = load_algebra(file)?;
    let options = AnalysisOptions {
        tolerances: tols.tolerances(),
        certification: Certification {
            seed: resolve_seed(seed)?,
            rounds: 20,
        },
    };
    let analysis = analyze(&alg, &options).map_err(classify)?;
    let rep = report::analysis_report(&analysis, digest);
    let text = report::to_json_pretty(&rep);
    match json {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if rep.validation.valid { 0 } else { 1 })
}

fn example_spec(dim: usize, matrix: Option<&Path>) -> Result<ExampleSpec, Failure> {
    match matrix {
        None => ExampleSpec::default_family(dim).map_err(classify),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let m = input::parse_matrix(&text).map_err(|e| Failure::Usage(e.to_string()))?;
            if m.nrows() != dim {
                return Err(Failure::Usage(format!(
                    "--dim {dim} does not match the {}x{} matrix in {}",
                    m.nrows(),
                    m.ncols(),
                    path.display()
                )));
            }
            ExampleSpec::custom(m).map_err(classify)
        }
    }
}

fn run_example(dim: usize, emit: Option<&Path>, matrix: Option<&Path>) -> Result<u8, Failure> {
    let spec = example_spec(dim, matrix)?;
    let alg = build_example(&spec);
    let text = input::emit_algebra(&alg);
    match emit {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn run_certify(dim: usize, tols: TolArgs, seed: Option<u64>) -> Result<u8, Failure> {
    let spec = ExampleSpec::default_family(dim).map_err(classify)?;
    let seed = resolve_seed(seed)?;
    let cert_cfg = Certification { seed, rounds: 20 };
    let cert = family_certificate(&spec, &tols.tolerances(), &cert_cfg).map_err(classify)?;
    let rep = report::certificate_report(&cert, tols.tolerances(), seed);
    print!("{}", report::to_json_pretty(&rep));
    if cert.passed() {
        Ok(0)
    } else {
        let clause = cert.first_failure().expect("some clause failed");
        eprintln!("certificate failed at clause `{}`", clause.name);
        Ok(1)
    }
}

fn parse_dims(text: &str) -> Result<(usize, usize), Failure> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| Failure::Usage(format!("--dims expects LO..HI, got {text:?}")))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| Failure::Usage(format!("bad lower bound in --dims: {e}")))?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| Failure::Usage(format!("bad upper bound in --dims: {e}")))?;
    if lo > hi {
        return Err(Failure::Usage(format!("--dims range {lo}..{hi} is empty")));
    }
    Ok((lo, hi))
}

fn run_sweep(dims: &str, out: &Path, tols: TolArgs, seed: Option<u64>) -> Result<u8, Failure> {
    let (lo, hi) = parse_dims(dims)?;
    let seed = resolve_seed(seed)?;
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out.display())))?;
    for d in lo..=hi {
        let spec = ExampleSpec::default_family(d).map_err(classify)?;
        let alg = build_example(&spec);
        let digest = report::digest(input::emit_algebra(&alg).as_bytes());
        let options = AnalysisOptions {
            tolerances: tols.tolerances(),
            certification: Certification { seed, rounds: 20 },
        };
        let analysis = analyze(&alg, &options).map_err(classify)?;
        let rep = report::analysis_report(&analysis, digest);
        let path = out.join(format!("family-d{d:02}.json"));
        write_atomic(&path, &report::to_json_pretty(&rep))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(0)
}

fn run_transport(dim: usize, v: usize, z: usize, t: &str, tols: TolArgs) -> Result<u8, Failure> {
    let spec = ExampleSpec::default_family(dim).map_err(classify)?;
    let n = spec.n();
    if v == 0 || v > n || z == 0 || z > n {
        return Err(Failure::Usage(format!(
            "--v and --z must be 1-based indices in 1..={n}"
        )));
    }
    let mut samples = Vec::new();
    for tok in t.split(',') {
        let value: f64 = tok
            .trim()
            .parse()
            .map_err(|e| Failure::Usage(format!("bad sample time {tok:?}: {e}")))?;
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Failure::Usage("--t needs at least one sample time".into()));
    }
    let direction = basis_vector(n, v - 1);
    let rep = transport_check(&spec, &direction, z - 1, &samples, &tols.tolerances())
        .map_err(classify)?;
    print!(
        "{}",
        report::to_json_pretty(&report::transport_report(&rep, dim, v, z))
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { file, tols } => run_validate(file, *tols),
        Command::Analyze {
            file,
            json,
            tols,
            seed,
        } => run_analyze(file, json.as_deref(), *tols, *seed),
        Command::Example { dim, emit, matrix } => {
            run_example(*dim, emit.as_deref(), matrix.as_deref())
        }
        Command::Certify { dim, tols, seed } => run_certify(*dim, *tols, *seed),
        Command::Sweep {
            dims,
            out,
            tols,
            seed,
        } => run_sweep(dims, out, *tols, *seed),
        Command::Transport {
            dim,
            v,
            z,
            t,
            tols,
        } => run_transport(*dim, *v, *z, t, *tols),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
