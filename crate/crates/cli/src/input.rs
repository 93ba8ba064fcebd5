//! The on-disk algebra format: a TOML file with the dimension, basis labels,
//! upper-triangular bracket records and an optional metric.
//!
//! Only pairs with `i < j` are stored (1-based); the lower half follows by
//! antisymmetry. An omitted metric means the identity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use nullitylab_core::MetricLieAlgebra;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub basis: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    /// 1-based index, `i < j`.
    pub i: usize,
    pub j: usize,
    /// Coefficients of `[X_i, X_j]` in the basis.
    pub coeffs: Vec<f64>,
}

/// Problems with the file itself (not with the algebra it describes).
#[derive(Debug)]
pub enum InputError {
    Parse(String),
    Shape(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Parse(msg) => write!(f, "cannot parse algebra file: {msg}"),
            InputError::Shape(msg) => write!(f, "malformed algebra file: {msg}"),
        }
    }
}

impl std::error::Error for InputError {}

pub fn parse_algebra(text: &str) -> Result<MetricLieAlgebra, InputError> {
    let file: AlgebraFile = toml::from_str(text).map_err(|e| InputError::Parse(e.to_string()))?;
    algebra_from_file(&file)
}

pub fn algebra_from_file(file: &AlgebraFile) -> Result<MetricLieAlgebra, InputError> {
    let n = file.dim;
    if n == 0 {
        return Err(InputError::Shape("dim must be positive".into()));
    }
    if file.basis.len() != n {
        return Err(InputError::Shape(format!(
            "basis has {} names but dim = {n}",
            file.basis.len()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let mut table: Vec<Vec<Option<DVector<f64>>>> = vec![vec![None; n]; n];
    for entry in &file.brackets {
        if entry.i == 0 || entry.j == 0 || entry.i > n || entry.j > n {
            return Err(InputError::Shape(format!(
                "bracket indices ({}, {}) out of range 1..={n}",
                entry.i, entry.j
            )));
        }
        if entry.i >= entry.j {
            return Err(InputError::Shape(format!(
                "bracket ({}, {}) must have i < j",
                entry.i, entry.j
            )));
        }
        if !seen.insert((entry.i, entry.j)) {
            return Err(InputError::Shape(format!(
                "duplicate bracket entry ({}, {})",
                entry.i, entry.j
            )));
        }
        if entry.coeffs.len() != n {
            return Err(InputError::Shape(format!(
                "bracket ({}, {}) has {} coefficients, expected {n}",
                entry.i,
                entry.j,
                entry.coeffs.len()
            )));
        }
        table[entry.i - 1][entry.j - 1] = Some(DVector::from_column_slice(&entry.coeffs));
    }

    let metric = match &file.metric {
        None => DMatrix::identity(n, n),
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(InputError::Shape(format!("metric must be {n} rows of {n} numbers")));
            }
            DMatrix::from_fn(n, n, |i, j| rows[i][j])
        }
    };

    MetricLieAlgebra::from_upper_brackets(file.basis.clone(), metric, |i, j| {
        table[i][j].clone().unwrap_or_else(|| DVector::zeros(n))
    })
    .map_err(|e| InputError::Shape(e.to_string()))
}

/// Canonical TOML representation; only non-zero upper brackets are written.
pub fn algebra_to_file(alg: &MetricLieAlgebra, include_metric: bool) -> AlgebraFile {
    let n = alg.dim();
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = alg.bracket_basis(i, j);
            if c.amax() != 0.0 {
                brackets.push(BracketEntry {
                    i: i + 1,
                    j: j + 1,
                    // normalize negative zeros away for readability
                    coeffs: c.iter().map(|x| if *x == 0.0 { 0.0 } else { *x }).collect(),
                });
            }
        }
    }
    let metric = if include_metric || alg.metric() != &DMatrix::identity(n, n) {
        Some(
            (0..n)
                .map(|i| (0..n).map(|j| alg.metric()[(i, j)]).collect())
                .collect(),
        )
    } else {
        None
    };
    AlgebraFile {
        dim: n,
        basis: alg.basis_labels().to_vec(),
        brackets,
        metric,
    }
}

pub fn emit_algebra(alg: &MetricLieAlgebra) -> String {
    let file = algebra_to_file(alg, false);
    toml::to_string(&file).expect("algebra file serializes")
}

/// Parses a plain numeric matrix from CSV-like text: one row per line,
/// entries separated by commas or whitespace.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, InputError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for tok in trimmed.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            row.push(tok.parse::<f64>().map_err(|e| {
                InputError::Parse(format!("line {}: bad number {tok:?}: {e}", lineno + 1))
            })?);
        }
        if !row.is_empty() {
            rows.push(row);
        }
    }
    let d = rows.len();
    if d == 0 {
        return Err(InputError::Shape("matrix file is empty".into()));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(InputError::Shape("matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}
