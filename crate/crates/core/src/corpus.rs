//! Stock algebras used for smoke tests and cross-checks.

use nalgebra::{DMatrix, DVector};

use crate::algebra::MetricLieAlgebra;

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Abelian `R^n` with the identity metric: flat.
pub fn abelian(n: usize) -> MetricLieAlgebra {
    let labels = (1..=n).map(|i| format!("X{i}")).collect();
    MetricLieAlgebra::from_upper_brackets(labels, DMatrix::identity(n, n), |_, _| {
        DVector::zeros(n)
    })
    .expect("abelian algebra")
}

/// The 3-dimensional Heisenberg algebra `[X1, X2] = X3`, identity metric.
pub fn heisenberg3() -> MetricLieAlgebra {
    let labels = vec!["X1".into(), "X2".into(), "X3".into()];
    MetricLieAlgebra::from_upper_brackets(labels, DMatrix::identity(3, 3), |i, j| {
        if (i, j) == (0, 1) {
            e(3, 2)
        } else {
            DVector::zeros(3)
        }
    })
    .expect("heisenberg algebra")
}

/// `so(3)` with the bi-invariant metric `g = -B` (`B` the Killing form),
/// i.e. `g = 2 I` for the cyclic basis `[X1, X2] = X3`.
pub fn so3_bi_invariant() -> MetricLieAlgebra {
    let labels = vec!["X1".into(), "X2".into(), "X3".into()];
    MetricLieAlgebra::from_upper_brackets(labels, DMatrix::identity(3, 3).scale(2.0), |i, j| {
        match (i, j) {
            (0, 1) => e(3, 2),
            (1, 2) => e(3, 0),
            (0, 2) => -e(3, 1),
            _ => DVector::zeros(3),
        }
    })
    .expect("so(3) algebra")
}

/// Direct sum `R ⊕ so(3)` with a block metric: one flat line next to a round
/// factor. The line is the de Rham flat factor candidate.
pub fn line_times_so3() -> MetricLieAlgebra {
    let labels = vec!["T".into(), "X1".into(), "X2".into(), "X3".into()];
    let mut metric = DMatrix::identity(4, 4);
    for k in 1..4 {
        metric[(k, k)] = 2.0;
    }
    MetricLieAlgebra::from_upper_brackets(labels, metric, |i, j| match (i, j) {
        (1, 2) => e(4, 3),
        (2, 3) => e(4, 1),
        (1, 3) => -e(4, 2),
        _ => DVector::zeros(4),
    })
    .expect("product algebra")
}
