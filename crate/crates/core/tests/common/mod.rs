//! Shared helpers for the integration suites: an independent curvature
//! pipeline through the invariant-frame Koszul formula, the stock corpus,
//! and metric-orthogonal basis rotations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nullitylab_core::algebra::MetricLieAlgebra;
use nullitylab_core::examples::{build_example, ExampleSpec};
use nullitylab_core::{corpus, Tolerances};

/// Frame covariant derivatives `N_i : e_k -> nab_{e_i} e_k` from
/// `<nab_x y, z> = ([x,y],z> - <[y,z],x> + <[z,x],y>) / 2`
/// applied to the frame with constant brackets.
pub fn frame_connection(alg: &MetricLieAlgebra) -> Vec<DMatrix<f64>> {
    let n = alg.dim();
    let g = alg.metric();
    let chol = nalgebra::Cholesky::new(g.clone()).expect("positive definite metric");
    let basis = |i: usize| -> DVector<f64> {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        e
    };
    (0..n)
        .map(|i| {
            let mut rhs = DMatrix::zeros(n, n);
            for j in 0..n {
                for l in 0..n {
                    rhs[(l, j)] = 0.5
                        * (alg.inner(alg.bracket_basis(i, j), &basis(l))
                            - alg.inner(alg.bracket_basis(j, l), &basis(i))
                            + alg.inner(alg.bracket_basis(l, i), &basis(j)));
                }
            }
            chol.solve(&rhs)
        })
        .collect()
}

/// Independent curvature operators
/// `R(e_i, e_j) = N_i N_j - N_j N_i - N_{[e_i, e_j]}` on the frame.
pub fn frame_curvature(alg: &MetricLieAlgebra) -> Vec<Vec<DMatrix<f64>>> {
    let n = alg.dim();
    let frame = frame_connection(alg);
    let mut out = vec![vec![DMatrix::zeros(n, n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut bracket_part = DMatrix::zeros(n, n);
            let c = alg.bracket_basis(i, j);
            for (m, nm) in frame.iter().enumerate() {
                if c[m] != 0.0 {
                    bracket_part += nm.scale(c[m]);
                }
            }
            out[i][j] = &frame[i] * &frame[j] - &frame[j] * &frame[i] - bracket_part;
        }
    }
    out
}

/// Largest entrywise difference between the Killing-field curvature table and
/// the independent frame pipeline.
pub fn oracle_curvature_gap(alg: &MetricLieAlgebra) -> f64 {
    let table = nullitylab_core::connection::nomizu_table(alg).expect("connection");
    let ct = nullitylab_core::curvature::curvature_table(alg, &table).expect("curvature");
    let oracle = frame_curvature(alg);
    let n = alg.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((ct.operator_basis(i, j) - &oracle[i][j]).amax());
        }
    }
    worst
}

/// A fixed custom action matrix for the 4-dimensional custom sample.
pub fn custom_sample() -> MetricLieAlgebra {
    let a = DMatrix::from_row_slice(
        3,
        3,
        &[0.3, 1.0, -0.2, -1.0, 0.1, 0.5, 0.2, -0.5, -0.4],
    );
    build_example(&ExampleSpec::custom(a).expect("3x3 custom matrix"))
}

/// Name-tagged corpus used by the cross-cutting suites.
pub fn full_corpus() -> Vec<(String, MetricLieAlgebra)> {
    let mut out: Vec<(String, MetricLieAlgebra)> = vec![
        ("abelian4".into(), corpus::abelian(4)),
        ("heisenberg3".into(), corpus::heisenberg3()),
        ("so3".into(), corpus::so3_bi_invariant()),
        ("custom3".into(), custom_sample()),
    ];
    for d in 3..=12 {
        let spec = ExampleSpec::default_family(d).unwrap();
        out.push((format!("family-d{d}"), build_example(&spec)));
    }
    out
}

/// A metric-orthogonal change of basis: `O = L^{-T} Q L^T` with `Q` a random
/// rotation, so that `O^T g O = g`. Returns the transformed algebra together
/// with `O`.
pub fn rotated_algebra(alg: &MetricLieAlgebra, seed: u64) -> (MetricLieAlgebra, DMatrix<f64>) {
    let n = alg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let qr = gauss.qr();
    let q = qr.q();
    let l = nalgebra::Cholesky::new(alg.metric().clone())
        .expect("positive definite metric")
        .l();
    let l_t = l.transpose();
    let l_inv_t = l_t.clone().try_inverse().expect("invertible factor");
    let o = &l_inv_t * q * &l_t;
    let o_inv = o.clone().try_inverse().expect("orthogonal-like map");

    let labels = (0..n).map(|i| format!("Y{}", i + 1)).collect();
    let rotated = MetricLieAlgebra::from_upper_brackets(labels, alg.metric().clone(), |i, j| {
        let oi: DVector<f64> = o.column(i).into();
        let oj: DVector<f64> = o.column(j).into();
        &o_inv * alg.bracket(&oi, &oj)
    })
    .expect("rotated algebra");
    (rotated, o)
}

/// Checks the rotated algebra is still a valid input at default tolerances.
pub fn assert_valid(alg: &MetricLieAlgebra) {
    let report = nullitylab_core::algebra::validate(alg, &Tolerances::default());
    assert!(
        report.is_valid(),
        "corpus algebra failed validation: {:?}",
        report.violations
    );
}
