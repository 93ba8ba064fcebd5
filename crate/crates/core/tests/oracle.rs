//! Cross-checks of the Killing-field pipeline against the independent
//! invariant-frame pipeline, plus frozen values computed from it.

mod common;

use nalgebra::DVector;
use nullitylab_core::algebra::basis_vector;
use nullitylab_core::connection::nomizu_table;
use nullitylab_core::curvature::curvature_table;
use nullitylab_core::examples::{build_example, ExampleSpec};
use nullitylab_core::holonomy::kostant_span;
use nullitylab_core::nullity::{distribution_chain, nullity_space, osculating_tower};
use nullitylab_core::{corpus, Subspace, Tolerances};

#[test]
fn oracle_equivalence_on_the_corpus() {
    for (name, alg) in common::full_corpus() {
        common::assert_valid(&alg);
        let gap = common::oracle_curvature_gap(&alg);
        assert!(gap < 1e-9, "{name}: oracle gap {gap:e}");
    }
}

#[test]
fn so3_nullity_is_zero_by_brute_force() {
    // Independent route: constant-curvature operators from the frame
    // pipeline pair every direction non-trivially with some basis vector.
    let alg = corpus::so3_bi_invariant();
    let oracle = common::frame_curvature(&alg);
    for v in 0..3 {
        let worst = (0..3)
            .map(|j| {
                let mut op = oracle[v][j].clone();
                op.iter_mut().for_each(|x| *x = x.abs());
                op.max()
            })
            .fold(0.0f64, f64::max);
        assert!(worst > 0.1, "direction {v} pairs trivially");
    }
    // and the production kernel agrees
    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let nullity = nullity_space(&ct, &Tolerances::default()).unwrap();
    assert_eq!(nullity.dim(), 0);
}

#[test]
fn family_nullity_matches_brute_force_span() {
    // d = 5: the kernel must be exactly the middle columns. Verified on the
    // oracle tensor entry by entry, independently of any SVD.
    let d = 5;
    let spec = ExampleSpec::default_family(d).unwrap();
    let alg = build_example(&spec);
    let oracle = common::frame_curvature(&alg);
    let n = d + 1;

    let pair_norm = |v: usize| -> f64 {
        (0..n).map(|j| oracle[v][j].amax()).fold(0.0, f64::max)
    };
    for v in 1..(d - 1) {
        assert!(pair_norm(v) < 1e-13, "axis {v} should be in the nullity");
    }
    for v in [0, d - 1, d] {
        assert!(pair_norm(v) > 1e-3, "axis {v} should pair non-trivially");
    }

    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let nullity = nullity_space(&ct, &Tolerances::default()).unwrap();
    assert_eq!(nullity.dim(), d - 2);
    for v in 1..(d - 1) {
        assert!(nullity.contains_vector(&basis_vector(n, v)));
    }
}

#[test]
fn tower_from_the_nullity_complement_fills_the_space() {
    let tol = Tolerances::default();
    let spec = ExampleSpec::default_family(4).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let chain = distribution_chain(&alg, &table, &ct, &tol).unwrap();
    let seed = chain.nullity.orthogonal_complement();
    let tower = osculating_tower(&alg, &table, &seed, 10);
    assert!(tower.len() <= 3, "reached in at most 2 steps");
    assert!(tower.last().unwrap().is_full());
}

#[test]
fn tower_from_the_nullity_stabilizes_at_the_bounded_distribution() {
    let tol = Tolerances::default();
    let spec = ExampleSpec::default_family(5).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let chain = distribution_chain(&alg, &table, &ct, &tol).unwrap();
    let tower = osculating_tower(&alg, &table, &chain.nullity, 10);
    // nullity, osc1, osc2, full: the second stage coincides with the bounded
    // distribution, and the iteration keeps growing past it (the bounded
    // distribution is not autoparallel here).
    assert_eq!(tower.len(), 4);
    assert!(tower[1].equals(&chain.osc1));
    assert!(tower[2].equals(&chain.osc2));
    assert!(tower[2].equals(&chain.bounded));
    assert!(tower[3].is_full());
}

#[test]
fn so3_closure_spans_all_skew_matrices() {
    let alg = corpus::so3_bi_invariant();
    let table = nomizu_table(&alg).unwrap();
    let hol = kostant_span(&table, &Tolerances::default()).unwrap();
    assert_eq!(hol.dim(), 3);
    // brute force: the three elementary skew matrices all project inside
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut e = nalgebra::DMatrix::zeros(3, 3);
        e[(i, j)] = 1.0;
        e[(j, i)] = -1.0;
        assert!(hol.projection_residual(&e) < 1e-10);
    }
}

#[test]
fn family_closure_dimension_is_stable_across_tolerances() {
    let spec = ExampleSpec::default_family(3).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let mut dims = Vec::new();
    for tol_alg in [1e-10, 1e-8, 1e-6] {
        let tol = Tolerances {
            tol_alg,
            ..Tolerances::default()
        };
        let hol = kostant_span(&table, &tol).unwrap();
        dims.push(hol.dim());
    }
    assert!(dims.windows(2).all(|w| w[0] == w[1]), "dims {dims:?}");
    // closure contains the generators of the two non-flat directions and
    // their bracket
    let tol = Tolerances::default();
    let hol = kostant_span(&table, &tol).unwrap();
    assert!(hol.projection_residual(table.operator(2)) < 1e-10);
    assert!(hol.projection_residual(table.operator(3)) < 1e-10);
    let br = table.operator(3) * table.operator(2) - table.operator(2) * table.operator(3);
    assert!(hol.projection_residual(&br) < 1e-10);
}

#[test]
fn witness_matches_the_second_axis_derivative_of_the_action_field() {
    // Cross-module consistency: the chosen witness equals
    // -(1/a) * (nab A) e_2 for the default family.
    for d in 4..=8 {
        let spec = ExampleSpec::default_family(d).unwrap();
        let alg = build_example(&spec);
        let tol = Tolerances::default();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let chain = distribution_chain(&alg, &table, &ct, &tol).unwrap();
        let witness = nullitylab_core::symmetry::adapted_transvection_witness(
            &alg, &table, &ct, &chain, &tol,
        )
        .unwrap();
        let expected = (table.operator(d) * basis_vector(d + 1, 1)).scale(-1.0 / spec.a());
        assert!(
            (&witness.vector - expected).amax() < 1e-10,
            "d={d}: witness deviates"
        );
        assert!(witness.certificate.passes());
    }
}

#[test]
fn nullity_subspace_members_satisfy_the_kernel_condition() {
    // every returned basis vector annihilates the curvature in all slots
    for (name, alg) in common::full_corpus() {
        let tol = Tolerances::default();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let nullity = nullity_space(&ct, &tol).unwrap();
        for v in nullity.basis_vectors() {
            let res = nullitylab_core::nullity::nullity_membership_residual(&ct, &v);
            assert!(res <= tol.tol_alg, "{name}: residual {res:e}");
        }
    }
}

#[test]
fn subspace_invariance_under_metric_rotations() {
    let tol = Tolerances::default();
    for seed in [1u64, 2, 3] {
        let spec = ExampleSpec::default_family(5).unwrap();
        let alg = build_example(&spec);
        let (rotated, o) = common::rotated_algebra(&alg, seed);
        common::assert_valid(&rotated);

        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let chain = distribution_chain(&alg, &table, &ct, &tol).unwrap();

        let table_r = nomizu_table(&rotated).unwrap();
        let ct_r = curvature_table(&rotated, &table_r).unwrap();
        let chain_r = distribution_chain(&rotated, &table_r, &ct_r, &tol).unwrap();

        let o_inv = o.clone().try_inverse().unwrap();
        for (ours, theirs) in [
            (&chain.nullity, &chain_r.nullity),
            (&chain.osc1, &chain_r.osc1),
            (&chain.osc2, &chain_r.osc2),
            (&chain.bounded, &chain_r.bounded),
        ] {
            let mapped = Subspace::from_columns(&(&o_inv * ours.basis()), tol.tol_sub);
            assert_eq!(mapped.dim(), theirs.dim());
            let gap: f64 = mapped
                .inclusion_residual(theirs)
                .max(theirs.inclusion_residual(&mapped));
            assert!(gap < 1e-8, "seed {seed}: principal angle gap {gap:e}");
        }

        // Ricci eigenvalues are invariants.
        let ours: Vec<f64> = ct.ricci().eigenvalues.clone();
        let theirs: Vec<f64> = ct_r.ricci().eigenvalues.clone();
        let gap = ours
            .iter()
            .zip(&theirs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 1e-9, "seed {seed}: Ricci spectrum moved by {gap:e}");
    }
}

#[test]
fn family_center_is_trivial() {
    // kernel of the adjoint map is zero for every family member
    for d in 3..=12 {
        let spec = ExampleSpec::default_family(d).unwrap();
        let alg = build_example(&spec);
        let s = nullitylab_core::algebra::structure_predicates(&alg, &Tolerances::default())
            .unwrap();
        assert_eq!(s.center_dim, 0, "d={d}");
    }
}

#[test]
fn family_symmetry_inclusions() {
    use nullitylab_core::subspace::span_of;
    let tol = Tolerances::default();
    for d in 3..=8 {
        let spec = ExampleSpec::default_family(d).unwrap();
        let alg = build_example(&spec);
        let n = alg.dim();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let tset = nullitylab_core::symmetry::transvection_set(&alg, &table, &ct, &tol).unwrap();
        let chain = distribution_chain(&alg, &table, &ct, &tol).unwrap();

        // null-Jacobi transvections sit inside the abelian part, which sits
        // inside the Cartan subspace
        let null_jacobi = span_of(&tset.null_jacobi_basis, n, tol.tol_sub);
        let abelian = span_of(&tset.abelian_part_basis, n, tol.tol_sub);
        assert!(abelian.contains(&null_jacobi), "d={d}");
        assert!(tset.symmetric_subspace.contains(&abelian), "d={d}");

        // the adapted distribution lies in the flat symmetric subspace
        assert!(tset.flat_symmetry.contains(&chain.adapted), "d={d}");

        // the Cartan subspace is abelian for the family
        for a in &tset.cartan_basis {
            for b in &tset.cartan_basis {
                assert!(alg.bracket(a, b).amax() < 1e-12, "d={d}");
            }
        }
    }
}

#[test]
fn obstruction_cross_check_over_corpus() {
    // reductive or 2-step nilpotent inputs without a flat factor must have
    // zero nullity
    let tol = Tolerances::default();
    for (name, alg) in common::full_corpus() {
        let s = nullitylab_core::algebra::structure_predicates(&alg, &tol).unwrap();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let hol = kostant_span(&table, &tol).unwrap();
        let flat = nullitylab_core::holonomy::flat_factor_detector(&hol, &ct, &tol).unwrap();
        let obstructed = s.reductive || s.nilpotent_step.map(|k| k <= 2).unwrap_or(false);
        if obstructed && flat.dim() == 0 {
            let nullity = nullity_space(&ct, &tol).unwrap();
            assert_eq!(nullity.dim(), 0, "{name}: obstruction violated");
        }
    }
}

#[test]
fn family_sectional_curvatures_take_both_signs() {
    // Coordinate planes only reach zero and negative values; planes through
    // the Ricci eigenvectors realize the positive sign as well.
    let tol = Tolerances::default();
    for d in 3..=6 {
        let spec = ExampleSpec::default_family(d).unwrap();
        let alg = build_example(&spec);
        let n = alg.dim();
        let table = nomizu_table(&alg).unwrap();
        let ct = curvature_table(&alg, &table).unwrap();
        let scale = spec.a() * spec.a();

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut record = |k: f64| {
            lo = lo.min(k);
            hi = hi.max(k);
        };
        for i in 0..n {
            for j in (i + 1)..n {
                record(
                    nullitylab_core::curvature::sectional(
                        &ct,
                        &basis_vector(n, i),
                        &basis_vector(n, j),
                        &tol,
                    )
                    .unwrap(),
                );
            }
        }
        let (_, vectors) = nullitylab_core::linalg::symmetric_eigenpairs(&ct.ricci().matrix);
        for c in 0..n {
            let v: DVector<f64> = vectors.column(c).into();
            for j in 0..n {
                if let Ok(k) =
                    nullitylab_core::curvature::sectional(&ct, &v, &basis_vector(n, j), &tol)
                {
                    record(k);
                }
            }
        }
        assert!(hi > 1e-3 * scale, "d={d}: no positive section found ({hi:e})");
        assert!(lo < -1e-3 * scale, "d={d}: no negative section found ({lo:e})");
    }
}

#[test]
fn frozen_ricci_values_at_small_dimensions() {
    // d = 3 (a^2 = 1/5): eigenvalues {(-1-sqrt5)/10, -1/5, 0, (-1+sqrt5)/10},
    // scalar -2/5.
    let phi = 5.0f64.sqrt();
    let spec = ExampleSpec::default_family(3).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let expected = [(-1.0 - phi) / 10.0, -0.2, 0.0, (-1.0 + phi) / 10.0];
    for (got, want) in ct.ricci().eigenvalues.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!((ct.ricci().scalar + 0.4).abs() < 1e-9);

    // d = 4 (a^2 = 1/9): {(-1-sqrt5)/18, -1/9, 0, 0, (-1+sqrt5)/18}, scalar -2/9.
    let spec = ExampleSpec::default_family(4).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let ct = curvature_table(&alg, &table).unwrap();
    let expected = [
        (-1.0 - phi) / 18.0,
        -1.0 / 9.0,
        0.0,
        0.0,
        (-1.0 + phi) / 18.0,
    ];
    for (got, want) in ct.ricci().eigenvalues.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!((ct.ricci().scalar + 2.0 / 9.0).abs() < 1e-9);
}

#[test]
fn covariant_derivative_of_action_field_in_nullity_direction() {
    // frozen expansion of column 2 of the action operator at d = 6
    let d = 6;
    let spec = ExampleSpec::default_family(d).unwrap();
    let alg = build_example(&spec);
    let table = nomizu_table(&alg).unwrap();
    let v = basis_vector(d + 1, 1);
    let got = nullitylab_core::connection::covariant_derivative(&table, &v, d).unwrap();
    let a = spec.a();
    let mut expected = DVector::zeros(d + 1);
    expected[0] = -a;
    for k in 2..(d - 1) {
        expected[k] = a;
    }
    assert!((got - expected).amax() < 1e-14);
}
