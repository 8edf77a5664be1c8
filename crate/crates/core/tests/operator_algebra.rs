use num_complex::Complex64 as C64;
use p1n_core::jet_calculus::{SmoothField, VectorField};
use p1n_core::operator_algebra::{
    build_class2_limit, build_covariant_class1, build_covariant_class3, build_qm,
    build_qm_heisenberg, build_qm_schrodinger, casimir_w, check_b_covariance, commutator_apply,
    tilde_transform, verify_algebra, verify_casimir, verify_invariance_condition,
    verify_p_squared, DiffOperator, GeneratorError, GeneratorSet, Picture, RepClass, Sign,
    TestFieldBattery,
};
use p1n_core::spin_reps::{
    o4_irrep, so3_spin, tilde_continue, trivial, vector_rep, CMatrix, LittleGroupRep, MaxAbs,
    PlaneTable,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn points(gs: &GeneratorSet, seed: u64, count: usize) -> Vec<Vec<f64>> {
    gs.sample_points(&mut ChaCha8Rng::seed_from_u64(seed), count)
}

fn half_spinor() -> LittleGroupRep {
    o4_irrep(0.0, 0.5).unwrap().0
}

fn apply(op: &DiffOperator, f: &VectorField, pt: &[f64]) -> Vec<C64> {
    let fj = f.eval_jet2(pt).unwrap();
    op.evaluate(pt).unwrap().apply_jet2(&fj).iter().map(|j| j.value).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn assert_sweep(gs: &GeneratorSet, pts: &[Vec<f64>], tol: f64) {
    let r = verify_algebra(gs, pts, &TestFieldBattery::new(11, 3), tol).unwrap();
    assert!(r.pass, "{r}");
}

#[test]
fn p1_j12_commutator_is_minus_i_p2() {
    let gs = build_covariant_class1(4, &half_spinor()).unwrap();
    let battery = TestFieldBattery::new(5, 1);
    for (i, pt) in points(&gs, 1, 10).iter().enumerate() {
        let f = battery.field(pt, i, 0, gs.matrix_dim());
        let lhs = commutator_apply(gs.p(1), &gs.j(1, 2), &f, pt).unwrap();
        let rhs: Vec<C64> = apply(gs.p(2), &f, pt).iter().map(|v| -I * v).collect();
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }
}

#[test]
fn trivial_covariant_set_is_orbital() {
    let gs = build_covariant_class1(4, &trivial(4).unwrap()).unwrap();
    for pt in points(&gs, 2, 5) {
        for (_, op) in gs.labelled() {
            let d = op.dense_coefficients(&pt).unwrap();
            let o = op.orbital_part().dense_coefficients(&pt).unwrap();
            assert_eq!(d.max_difference(&o), 0.0);
        }
    }
}

#[test]
fn covariant_class1_spin_half_in_three_dimensions_closes() {
    let gs = build_covariant_class1(3, &so3_spin(0.5).unwrap()).unwrap();
    assert_sweep(&gs, &points(&gs, 3, 20), 1e-9);
}

#[test]
fn covariant_class3_closes_and_is_spacelike() {
    for rep in [trivial(4).unwrap(), half_spinor()] {
        let gs = build_covariant_class3(4, &tilde_continue(&rep).unwrap()).unwrap();
        let pts = points(&gs, 4, 20);
        assert_sweep(&gs, &pts, 1e-9);
        for pt in &pts {
            let m = gs.p_squared_matrix(pt).unwrap();
            assert!(m[(0, 0)].re < 0.0);
        }
    }
}

#[test]
fn tilde_transform_matches_direct_class3_construction() {
    for rep in [trivial(4).unwrap(), half_spinor(), o4_irrep(0.5, 0.5).unwrap().0] {
        let t = tilde_transform(&build_covariant_class1(4, &rep).unwrap()).unwrap();
        let direct = build_covariant_class3(4, &tilde_continue(&rep).unwrap()).unwrap();
        assert_eq!(t.class(), RepClass::III);
        for pt in points(&direct, 5, 10) {
            for ((la, a), (_, b)) in t.labelled().iter().zip(direct.labelled()) {
                let d = a
                    .dense_coefficients(&pt)
                    .unwrap()
                    .max_difference(&b.dense_coefficients(&pt).unwrap());
                assert!(d <= 1e-12, "{la} differs by {d}");
            }
        }
    }
}

#[test]
fn tilde_momentum_square_is_the_continued_class1_value_and_negative() {
    let g1 = build_covariant_class1(4, &half_spinor()).unwrap();
    let t = tilde_transform(&g1).unwrap();
    for q in points(&t, 6, 10) {
        let pt = t.p_squared_matrix(&q).unwrap();
        // p_0 = −i q_n, p_a = q_a, p_n = i q_0 in complex arithmetic
        let mut p: Vec<C64> = q.iter().map(|&x| C64::new(x, 0.0)).collect();
        p[0] = -I * q[4];
        p[4] = I * q[0];
        let p2 = p[0] * p[0] - p[1..].iter().map(|z| z * z).sum::<C64>();
        assert!((pt[(0, 0)] - p2).norm() < 1e-12);
        assert!(pt[(0, 0)].re < 0.0);
        assert!((&pt - CMatrix::identity(2, 2) * pt[(0, 0)]).max_abs() == 0.0);
    }
}

#[test]
fn tilde_momentum_square_flips_sign_under_axis_exchange_without_transverse_momentum() {
    let g1 = build_covariant_class1(4, &half_spinor()).unwrap();
    let t = tilde_transform(&g1).unwrap();
    for (q0, qn) in [(0.3, 1.2), (-0.5, 0.9), (0.0, 1.5)] {
        let q = [q0, 0.0, 0.0, 0.0, qn];
        let p = [qn, 0.0, 0.0, 0.0, q0];
        let a = t.p_squared_matrix(&q).unwrap();
        let b = g1.p_squared_matrix(&p).unwrap();
        assert!((&a + &b).max_abs() < 1e-12);
    }
}

#[test]
fn tilde_transform_rejects_non_covariant_input() {
    let gs = build_qm_heisenberg(RepClass::I, 4, &half_spinor(), 1.0, Sign::Plus).unwrap();
    assert!(matches!(tilde_transform(&gs), Err(GeneratorError::WrongKind { .. })));
}

#[test]
fn qm_class1_half_spinor_closes() {
    let gs = build_qm_heisenberg(RepClass::I, 4, &half_spinor(), 1.0, Sign::Plus).unwrap();
    assert_eq!(gs.var_dim(), 4);
    assert_sweep(&gs, &points(&gs, 7, 20), 1e-9);
}

#[test]
fn qm_trivial_rotations_are_orbital() {
    let gs = build_qm_heisenberg(RepClass::I, 4, &trivial(4).unwrap(), 1.0, Sign::Plus).unwrap();
    assert_sweep(&gs, &points(&gs, 8, 10), 1e-9);
    let pt = [0.3, -0.2, 0.5, 0.1];
    for k in 1..=4 {
        for l in (k + 1)..=4 {
            let j = gs.j(k, l);
            let d = j.dense_coefficients(&pt).unwrap();
            let o = j.orbital_part().dense_coefficients(&pt).unwrap();
            assert_eq!(d.max_difference(&o), 0.0);
        }
    }
}

#[test]
fn symmetrized_time_position_product_has_ordering_term() {
    let n = 3;
    let kappa: f64 = 1.3;
    for eps in [1.0, -1.0] {
        let q: Vec<SmoothField> = (0..n).map(|k| SmoothField::var(n, k)).collect();
        let s = q.iter().fold(SmoothField::real(n, kappa * kappa), |a, v| &a + &v.square());
        let p0 = s.sqrt().scale(C64::new(eps, 0.0));
        let battery = TestFieldBattery::new(9, 3);
        for (i, pt) in [[0.2, -0.4, 0.7], [1.1, 0.3, -0.6]].iter().enumerate() {
            let r: f64 = pt.iter().map(|x| x * x).sum::<f64>() + kappa * kappa;
            for fi in 0..3 {
                let f = battery.field(pt, i, fi, 1);
                let fj = f.eval_jet2(pt).unwrap();
                let pj = p0.eval_jet2(pt).unwrap();
                for k in 0..n {
                    // ½(x_k p_0 + p_0 x_k) f with x_k = i∂_k, straight from jets
                    let pf = &pj * &fj[0];
                    let lhs = 0.5 * (I * pf.partial(k) + pj.value() * I * fj[0].partial(k));
                    let op = DiffOperator::derivative(n, 1, k)
                        .left_multiply(&p0)
                        .scale(I)
                        .add(&DiffOperator::multiplication(
                            q[k].scale(C64::new(0.5 * eps / r.sqrt(), 0.0)).scale(I),
                            None,
                            1,
                        ));
                    let rhs = apply(&op, &f, pt)[0];
                    assert!((lhs - rhs).norm() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn schrodinger_at_time_zero_equals_heisenberg() {
    let rep = half_spinor();
    let h = build_qm_heisenberg(RepClass::I, 4, &rep, 1.0, Sign::Plus).unwrap();
    let s = build_qm_schrodinger(RepClass::I, 4, &rep, 1.0, Sign::Plus, 0.0).unwrap();
    assert_eq!(s.picture(), Picture::Schrodinger);
    for pt in points(&h, 9, 5) {
        for ((l, a), (_, b)) in h.labelled().iter().zip(s.labelled()) {
            let d = a
                .dense_coefficients(&pt)
                .unwrap()
                .max_difference(&b.dense_coefficients(&pt).unwrap());
            assert_eq!(d, 0.0, "{l}");
        }
    }
}

#[test]
fn only_boosts_depend_on_time() {
    let rep = half_spinor();
    let a = build_qm_schrodinger(RepClass::I, 4, &rep, 1.0, Sign::Plus, 0.0).unwrap();
    let b = build_qm_schrodinger(RepClass::I, 4, &rep, 1.0, Sign::Plus, 1.7).unwrap();
    let pt = [0.3, -0.2, 0.5, 0.1];
    for ((l, x), (_, y)) in a.labelled().iter().zip(b.labelled()) {
        let d = x
            .dense_coefficients(&pt)
            .unwrap()
            .max_difference(&y.dense_coefficients(&pt).unwrap());
        if l.starts_with("J_0") {
            assert!(d > 0.1, "{l}");
        } else {
            assert_eq!(d, 0.0, "{l}");
        }
    }
}

#[test]
fn invariance_condition_holds_at_several_times() {
    let rep = half_spinor();
    for x0 in [0.0, 0.7, -2.3] {
        let gs = build_qm_schrodinger(RepClass::I, 4, &rep, 1.0, Sign::Plus, x0).unwrap();
        let pts = points(&gs, 10, 10);
        let r = verify_invariance_condition(&gs, &pts, &TestFieldBattery::new(2, 3), 1e-10).unwrap();
        assert!(r.pass, "x0 = {x0}: {r}");
        for e in &r.entries {
            if e.pair.starts_with("[P_0,J_") && !e.pair.starts_with("[P_0,J_0") {
                assert!(e.residual < 1e-12, "{}", e.pair);
            }
            if e.pair.starts_with("[P_0,P_") {
                assert!(e.residual < 1e-14, "{}", e.pair);
            }
        }
        assert_sweep(&gs, &pts, 1e-9);
    }
}

#[test]
fn energy_commutes_into_boost_as_momentum() {
    // [P_0, J_0k] f = i p_k f
    let gs = build_qm_schrodinger(RepClass::I, 3, &so3_spin(0.5).unwrap(), 1.0, Sign::Plus, 0.4).unwrap();
    let battery = TestFieldBattery::new(4, 1);
    for (i, pt) in points(&gs, 12, 10).iter().enumerate() {
        let f = battery.field(pt, i, 0, 2);
        for k in 1..=3 {
            let c = commutator_apply(gs.p(0), &gs.j(0, k), &f, pt).unwrap();
            let expect: Vec<C64> = f.eval_value(pt).unwrap().iter().map(|v| I * pt[k - 1] * v).collect();
            assert!(max_diff(&c, &expect) < 1e-12);
        }
    }
}

#[test]
fn invariance_check_rejects_heisenberg_sets() {
    let gs = build_qm_heisenberg(RepClass::I, 3, &trivial(3).unwrap(), 1.0, Sign::Plus).unwrap();
    let r = verify_invariance_condition(&gs, &[vec![0.1, 0.2, 0.3]], &TestFieldBattery::new(1, 1), 1e-10);
    assert!(matches!(r, Err(GeneratorError::WrongKind { .. })));
}

#[test]
fn qm_class3_closes_outside_the_tachyonic_ball() {
    let rep = tilde_continue(&half_spinor()).unwrap();
    let gs = build_qm(RepClass::III, 4, &rep, 1.0, Sign::Plus, None).unwrap();
    let pts = points(&gs, 13, 20);
    assert!(pts.iter().all(|p| p.iter().map(|x| x * x).sum::<f64>() > 1.0));
    assert_sweep(&gs, &pts, 1e-9);
    assert!(matches!(gs.check_point(&[0.1, 0.2, 0.0, 0.0]), Err(GeneratorError::Domain { .. })));
}

#[test]
fn class2_energy_is_signed_modulus() {
    for eps in [Sign::Plus, Sign::Minus] {
        let gs = build_class2_limit(4, &half_spinor(), eps).unwrap();
        for pt in points(&gs, 14, 10) {
            let m = gs.p(0).dense_coefficients(&pt).unwrap().mult;
            let norm = pt.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((m[(0, 0)] - C64::new(eps.value() * norm, 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn class2_limit_closes_and_is_singular_at_rest() {
    for rep in [trivial(4).unwrap(), half_spinor()] {
        let gs = build_class2_limit(4, &rep, Sign::Plus).unwrap();
        let pts: Vec<_> = points(&gs, 15, 30)
            .into_iter()
            .filter(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt() > 0.1)
            .take(20)
            .collect();
        assert_sweep(&gs, &pts, 1e-9);
        assert!(gs.check_point(&[0.0; 4]).is_err());
    }
}

#[test]
fn covariant_class1_rejects_spacelike_points() {
    let gs = build_covariant_class1(3, &trivial(3).unwrap()).unwrap();
    let r = gs.check_point(&[0.1, 1.0, 0.0, 0.0]);
    assert!(matches!(r, Err(GeneratorError::Domain { .. })));
}

#[test]
fn mass_shell_values() {
    let rep = half_spinor();
    let g1 = build_qm_heisenberg(RepClass::I, 4, &rep, 1.5, Sign::Plus).unwrap();
    let r = verify_p_squared(&g1, &points(&g1, 16, 10), 1e-12).unwrap();
    assert!(r.pass, "{r}");
    assert_eq!(g1.expected_p_squared(&[0.0; 4]), 2.25);
    let g2 = build_class2_limit(4, &rep, Sign::Minus).unwrap();
    assert!(verify_p_squared(&g2, &points(&g2, 17, 10), 1e-12).unwrap().pass);
    let g3 = build_qm(RepClass::III, 4, &tilde_continue(&rep).unwrap(), 0.8, Sign::Plus, None).unwrap();
    assert!(verify_p_squared(&g3, &points(&g3, 18, 10), 1e-12).unwrap().pass);
    assert!((g3.expected_p_squared(&[2.0, 0.0, 0.0, 0.0]) + 0.64).abs() < 1e-15);
}

#[test]
fn canonical_commutators() {
    let n = 3;
    let f = TestFieldBattery::new(3, 1).field(&[0.2, 0.1, -0.3], 0, 0, 1);
    let pt = [0.2, 0.1, -0.3];
    let fv = f.eval_value(&pt).unwrap()[0];
    for k in 0..n {
        let x = DiffOperator::derivative(n, 1, k).scale(I);
        for l in 0..n {
            let p = DiffOperator::multiplication(SmoothField::var(n, l), None, 1);
            let c = commutator_apply(&x, &p, &f, &pt).unwrap()[0];
            let expect = if k == l { I * fv } else { C64::new(0.0, 0.0) };
            assert!((c - expect).norm() < 1e-15);
            let pk = DiffOperator::multiplication(SmoothField::var(n, k), None, 1);
            assert_eq!(commutator_apply(&pk, &p, &f, &pt).unwrap()[0], C64::new(0.0, 0.0));
        }
    }
    let gs = build_qm_heisenberg(RepClass::I, 3, &so3_spin(1.0).unwrap(), 1.0, Sign::Plus).unwrap();
    let g = TestFieldBattery::new(3, 1).field(&pt, 0, 0, 3);
    for (_, op) in gs.labelled() {
        let c = commutator_apply(&op, &op, &g, &pt).unwrap();
        assert!(c.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }
}

#[test]
fn dropping_a_boost_spin_term_is_detected() {
    let gs = build_qm_heisenberg(RepClass::I, 4, &half_spinor(), 1.0, Sign::Plus).unwrap();
    let broken = gs.with_j(0, 2, gs.j(0, 2).orbital_part());
    let r = verify_algebra(&broken, &points(&gs, 19, 5), &TestFieldBattery::new(1, 2), 1e-9).unwrap();
    assert!(!r.pass);
    assert!(r
        .failures()
        .iter()
        .any(|e| e.pair.starts_with("[J_0") && e.pair.contains(",J_0")));
}

#[test]
fn small_trivial_sweep_is_tight() {
    let gs = build_covariant_class1(2, &trivial(2).unwrap()).unwrap();
    assert_sweep(&gs, &points(&gs, 20, 10), 1e-12);
    let gs = build_covariant_class1(2, &vector_rep(2).unwrap()).unwrap();
    assert_sweep(&gs, &points(&gs, 21, 10), 1e-9);
}

#[test]
fn casimir_commutes_and_matches_spin_invariant() {
    for rep in [trivial(4).unwrap(), o4_irrep(0.5, 0.5).unwrap().0] {
        let gs = build_qm_heisenberg(RepClass::I, 4, &rep, 1.2, Sign::Plus).unwrap();
        let w = casimir_w(&gs);
        let r = verify_casimir(&gs, &w, &points(&gs, 22, 3), &TestFieldBattery::new(4, 1), 1e-8).unwrap();
        assert!(r.pass, "{r}");
    }
}

#[test]
fn casimir_at_rest_is_mass_squared_times_spin_invariant() {
    let (rep, split) = o4_irrep(0.5, 0.5).unwrap();
    let kappa = 1.5;
    let gs = build_covariant_class1(4, &rep).unwrap();
    let w = casimir_w(&gs);
    let rest = vec![kappa, 0.0, 0.0, 0.0, 0.0];
    let r = verify_casimir(&gs, &w, &[rest], &TestFieldBattery::new(5, 1), 1e-8).unwrap();
    assert!(r.pass, "{r}");
    // Σ S_kl² = 2(S² + T²) from the split
    let c = rep.little_casimir();
    let expect = CMatrix::identity(4, 4) * C64::new(2.0 * (split.casimir_s + split.casimir_t), 0.0);
    assert!((c - expect).max_abs() < 1e-12);
}

fn real_antisymmetric(dim: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(a, b)] = C64::new(1.0, 0.0);
    m[(b, a)] = C64::new(-1.0, 0.0);
    m
}

#[test]
fn zero_b_is_covariant_for_any_family() {
    for rep in [so3_spin(1.0).unwrap(), vector_rep(5).unwrap()] {
        let zeros = vec![CMatrix::zeros(rep.dim(), rep.dim()); rep.indices().len()];
        let r = check_b_covariance(&zeros, rep.table(), 0.0).unwrap();
        assert!(r.pass);
        assert!(r.entries.iter().all(|e| e.residual == 0.0));
    }
}

#[test]
fn identity_in_last_slot_is_not_covariant() {
    let n = 2;
    let dim = n + 2;
    let j = PlaneTable::from_fn(0, n + 1, |a, b| real_antisymmetric(dim, a, b));
    let mut b = vec![CMatrix::zeros(dim, dim); n + 1];
    b[n] = CMatrix::identity(dim, dim);
    let r = check_b_covariance(&b, &j, 1e-12).unwrap();
    assert!(!r.pass);
    for e in r.failures() {
        assert!(e.pair.ends_with(&format!("{n}]")), "{}", e.pair);
    }
}

#[test]
fn b_shape_mismatch_is_an_error() {
    let j = PlaneTable::from_fn(1, 2, |a, b| real_antisymmetric(3, a, b));
    assert!(check_b_covariance(&[CMatrix::zeros(3, 3)], &j, 0.0).is_err());
    assert!(check_b_covariance(&[CMatrix::zeros(3, 3), CMatrix::zeros(2, 2)], &j, 0.0).is_err());
}

#[test]
fn direct_sum_ansatz_search_in_two_dimensions() {
    // basis: index 0 is a scalar, 1..=2 carry the defining rep
    let dim = 3;
    let j = PlaneTable::from_fn(1, 2, |a, b| real_antisymmetric(dim, a, b));
    let ket_bra = |r: usize, c: usize| {
        let mut m = CMatrix::zeros(dim, dim);
        m[(r, c)] = C64::new(1.0, 0.0);
        m
    };
    let vals = [-1.0, 0.0, 1.0];
    let mut found = Vec::new();
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                let bs: Vec<CMatrix> = (1..=2)
                    .map(|mu| {
                        ket_bra(mu, 0) * C64::new(a, 0.0)
                            + ket_bra(0, mu) * C64::new(b, 0.0)
                            + CMatrix::identity(dim, dim) * C64::new(c, 0.0)
                    })
                    .collect();
                if check_b_covariance(&bs, &j, 1e-14).unwrap().pass {
                    found.push((a, b, c));
                }
            }
        }
    }
    let expect: Vec<_> = vals
        .iter()
        .flat_map(|&a| vals.iter().map(move |&b| (a, b, 0.0)))
        .collect();
    assert_eq!(found, expect);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_points_close_for_spin_one(seed in 0u64..1000) {
        let gs = build_qm_heisenberg(RepClass::I, 3, &so3_spin(1.0).unwrap(), 0.9, Sign::Minus).unwrap();
        let pts = points(&gs, seed, 2);
        let r = verify_algebra(&gs, &pts, &TestFieldBattery::new(seed, 1), 1e-9).unwrap();
        prop_assert!(r.pass, "{}", r);
    }

    #[test]
    fn tilde_agreement_at_random_points(seed in 0u64..1000) {
        let rep = so3_spin(0.5).unwrap();
        let t = tilde_transform(&build_covariant_class1(3, &rep).unwrap()).unwrap();
        let d = build_covariant_class3(3, &tilde_continue(&rep).unwrap()).unwrap();
        for pt in points(&d, seed, 2) {
            for ((_, a), (_, b)) in t.labelled().iter().zip(d.labelled()) {
                let diff = a.dense_coefficients(&pt).unwrap().max_difference(&b.dense_coefficients(&pt).unwrap());
                prop_assert!(diff <= 1e-12);
            }
        }
    }
}
