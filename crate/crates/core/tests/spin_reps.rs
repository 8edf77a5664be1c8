use num_complex::Complex64 as C64;
use p1n_core::spin_reps::{
    check_little_group_relations, o4_irrep, so3_spin, tilde_continue, trivial, vector_rep,
    CMatrix, LittleGroupRep, MaxAbs, RepLabel, Signature, SpinError, SpinIsospinSplit,
};
use proptest::prelude::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pauli() -> [CMatrix; 3] {
    let z = r(0.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, r(1.0), r(1.0), z]),
        CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        CMatrix::from_row_slice(2, 2, &[r(1.0), z, z, r(-1.0)]),
    ]
}

/// Ladder-operator angular momentum matrices, weights descending from `s`.
fn ladder(s: f64) -> [CMatrix; 3] {
    let d = (2.0 * s).round() as usize + 1;
    let m = |i: usize| s - i as f64;
    let mut jp = CMatrix::zeros(d, d);
    for i in 1..d {
        // J+ |m⟩ = sqrt(s(s+1) − m(m+1)) |m+1⟩; index i−1 has weight m(i)+1
        jp[(i - 1, i)] = r((s * (s + 1.0) - m(i) * (m(i) + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let j1 = (&jp + &jm) * r(0.5);
    let j2 = (&jp - &jm) * C64::new(0.0, -0.5);
    let j3 = CMatrix::from_fn(d, d, |a, b| if a == b { r(m(a)) } else { r(0.0) });
    [j1, j2, j3]
}

fn diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).max_abs()
}

fn casimir(rep: &LittleGroupRep) -> CMatrix {
    rep.little_casimir()
}

#[test]
fn spin_half_has_diagonal_s12() {
    let rep = so3_spin(0.5).unwrap();
    assert_eq!(rep.dim(), 2);
    let expect = CMatrix::from_row_slice(2, 2, &[r(0.5), r(0.0), r(0.0), r(-0.5)]);
    assert!(diff(&rep.generator(1, 2), &expect) < 1e-15);
}

#[test]
fn spin_matrices_match_ladder_construction() {
    for twice in 0..=4 {
        let s = twice as f64 / 2.0;
        let rep = so3_spin(s).unwrap();
        let j = ladder(s);
        assert!(diff(&rep.generator(2, 3), &j[0]) < 1e-14, "s = {s}");
        assert!(diff(&rep.generator(3, 1), &j[1]) < 1e-14, "s = {s}");
        assert!(diff(&rep.generator(1, 2), &j[2]) < 1e-14, "s = {s}");
    }
}

#[test]
fn spin_zero_is_one_by_one_zero() {
    let rep = so3_spin(0.0).unwrap();
    assert_eq!(rep.dim(), 1);
    for m in rep.table().values() {
        assert_eq!(m.max_abs(), 0.0);
    }
}

#[test]
fn spin_one_casimir_is_two() {
    let rep = so3_spin(1.0).unwrap();
    let c = casimir(&rep);
    assert!(diff(&c, &(CMatrix::identity(3, 3) * r(2.0))) < 1e-14);
}

#[test]
fn non_half_integer_labels_are_rejected() {
    assert!(matches!(so3_spin(1.0 / 3.0), Err(SpinError::NotHalfInteger(_))));
    assert!(matches!(so3_spin(-0.5), Err(SpinError::NotHalfInteger(_))));
    assert!(o4_irrep(0.25, 0.0).is_err());
    assert!("1/3".parse::<RepLabel>().is_err());
}

#[test]
fn o4_zero_half_matches_pauli_matrices() {
    let (rep, split) = o4_irrep(0.0, 0.5).unwrap();
    assert_eq!(rep.dim(), 2);
    let sig = pauli();
    let cyc = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];
    for &(a, b, c) in &cyc {
        let half = &sig[a - 1] * r(0.5);
        assert!(diff(&rep.generator(b, c), &half) < 1e-15);
        assert!(diff(&rep.generator(4, a), &(-&half)) < 1e-15);
    }
    assert_eq!(split.casimir_s, 0.0);
    assert_eq!(split.casimir_t, 0.75);
    assert!(split.check(1e-12).pass);
}

#[test]
fn o4_trivial_is_six_zeros() {
    let (rep, split) = o4_irrep(0.0, 0.0).unwrap();
    assert_eq!(rep.dim(), 1);
    assert_eq!(rep.table().values().len(), 6);
    assert!(rep.table().values().iter().all(|m| m.max_abs() == 0.0));
    assert_eq!((split.casimir_s, split.casimir_t), (0.0, 0.0));
}

#[test]
fn o4_half_half_matches_product_construction() {
    let (rep, split) = o4_irrep(0.5, 0.5).unwrap();
    assert_eq!(rep.dim(), 4);
    assert_eq!((split.casimir_s, split.casimir_t), (0.75, 0.75));
    let id2 = CMatrix::identity(2, 2);
    let sig = pauli();
    for a in 0..3 {
        let s = (&sig[a] * r(0.5)).kronecker(&id2);
        let t = id2.kronecker(&(&sig[a] * r(0.5)));
        assert!(diff(&split.s_vec[a], &s) < 1e-15);
        assert!(diff(&split.t_vec[a], &t) < 1e-15);
    }
    assert!(split.check(1e-12).pass);
}

#[test]
fn vector_rep_three_pattern() {
    let rep = vector_rep(3).unwrap();
    let s = rep.generator(1, 2);
    for i in 0..3 {
        for j in 0..3 {
            let expect = match (i, j) {
                (0, 1) => -I,
                (1, 0) => I,
                _ => r(0.0),
            };
            assert_eq!(s[(i, j)], expect);
        }
    }
}

#[test]
fn vector_rep_two_has_eigenvalues_plus_minus_one() {
    let rep = vector_rep(2).unwrap();
    let s = rep.generator(1, 2);
    let h = nalgebra::Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
    let mut ev: Vec<f64> = h.eigenvalues().unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    assert!(matches!(vector_rep(1), Err(SpinError::DimensionTooSmall { .. })));
}

#[test]
fn vector_rep_generators_are_traceless() {
    for n in 2..=6 {
        let rep = vector_rep(n).unwrap();
        for m in rep.table().values() {
            assert_eq!(m.trace(), r(0.0));
        }
    }
}

#[test]
fn tilde_of_zero_half_has_anti_hermitian_boosts() {
    let (rep, _) = o4_irrep(0.0, 0.5).unwrap();
    let t = tilde_continue(&rep).unwrap();
    assert_eq!(t.signature(), Signature::Lorentz);
    let sig = pauli();
    for a in 1..=3 {
        let boost = t.generator(0, a);
        assert!(diff(&boost, &(&sig[a - 1] * C64::new(0.0, 0.5))) < 1e-15);
        assert!(diff(&boost, &(-boost.adjoint())) < 1e-15);
    }
    assert!(!t.is_hermitian(1e-3));
}

#[test]
fn tilde_of_trivial_is_zero() {
    let t = tilde_continue(&trivial(4).unwrap()).unwrap();
    assert!(t.table().values().iter().all(|m| m.max_abs() == 0.0));
    assert!(matches!(tilde_continue(&t), Err(SpinError::NotCompact)));
}

fn all_reps() -> Vec<LittleGroupRep> {
    let mut reps = vec![vector_rep(2).unwrap(), vector_rep(3).unwrap(), vector_rep(4).unwrap(), vector_rep(5).unwrap()];
    for twice in 0..=3 {
        reps.push(so3_spin(twice as f64 / 2.0).unwrap());
    }
    for ts in 0..=3u32 {
        for tt in 0..=(3 - ts) {
            reps.push(o4_irrep(ts as f64 / 2.0, tt as f64 / 2.0).unwrap().0);
        }
    }
    reps
}

#[test]
fn every_constructed_rep_closes_and_its_continuation_closes() {
    for rep in all_reps() {
        let rel = check_little_group_relations(&rep, 1e-12);
        assert!(rel.pass, "{} n={} residual {}", rep.label(), rep.n(), rel.max_residual);
        assert!(rep.is_hermitian(1e-15));
        let t = tilde_continue(&rep).unwrap();
        let rel = check_little_group_relations(&t, 1e-12);
        assert!(rel.pass, "tilde {} residual {}", rep.label(), rel.max_residual);
    }
}

#[test]
fn vector_rep_four_passes_tightly() {
    let rel = check_little_group_relations(&vector_rep(4).unwrap(), 1e-13);
    assert!(rel.pass);
    assert_eq!(rel.entries.len(), 21);
}

#[test]
fn corrupted_entry_is_detected_at_its_size() {
    let rep = vector_rep(4).unwrap().perturbed(1, 2, 0, 0, r(1e-3));
    let rel = check_little_group_relations(&rep, 1e-12);
    assert!(!rel.pass);
    assert!(rel.max_residual > 5e-4 && rel.max_residual < 2e-3, "{}", rel.max_residual);
}

#[test]
fn zero_rep_residuals_are_exactly_zero() {
    let rel = check_little_group_relations(&trivial(3).unwrap(), 0.0);
    assert!(rel.pass);
    assert!(rel.entries.iter().all(|e| e.residual == 0.0));
}

#[test]
fn split_relations_hold_for_small_labels() {
    for ts in 0..=3u32 {
        for tt in 0..=(3 - ts) {
            let (rep, split) = o4_irrep(ts as f64 / 2.0, tt as f64 / 2.0).unwrap();
            let rep_ = split.check(1e-12);
            assert!(rep_.pass, "({ts}/2,{tt}/2): {rep_:?}");
            let back = SpinIsospinSplit::from_rep(&rep).unwrap();
            for a in 0..3 {
                assert_eq!(back.s_vec[a], split.s_vec[a]);
                assert_eq!(back.t_vec[a], split.t_vec[a]);
            }
        }
    }
}

#[test]
fn mutated_split_is_detected() {
    let (rep, _) = o4_irrep(0.5, 0.5).unwrap();
    let bad = rep.perturbed(2, 3, 0, 1, r(1e-3));
    let split = SpinIsospinSplit::from_rep(&bad).unwrap();
    let rep_ = split.check(1e-12);
    assert!(!rep_.pass);
    assert!(rep_.max_residual > 1e-4);
}

#[test]
fn export_json_has_row_major_pairs() {
    let v = so3_spin(0.5).unwrap().to_json();
    assert_eq!(v["dim"], 2);
    let gens = v["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 3);
    let s12 = gens.iter().find(|g| g["plane"] == serde_json::json!([1, 2])).unwrap();
    assert_eq!(s12["matrix"][0][0], serde_json::json!([0.5, 0.0]));
    assert_eq!(s12["matrix"][1][1], serde_json::json!([-0.5, 0.0]));
}

proptest! {
    #[test]
    fn o4_casimirs_are_matrix_identities(ts in 0u32..5, tt in 0u32..5) {
        let (s, t) = (ts as f64 / 2.0, tt as f64 / 2.0);
        let (rep, split) = o4_irrep(s, t).unwrap();
        prop_assert_eq!(rep.dim(), (ts as usize + 1) * (tt as usize + 1));
        let d = rep.dim();
        let id = CMatrix::identity(d, d);
        let sq = |v: &[CMatrix; 3]| v.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * m);
        prop_assert!(diff(&sq(&split.s_vec), &(&id * r(s * (s + 1.0)))) < 1e-12);
        prop_assert!(diff(&sq(&split.t_vec), &(&id * r(t * (t + 1.0)))) < 1e-12);
        for a in 0..3 {
            for b in 0..3 {
                let c = &split.s_vec[a] * &split.t_vec[b] - &split.t_vec[b] * &split.s_vec[a];
                prop_assert!(c.max_abs() < 1e-12);
            }
        }
        prop_assert!(rep.is_hermitian(1e-14));
    }

    #[test]
    fn plane_antisymmetry(n in 2usize..7, a in 1usize..7, b in 1usize..7) {
        prop_assume!(a <= n && b <= n);
        let rep = vector_rep(n).unwrap();
        prop_assert_eq!(rep.generator(a, b), -rep.generator(b, a));
    }
}
