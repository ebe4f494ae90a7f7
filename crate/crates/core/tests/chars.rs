mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use common::{arb_homogeneous, base_f, c, devs, selected_gaussian};
use itp_core::chars::{
    char_eval, char_eval_with, char_sup_lower, psd_check, state_eval, strict_ext_check, tail_product, CharEvalCfg, Character,
    CosineNonState, PdCandidate, PointSeq, ProductState, TailRule, TailVerdict,
};
use itp_core::fnalg::make_bump;
use itp_core::infprod::CONVERGENCE_TOL;
use itp_core::measures::{Measure1D, ProductMeasure, QuadratureCfg};
use itp_core::tensor::{adjoint, cross_norm_upper, fin_seq, mul, ElemTensor, FinSeq, StabSeq, Tail, TensorElem};
use itp_core::Error;
use proptest::prelude::*;

fn origin_char(q: f64) -> Character {
    Character::new(PointSeq::origin(), q, base_f()).unwrap()
}

fn gaussian_state() -> ProductState {
    ProductState::new(ProductMeasure::standard_gaussian())
}

fn cfg() -> QuadratureCfg {
    QuadratureCfg::default()
}

#[test]
fn tail_product_examples() {
    let f = base_f();
    match tail_product(&PointSeq::origin(), &f, 1, 1, 64, CONVERGENCE_TOL) {
        TailVerdict::Limit { value, exact, .. } => assert!(value == 1.0 && exact),
        v => panic!("{v:?}"),
    }
    let deep = PointSeq::new(BTreeMap::new(), TailRule::LevelOffset { delta: 1.5 }).unwrap();
    assert!(tail_product(&deep, &f, 1, 1, 64, CONVERGENCE_TOL).is_in_nf());
    let half = PointSeq::new(BTreeMap::new(), TailRule::LevelOffset { delta: 0.5 }).unwrap();
    assert!(tail_product(&half, &f, 1, 1, 64, CONVERGENCE_TOL).is_in_nf());
    // partial-product oracle: every factor is exactly 1/2
    for j in 1..=20 {
        let k = f.level(j) as f64;
        assert_eq!(f.slot_fn(j).eval(k + 0.5).re, 0.5);
    }
}

#[test]
fn tail_product_numeric_path() {
    // selected levels have no periodic block, so the numeric policy decides
    let f = selected_gaussian(64);
    let zero = PointSeq::new(BTreeMap::new(), TailRule::Constant { c: 0.0 }).unwrap();
    assert!(matches!(tail_product(&zero, &f, 2, 1, 64, CONVERGENCE_TOL), TailVerdict::Limit { value, .. } if value == 1.0));
    let far = PointSeq::new(BTreeMap::new(), TailRule::Constant { c: 1e6 }).unwrap();
    assert!(tail_product(&far, &f, 1, 1, 64, CONVERGENCE_TOL).is_in_nf());
}

#[test]
fn pure_tails_give_powers_of_q() {
    for q in [0.1, 0.3, 0.77, 1.0] {
        let ch = origin_char(q);
        let v = char_eval(&ch, &TensorElem::pure(&base_f(), 1)).unwrap();
        assert_eq!(v.value, c(q, 0.0));
        assert!(v.exact);
        let v3 = char_eval(&ch, &TensorElem::pure(&base_f(), 3)).unwrap();
        assert_eq!(v3.value, c(q.powi(3), 0.0));
    }
}

#[test]
fn invalid_and_mismatched_characters() {
    assert!(matches!(Character::new(PointSeq::origin(), 1.5, base_f()), Err(Error::InvalidCharacter(m)) if m == "q must lie in (0,1]"));
    assert!(Character::new(PointSeq::origin(), 0.0, base_f()).is_err());
    let other = Arc::new(StabSeq::constant("other", 4).unwrap());
    let a = TensorElem::pure(&other, 1);
    assert!(matches!(char_eval(&origin_char(0.5), &a), Err(Error::BaseMismatch(id)) if id == "other"));
}

#[test]
fn degenerate_points_vanish() {
    let point = PointSeq::new(BTreeMap::new(), TailRule::LevelOffset { delta: 0.5 }).unwrap();
    let ch = Character::new(point, 0.6, base_f()).unwrap();
    let v = char_eval(&ch, &TensorElem::pure(&base_f(), 1)).unwrap();
    assert!(v.degenerate);
    assert_eq!(v.value, c(0.0, 0.0));
}

#[test]
fn deviations_are_evaluated_at_the_point() {
    let f = base_f();
    let g = make_bump(1).unwrap().modulate(2.0).unwrap();
    let a = TensorElem::single(ElemTensor::new(c(0.0, 1.0), Tail::power(&f, 2), devs(vec![(2, g.clone())])));
    let point = PointSeq::finite(BTreeMap::from([(2, 1.25), (5, f.level(5) as f64 + 0.25)])).unwrap();
    let ch = Character::new(point, 0.4, f.clone()).unwrap();
    let v = char_eval(&ch, &a).unwrap();
    // slot 5 sits on the ramp of f^2: (0.75)^2
    let oracle = c(0.0, 1.0) * 0.4f64.powi(2) * g.eval(1.25) * 0.75f64.powi(2);
    assert!((v.value - oracle).norm() < 1e-14);
}

#[test]
fn state_eval_examples() {
    let s = gaussian_state();
    assert_eq!(state_eval(&s, &FinSeq::new(), &cfg()).unwrap().value, c(1.0, 0.0));
    for t in [0.3, 1.0, 2.2] {
        let v = state_eval(&s, &fin_seq(&[(1, t)]), &cfg()).unwrap().value;
        let quad = s.measure.at(1).char_fn_quadrature(t, &cfg()).unwrap().value;
        assert!((v - quad).norm() < 1e-8);
        assert!((v.re - (-t * t / 2.0).exp()).abs() < 1e-15);
    }
    let ab = state_eval(&s, &fin_seq(&[(1, 0.4), (2, -1.1)]), &cfg()).unwrap().value;
    let a = state_eval(&s, &fin_seq(&[(1, 0.4)]), &cfg()).unwrap().value;
    let b = state_eval(&s, &fin_seq(&[(2, -1.1)]), &cfg()).unwrap().value;
    assert!((ab - a * b).norm() < 1e-15);
}

#[test]
fn distinct_measures_give_distinct_states() {
    let a = ProductState::new(ProductMeasure::standard_gaussian());
    let mut prefix = vec![Measure1D::standard_gaussian(); 3];
    prefix[2] = Measure1D::gaussian(1.5).unwrap();
    let b = ProductState::new(ProductMeasure::new(prefix, vec![Measure1D::standard_gaussian()]).unwrap());
    let x = fin_seq(&[(3, 1.0)]);
    let d = (state_eval(&a, &x, &cfg()).unwrap().value - state_eval(&b, &x, &cfg()).unwrap().value).norm();
    assert!(d > 0.1);
    let y = fin_seq(&[(2, 1.0)]);
    assert_eq!(state_eval(&a, &y, &cfg()).unwrap().value, state_eval(&b, &y, &cfg()).unwrap().value);
}

#[test]
fn strict_extension_converges_for_selected_f() {
    let s = gaussian_state();
    let f = selected_gaussian(64);
    let x = FinSeq::new();
    let ns = [1usize, 2, 4, 8, 16, 32];
    let residuals: Vec<f64> = ns.iter().map(|&n| strict_ext_check(&s, &f, &x, n, &cfg()).unwrap().residual).collect();
    assert!(residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{residuals:?}");
    // the residual is the tail deficit past N: at most sum_{j > N} j^-4 <= 1 / (3 N^3)
    for (&n, &r) in ns.iter().zip(&residuals) {
        assert!(r <= 1.0 / (3.0 * (n as f64).powi(3)) + 1e-9, "N={n}: {r}");
    }
    let y = fin_seq(&[(1, 0.8), (3, -0.4)]);
    let r = strict_ext_check(&s, &f, &y, 32, &cfg()).unwrap();
    assert!(r.residual < 1e-5);
    assert!((r.omega - c((-(0.64 + 0.16) / 2.0f64).exp(), 0.0)).norm() < 1e-15);
}

#[test]
fn strict_extension_fails_for_constant_level() {
    let s = gaussian_state();
    let f = StabSeq::constant("one", 1).unwrap();
    let r = strict_ext_check(&s, &f, &FinSeq::new(), 8, &cfg()).unwrap();
    assert!((r.residual - 1.0).abs() < 1e-9, "{}", r.residual);
    let r0 = strict_ext_check(&s, &f, &fin_seq(&[(1, 0.5)]), 0, &cfg()).unwrap();
    assert!(r0.residual <= 2.0);
}

fn random_points(m: usize, seed: u64) -> Vec<FinSeq> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            (0..k).map(|_| (rng.gen_range(1..=5usize), rng.gen_range(-2.0..2.0))).collect()
        })
        .collect()
}

#[test]
fn gram_matrices() {
    assert!((psd_check(&gaussian_state(), &[fin_seq(&[(1, 0.3)])]).unwrap() - 1.0).abs() < 1e-15);
    let pts = random_points(20, 11);
    assert!(psd_check(&gaussian_state(), &pts).unwrap() >= -1e-8);
    let ch = Character::new(PointSeq::finite(BTreeMap::from([(1, 0.5), (2, -1.0)])).unwrap(), 1.0, base_f()).unwrap();
    assert!(psd_check(&ch, &pts).unwrap() >= -1e-8);

    let bad = [fin_seq(&[]), fin_seq(&[(1, PI / 4.0)]), fin_seq(&[(1, PI / 2.0)])];
    assert_eq!(CosineNonState.value(&FinSeq::new()).unwrap(), c(1.0, 0.0));
    assert!(psd_check(&CosineNonState, &bad).unwrap() < -1e-3);
}

#[test]
fn spectrum_lower_bounds() {
    let qs: Vec<Character> = (1..=10).map(|i| origin_char(i as f64 / 10.0)).collect();
    let f1 = TensorElem::pure(&base_f(), 1);
    assert_eq!(char_sup_lower(&f1, &qs).unwrap(), 1.0);
    assert_eq!(char_sup_lower(&TensorElem::zero(), &qs).unwrap(), 0.0);

    // p(F) = F - F^2 peaks at q = 1/2
    let p = f1.sub(&TensorElem::pure(&base_f(), 2));
    let dense: Vec<Character> = (1..=1000).map(|i| origin_char(i as f64 / 1000.0)).collect();
    let lower = char_sup_lower(&p, &dense).unwrap();
    let oracle = (1..=1000).map(|i| i as f64 / 1000.0).map(|t| t - t * t).fold(0.0, f64::max);
    assert!((lower - oracle).abs() < 1e-15);
    assert!((lower - 0.25).abs() < 1e-6);
    assert!(lower <= cross_norm_upper(&p));
}

fn arb_plateau_char() -> impl Strategy<Value = Character> {
    (proptest::collection::btree_map(1usize..=6, -1.0f64..1.0, 0..=4), -1.0f64..=1.0, 0.05f64..=1.0).prop_map(|(d, theta, q)| {
        let f = base_f();
        let d = d.into_iter().map(|(n, s)| (n, s * f.level(n) as f64)).collect();
        Character::new(PointSeq::new(d, TailRule::InPlateau { theta }).unwrap(), q, f).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_multiplicative(ch in arb_plateau_char(), a in arb_homogeneous(1), b in arb_homogeneous(2)) {
        let ab = mul(&a, &b).unwrap();
        let (va, vb, vab) = (char_eval(&ch, &a).unwrap(), char_eval(&ch, &b).unwrap(), char_eval(&ch, &ab).unwrap());
        prop_assert!(va.exact && vb.exact && vab.exact);
        prop_assert!((vab.value - va.value * vb.value).norm() <= 1e-9);
    }

    #[test]
    fn characters_respect_adjoints(ch in arb_plateau_char(), a in arb_homogeneous(1)) {
        let v = char_eval(&ch, &a).unwrap().value;
        let w = char_eval(&ch, &adjoint(&a)).unwrap().value;
        prop_assert!((w - v.conj()).norm() < 1e-12);
    }

    #[test]
    fn sandwich(ch in arb_plateau_char(), a in arb_homogeneous(1)) {
        prop_assert!(char_sup_lower(&a, std::slice::from_ref(&ch)).unwrap() <= cross_norm_upper(&a) + 1e-12);
    }

    #[test]
    fn states_are_bounded_and_hermitian(x in proptest::collection::btree_map(1usize..=8, -3.0f64..3.0, 0..=4)) {
        let s = gaussian_state();
        let p = state_eval(&s, &x, &cfg()).unwrap().value;
        let neg: FinSeq = x.iter().map(|(&n, &v)| (n, -v)).collect();
        let m = state_eval(&s, &neg, &cfg()).unwrap().value;
        prop_assert!(p.norm() <= 1.0);
        prop_assert!((m - p.conj()).norm() < 1e-15);
        let oracle: f64 = x.values().map(|t| (-t * t / 2.0).exp()).product();
        prop_assert!((p.re - oracle).abs() < 1e-14);
    }

    #[test]
    fn deeper_evaluation_is_stable(ch in arb_plateau_char(), a in arb_homogeneous(1)) {
        let shallow = char_eval_with(&ch, &a, &CharEvalCfg { depth: 8, ..Default::default() }).unwrap();
        let deep = char_eval_with(&ch, &a, &CharEvalCfg { depth: 128, ..Default::default() }).unwrap();
        prop_assert!((shallow.value - deep.value).norm() < 1e-12);
    }
}
