#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use itp_core::fnalg::{bump_power, ScalarFn};
use itp_core::measures::{Budget, ProductMeasure};
use itp_core::tensor::{ElemTensor, StabSeq, Tail, TensorElem};
use itp_core::C64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `int bump(k) dN(0,1)` in closed form: plateau mass plus the two ramps.
pub fn gauss_bump_integral(k: f64) -> f64 {
    let plateau = 2.0 * cdf(k) - 1.0;
    // int_k^{k+1} (k+1-t) phi(t) dt = (k+1)(Phi(k+1)-Phi(k)) - (phi(k)-phi(k+1))
    let ramp = (k + 1.0) * (cdf(k + 1.0) - cdf(k)) - (pdf(k) - pdf(k + 1.0));
    plateau + 2.0 * ramp
}

/// Composite midpoint rule for `int_a^b g`.
pub fn midpoint(g: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| g(a + (i as f64 + 0.5) * h)).sum::<C64>() * h
}

/// Independent certified value of `prod_{j >= 1} int bump(k_j) dN(0,1)`:
/// partial product to `n` with an analytic remainder from the closed form.
pub fn gauss_tail_product(levels: impl Fn(usize) -> u32, from: usize, to: usize) -> f64 {
    (from..=to).map(|j| gauss_bump_integral(levels(j) as f64)).product()
}

pub fn selected_gaussian(depth: usize) -> Arc<StabSeq> {
    Arc::new(StabSeq::selected("f", ProductMeasure::standard_gaussian(), Budget::inverse_power(4.0).unwrap(), depth).unwrap())
}

/// Shared stabilizing sequence for the generators.
pub fn base_f() -> Arc<StabSeq> {
    static F: OnceLock<Arc<StabSeq>> = OnceLock::new();
    F.get_or_init(|| Arc::new(StabSeq::periodic("g", vec![1, 2], vec![2, 3]).unwrap())).clone()
}

/// Compactly supported slot functions: modulated bump powers.
pub fn arb_compact_fn() -> impl Strategy<Value = ScalarFn> {
    (1u32..=3, 1u32..=2, -2.0f64..2.0, -1.5f64..1.5, -1.5f64..1.5).prop_map(|(level, power, x, re, im)| {
        let s = if re.abs() + im.abs() < 0.1 { c(1.0, 0.0) } else { c(re, im) };
        bump_power(level, power).unwrap().modulate(x).unwrap().scale(s)
    })
}

pub fn arb_coeff() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
}

/// Elementary tensor over `base_f()^exponent` with up to 3 deviations in slots 1..=5.
pub fn arb_elem(exponent: u32) -> impl Strategy<Value = ElemTensor> {
    (arb_coeff(), proptest::collection::btree_map(1usize..=5, arb_compact_fn(), 0..=3))
        .prop_map(move |(coeff, devs)| ElemTensor::new(coeff, Tail::power(&base_f(), exponent), devs))
}

/// Homogeneous element of class `[f^exponent]`.
pub fn arb_homogeneous(exponent: u32) -> impl Strategy<Value = TensorElem> {
    proptest::collection::vec(arb_elem(exponent), 1..=3).prop_map(TensorElem::from_terms)
}

/// Element with terms in classes `[f^0]`, `[f^1]` and `[f^2]`.
pub fn arb_mixed() -> impl Strategy<Value = TensorElem> {
    proptest::collection::vec((0u32..=2).prop_flat_map(arb_elem), 1..=3).prop_map(TensorElem::from_terms)
}

pub fn devs(entries: Vec<(usize, ScalarFn)>) -> BTreeMap<usize, ScalarFn> {
    entries.into_iter().collect()
}

/// Midpoint rule applied separately on each cell of a sorted breakpoint list.
pub fn midpoint_cells(g: impl Fn(f64) -> C64, breaks: &[f64], n: usize) -> C64 {
    breaks.windows(2).map(|w| midpoint(&g, w[0], w[1], n)).sum()
}
