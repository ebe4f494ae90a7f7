//! The modulation action of finitely supported sequences and cross-norm bounds.

use std::collections::BTreeMap;

use super::elem::{ElemTensor, TensorElem};
use crate::error::Result;
use crate::fnalg::sup_norm_bound;

/// Finitely supported real sequence, 1-based; zero entries are ignored.
pub type FinSeq = BTreeMap<usize, f64>;

pub fn fin_seq(entries: &[(usize, f64)]) -> FinSeq {
    entries.iter().copied().filter(|&(_, x)| x != 0.0).collect()
}

/// Default refinement for sup-norm bounds inside cross-norm estimates.
pub const NORM_REFINEMENT: usize = 64;

fn eta_term(x: &FinSeq, t: &ElemTensor) -> Result<ElemTensor> {
    let mut devs = t.deviations().clone();
    for (&n, &xn) in x.iter().filter(|(_, &v)| v != 0.0) {
        devs.insert(n, t.slot_fn(n).modulate(xn)?);
    }
    Ok(ElemTensor::new(t.coeff(), t.tail().clone(), devs))
}

/// `eta(x) a`: slot `j` multiplied by `e^{i x_j t}`.
pub fn eta_act(x: &FinSeq, a: &TensorElem) -> Result<TensorElem> {
    let terms = a.terms().iter().map(|t| eta_term(x, t)).collect::<Result<Vec<_>>>()?;
    Ok(TensorElem::from_terms(terms))
}

/// `(eta(x) - 1) a` written as the telescoping sum
/// `sum_j eta(x_{<j}) (slot j -> (e^{i x_j t} - 1) L_j)`.
pub fn eta_minus_identity(x: &FinSeq, a: &TensorElem) -> Result<TensorElem> {
    let support: Vec<(usize, f64)> = x.iter().filter(|(_, &v)| v != 0.0).map(|(&n, &v)| (n, v)).collect();
    let mut out = Vec::new();
    for t in a.terms() {
        for (j, &(n, xn)) in support.iter().enumerate() {
            let before: FinSeq = support[..j].iter().copied().collect();
            let shifted = eta_term(&before, t)?;
            let mut devs = shifted.deviations().clone();
            let slot = t.slot_fn(n);
            devs.insert(n, slot.modulate(xn)?.sub(&slot));
            out.push(ElemTensor::new(shifted.coeff(), t.tail().clone(), devs));
        }
    }
    Ok(TensorElem::from_terms(out))
}

/// `sum |c| prod sup |deviation|` using sup-norm brackets at `refinement`.
pub fn cross_norm_upper_with(a: &TensorElem, refinement: usize) -> f64 {
    a.terms()
        .iter()
        .map(|t| t.deviations().values().map(|f| sup_norm_bound(f, refinement).1).fold(t.coeff().norm(), |acc, s| acc * s))
        .sum()
}

pub fn cross_norm_upper(a: &TensorElem) -> f64 {
    cross_norm_upper_with(a, NORM_REFINEMENT)
}
