//! Elementary tensors and their finite linear combinations in normal form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::stab::{StabSeq, Tail};
use crate::error::Result;
use crate::fnalg::ScalarFn;
use crate::C64;

/// Tolerance for normal-form comparisons.
pub const NF_TOL: f64 = 1e-12;

/// `coeff * (x)_n slot_n` where `slot_n` is the deviation at `n` if present and
/// the tail slot otherwise. Deviations are scale-normalized and never equal the
/// tail slot.
#[derive(Debug, Clone)]
pub struct ElemTensor {
    coeff: C64,
    tail: Tail,
    deviations: BTreeMap<usize, ScalarFn>,
}

impl ElemTensor {
    /// Normalizing constructor. A zero deviation yields a zero coefficient.
    pub fn new(coeff: C64, tail: Tail, deviations: BTreeMap<usize, ScalarFn>) -> Self {
        let mut coeff = coeff;
        let mut devs = BTreeMap::new();
        for (n, f) in deviations {
            assert!(n >= 1, "slots are 1-based");
            match f.split_scale() {
                None => {
                    return ElemTensor { coeff: C64::new(0.0, 0.0), tail, deviations: BTreeMap::new() };
                }
                Some((s, unit)) => {
                    coeff *= s;
                    if !unit.approx_eq(&tail.slot_fn(n), NF_TOL) {
                        devs.insert(n, unit);
                    }
                }
            }
        }
        ElemTensor { coeff, tail, deviations: devs }
    }

    /// Pure tail `f^exponent` with unit coefficient.
    pub fn pure(f: &Arc<StabSeq>, exponent: u32) -> Self {
        Self::new(C64::new(1.0, 0.0), Tail::power(f, exponent), BTreeMap::new())
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn deviations(&self) -> &BTreeMap<usize, ScalarFn> {
        &self.deviations
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == C64::new(0.0, 0.0)
    }

    /// Function in slot `n` (without the coefficient).
    pub fn slot_fn(&self, n: usize) -> ScalarFn {
        self.deviations.get(&n).cloned().unwrap_or_else(|| self.tail.slot_fn(n))
    }

    /// Value of slot `n` at `t`.
    pub fn slot_value(&self, n: usize, t: f64) -> C64 {
        match self.deviations.get(&n) {
            Some(f) => f.eval(t),
            None => C64::new(self.tail.slot_value(n, t), 0.0),
        }
    }

    pub fn max_deviation(&self) -> usize {
        self.deviations.keys().next_back().copied().unwrap_or(0)
    }

    pub fn scaled(&self, c: C64) -> Self {
        ElemTensor { coeff: self.coeff * c, tail: self.tail.clone(), deviations: self.deviations.clone() }
    }

    pub fn with_coeff(&self, c: C64) -> Self {
        ElemTensor { coeff: c, tail: self.tail.clone(), deviations: self.deviations.clone() }
    }

    pub fn mul(&self, other: &ElemTensor) -> Result<ElemTensor> {
        let tail = self.tail.mul(&other.tail)?;
        let idx: BTreeSet<usize> = self.deviations.keys().chain(other.deviations.keys()).copied().collect();
        let mut devs = BTreeMap::new();
        for n in idx {
            devs.insert(n, self.slot_fn(n).mul(&other.slot_fn(n))?);
        }
        Ok(ElemTensor::new(self.coeff * other.coeff, tail, devs))
    }

    pub fn adjoint(&self) -> ElemTensor {
        let devs = self.deviations.iter().map(|(&n, f)| (n, f.conj())).collect();
        ElemTensor::new(self.coeff.conj(), self.tail.clone(), devs)
    }

    /// Same tail class: the two tensors differ in finitely many slots.
    pub fn equivalent(&self, other: &ElemTensor) -> bool {
        self.tail == other.tail
    }

    /// Same class, same deviation slots and functions (coefficients ignored).
    pub fn same_shape(&self, other: &ElemTensor, tol: f64) -> bool {
        self.tail == other.tail
            && self.deviations.len() == other.deviations.len()
            && self.deviations.iter().zip(&other.deviations).all(|((n, f), (m, g))| n == m && f.approx_eq(g, tol))
    }

    fn fingerprint(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for (n, f) in &self.deviations {
            v.push(*n as f64);
            let c = f.constant_part();
            v.extend([c.re, c.im]);
            for t in f.terms() {
                v.push(t.freq);
                v.extend_from_slice(t.envelope.breakpoints());
                for p in t.envelope.pieces() {
                    for c in p {
                        v.extend([c.re, c.im]);
                    }
                }
            }
        }
        v
    }

    fn order_key(&self) -> (Vec<(String, u32)>, Vec<usize>) {
        (self.tail.key().into_iter().map(|(s, e)| (s.to_string(), e)).collect(), self.deviations.keys().copied().collect())
    }

    fn canonical_cmp(&self, other: &ElemTensor) -> Ordering {
        self.order_key().cmp(&other.order_key()).then_with(|| {
            let (a, b) = (self.fingerprint(), other.fingerprint());
            a.iter().zip(&b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
        })
    }
}

/// Finite linear combination of elementary tensors in normal form.
#[derive(Debug, Clone, Default)]
pub struct TensorElem {
    terms: Vec<ElemTensor>,
}

impl TensorElem {
    pub fn zero() -> Self {
        TensorElem { terms: Vec::new() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ElemTensor>) -> Self {
        let mut merged: Vec<ElemTensor> = Vec::new();
        for t in terms {
            if t.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|m| m.same_shape(&t, NF_TOL)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        let scale = merged.iter().fold(1.0f64, |m, t| m.max(t.coeff.norm()));
        merged.retain(|t| t.coeff.norm() > 1e-14 * scale);
        merged.sort_by(|a, b| a.canonical_cmp(b));
        TensorElem { terms: merged }
    }

    pub fn single(t: ElemTensor) -> Self {
        Self::from_terms([t])
    }

    /// The pure tail `f^exponent`.
    pub fn pure(f: &Arc<StabSeq>, exponent: u32) -> Self {
        Self::single(ElemTensor::pure(f, exponent))
    }

    pub fn terms(&self) -> &[ElemTensor] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &TensorElem) -> TensorElem {
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scale(&self, c: C64) -> TensorElem {
        Self::from_terms(self.terms.iter().map(|t| t.scaled(c)))
    }

    pub fn sub(&self, other: &TensorElem) -> TensorElem {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &TensorElem) -> Result<TensorElem> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.mul(b)?);
            }
        }
        Ok(Self::from_terms(out))
    }

    pub fn adjoint(&self) -> TensorElem {
        Self::from_terms(self.terms.iter().map(ElemTensor::adjoint))
    }

    /// Distinct tail classes present, in canonical order.
    pub fn classes(&self) -> Vec<Tail> {
        let mut out: Vec<Tail> = Vec::new();
        for t in &self.terms {
            if !out.iter().any(|c| c == t.tail()) {
                out.push(t.tail().clone());
            }
        }
        out
    }

    /// Component in one tail class (the grading projection).
    pub fn component(&self, class: &Tail) -> TensorElem {
        TensorElem { terms: self.terms.iter().filter(|t| t.tail() == class).cloned().collect() }
    }

    pub fn max_deviation(&self) -> usize {
        self.terms.iter().map(ElemTensor::max_deviation).max().unwrap_or(0)
    }

    /// Term-by-term equality within `tol` (terms matched as a multiset).
    pub fn approx_eq(&self, other: &TensorElem, tol: f64) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        let mut used = vec![false; other.terms.len()];
        self.terms.iter().all(|a| {
            let hit = other
                .terms
                .iter()
                .enumerate()
                .find(|(i, b)| !used[*i] && a.same_shape(b, tol) && (a.coeff - b.coeff).norm() <= tol * (1.0f64).max(a.coeff.norm()));
            match hit {
                Some((i, _)) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }
}

impl From<ElemTensor> for TensorElem {
    fn from(t: ElemTensor) -> Self {
        TensorElem::single(t)
    }
}
