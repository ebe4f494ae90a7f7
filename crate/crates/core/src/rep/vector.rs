//! Vectors of the incomplete product space stabilized by the constant sequence
//! and diagonal tensor operators acting on them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnalg::ScalarFn;
use crate::infprod::{CBracket, ProductStatus};
use crate::measures::{Estimate, ProductMeasure};
use crate::tensor::{ElemTensor, FinSeq, Tail};
use crate::C64;

/// `sum_a c_a (x)_n u_{a,n}` with `u_{a,n} = 1` outside the listed slots.
#[derive(Debug, Clone)]
pub struct VecElem {
    terms: Vec<(C64, BTreeMap<usize, ScalarFn>)>,
    ambient: ProductMeasure,
}

impl VecElem {
    pub fn new(ambient: ProductMeasure, terms: Vec<(C64, BTreeMap<usize, ScalarFn>)>) -> Result<Self> {
        if terms.iter().any(|(_, s)| s.contains_key(&0)) {
            return Err(Error::InvalidArgument("vector slots are 1-based".into()));
        }
        Ok(VecElem { terms, ambient })
    }

    /// The cyclic vector `(x)_n 1`.
    pub fn omega(ambient: ProductMeasure) -> Self {
        VecElem { terms: vec![(C64::new(1.0, 0.0), BTreeMap::new())], ambient }
    }

    pub fn terms(&self) -> &[(C64, BTreeMap<usize, ScalarFn>)] {
        &self.terms
    }

    pub fn ambient(&self) -> &ProductMeasure {
        &self.ambient
    }

    pub fn max_slot(&self) -> usize {
        self.terms.iter().filter_map(|(_, s)| s.keys().next_back().copied()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &VecElem) -> Result<VecElem> {
        if self.ambient != other.ambient {
            return Err(Error::MeasureMismatch);
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(VecElem { terms, ambient: self.ambient.clone() })
    }

    pub fn scale(&self, c: C64) -> VecElem {
        let terms = self.terms.iter().map(|(a, s)| (a * c, s.clone())).collect();
        VecElem { terms, ambient: self.ambient.clone() }
    }

    /// Slotwise multiplication by `e^{i x_n t}`. Slots left at 1 cannot be modulated.
    pub fn eta(&self, x: &FinSeq) -> Result<VecElem> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, slots) in &self.terms {
            let mut slots = slots.clone();
            for (&n, &xn) in x.iter().filter(|(_, &v)| v != 0.0) {
                let f = slots.get(&n).cloned().unwrap_or_else(ScalarFn::one);
                slots.insert(n, f.modulate(xn)?);
            }
            terms.push((*c, slots));
        }
        Ok(VecElem { terms, ambient: self.ambient.clone() })
    }
}

/// Diagonal operator `coeff * (x)_n op_n`: explicit slots, then the tail slots
/// from `tail_start` on, and 1 elsewhere.
#[derive(Debug, Clone)]
pub struct DiagOp {
    coeff: C64,
    slots: BTreeMap<usize, ScalarFn>,
    tail: Tail,
    tail_start: usize,
}

impl DiagOp {
    pub fn identity() -> Self {
        DiagOp { coeff: C64::new(1.0, 0.0), slots: BTreeMap::new(), tail: Tail::unit(), tail_start: 1 }
    }

    pub fn new(coeff: C64, slots: BTreeMap<usize, ScalarFn>, tail: Tail, tail_start: usize) -> Self {
        DiagOp { coeff, slots, tail, tail_start: tail_start.max(1) }
    }

    /// `1 (x) ... (x) 1 (x) tail_k (x) tail_{k+1} (x) ...`.
    pub fn tail_from(tail: Tail, k: usize) -> Self {
        Self::new(C64::new(1.0, 0.0), BTreeMap::new(), tail, k)
    }

    /// Multiplication by an elementary tensor of the algebra.
    pub fn from_elem(t: &ElemTensor) -> Self {
        Self::new(t.coeff(), t.deviations().clone(), t.tail().clone(), 1)
    }

    /// `t` cut off after slot `n` (slots beyond `n` act as 1).
    pub fn truncated(t: &ElemTensor, n: usize) -> Self {
        let slots = (1..=n).map(|j| (j, t.slot_fn(j))).collect();
        Self::new(t.coeff(), slots, Tail::unit(), 1)
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn tail_start(&self) -> usize {
        self.tail_start
    }

    /// Last slot not given by the tail rule.
    pub fn last_explicit(&self) -> usize {
        let s = self.slots.keys().next_back().copied().unwrap_or(0);
        if self.tail.is_unit() {
            s
        } else {
            s.max(self.tail_start - 1)
        }
    }

    pub fn slots(&self) -> &BTreeMap<usize, ScalarFn> {
        &self.slots
    }

    pub fn tail_active(&self, n: usize) -> bool {
        !self.tail.is_unit() && n >= self.tail_start
    }

    /// `Some(slot)` where the operator differs from the identity by rule.
    fn explicit(&self, n: usize) -> Option<ScalarFn> {
        match self.slots.get(&n) {
            Some(f) => Some(f.clone()),
            None if self.tail_active(n) => Some(self.tail.slot_fn(n)),
            None => None,
        }
    }

    pub fn slot_fn(&self, n: usize) -> ScalarFn {
        self.explicit(n).unwrap_or_else(ScalarFn::one)
    }

    pub fn mul(&self, other: &DiagOp) -> Result<DiagOp> {
        let tail = self.tail.mul(&other.tail)?;
        let start = [self, other].iter().filter(|o| !o.tail.is_unit()).map(|o| o.tail_start).max().unwrap_or(1);
        let mut idx: BTreeSet<usize> = self.slots.keys().chain(other.slots.keys()).copied().collect();
        for o in [self, other] {
            if !o.tail.is_unit() {
                idx.extend(o.tail_start..start);
            }
        }
        let mut slots = BTreeMap::new();
        for n in idx {
            let f = match (self.explicit(n), other.explicit(n)) {
                (Some(a), Some(b)) => a.mul(&b)?,
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => continue,
            };
            slots.insert(n, f);
        }
        Ok(DiagOp { coeff: self.coeff * other.coeff, slots, tail, tail_start: start })
    }
}

/// `pi(A_r) ... pi(A_1) base` for diagonal operators, kept unevaluated.
#[derive(Debug, Clone)]
pub struct LazyVec {
    pub base: VecElem,
    pub applied: Vec<DiagOp>,
}

impl LazyVec {
    pub fn new(base: VecElem) -> Self {
        LazyVec { base, applied: Vec::new() }
    }

    pub fn apply(mut self, op: DiagOp) -> Self {
        self.applied.push(op);
        self
    }

    /// The composed operator.
    pub fn op(&self) -> Result<DiagOp> {
        self.applied.iter().try_fold(DiagOp::identity(), |acc, o| o.mul(&acc))
    }
}

impl From<VecElem> for LazyVec {
    fn from(v: VecElem) -> Self {
        LazyVec::new(v)
    }
}

/// A matrix element with its certified bracket and the status of its tail product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepValue {
    pub value: CBracket,
    pub status: ProductStatus,
}

impl RepValue {
    pub fn exact(v: C64) -> Self {
        RepValue { value: CBracket::exact(v), status: ProductStatus::Certified }
    }

    pub fn is_determined(&self) -> bool {
        self.status != ProductStatus::Undetermined
    }

    pub fn scale(&self, c: C64) -> Self {
        RepValue { value: CBracket { estimate: self.value.estimate * c, radius: self.value.radius * c.norm() }, status: self.status }
    }

    /// Sum with radii added; the weaker status wins.
    pub fn add(&self, other: &RepValue) -> Self {
        RepValue {
            value: CBracket { estimate: self.value.estimate + other.value.estimate, radius: self.value.radius + other.value.radius },
            status: weaker(self.status, other.status),
        }
    }
}

pub(crate) fn weaker(a: ProductStatus, b: ProductStatus) -> ProductStatus {
    use ProductStatus::*;
    match (a, b) {
        (Undetermined, _) | (_, Undetermined) => Undetermined,
        (Converged, _) | (_, Converged) => Converged,
        (Zero, _) | (_, Zero) => Zero,
        _ => Certified,
    }
}

/// `a * b` with first-order error propagation.
pub(crate) fn est_mul(a: Estimate, b: Estimate) -> Estimate {
    Estimate { value: a.value * b.value, err: a.value.norm() * b.err + b.value.norm() * a.err + a.err * b.err }
}

pub(crate) fn est_add(a: Estimate, b: Estimate) -> Estimate {
    Estimate { value: a.value + b.value, err: a.err + b.err }
}
