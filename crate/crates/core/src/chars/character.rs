//! Characters `gamma(x, q)` of the algebra generated by one stabilizing sequence.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::point::{tail_product, PointSeq, TailVerdict};
use crate::error::{Error, Result};
use crate::fnalg::bump_value;
use crate::infprod::CONVERGENCE_TOL;
use crate::tensor::{ElemTensor, FinSeq, StabSeq, TensorElem};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharEvalCfg {
    pub depth: usize,
    pub tol: f64,
}

impl Default for CharEvalCfg {
    fn default() -> Self {
        CharEvalCfg { depth: 64, tol: CONVERGENCE_TOL }
    }
}

#[derive(Debug, Clone)]
pub struct Character {
    point: PointSeq,
    q: f64,
    base: Arc<StabSeq>,
}

/// Value of a character with its certification data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharValue {
    pub value: C64,
    pub radius: f64,
    pub exact: bool,
    /// The point lies in the exceptional set and the character vanishes.
    pub degenerate: bool,
}

impl Character {
    pub fn new(point: PointSeq, q: f64, base: Arc<StabSeq>) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidCharacter("q must lie in (0,1]".into()));
        }
        Ok(Character { point, q, base })
    }

    pub fn point(&self) -> &PointSeq {
        &self.point
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn base(&self) -> &Arc<StabSeq> {
        &self.base
    }

    /// Tail exponent of a term relative to the base (0 for the unit tail).
    fn exponent_of(&self, t: &ElemTensor) -> Result<u32> {
        if t.tail().is_unit() {
            return Ok(0);
        }
        match t.tail().as_power() {
            Some((f, l)) if f.id() == self.base.id() && f.rule() == self.base.rule() => Ok(l),
            _ => {
                let id = t.tail().factors().iter().map(|(f, _)| f.id()).find(|&id| id != self.base.id());
                Err(Error::BaseMismatch(id.unwrap_or(self.base.id()).to_string()))
            }
        }
    }

    /// The point's tail against the base, from slot 1.
    pub fn tail_verdict(&self, cfg: &CharEvalCfg) -> TailVerdict {
        tail_product(&self.point, &self.base, 1, 1, cfg.depth, cfg.tol)
    }

    /// `gamma(x, q)(t)` for one elementary term.
    fn eval_term(&self, t: &ElemTensor, cfg: &CharEvalCfg) -> Result<(C64, f64, bool)> {
        let l = self.exponent_of(t)?;
        let mut pre = t.coeff() * self.q.powi(l as i32);
        for (&n, f) in t.deviations() {
            pre *= f.eval(self.point.value(n, &self.base));
        }
        if l == 0 {
            return Ok((pre, 0.0, true));
        }
        let m = t.max_deviation().max(self.point.max_deviation());
        for n in (1..=m).filter(|n| !t.deviations().contains_key(n)) {
            pre *= bump_value(self.base.level(n), l, self.point.value(n, &self.base));
        }
        Ok(match tail_product(&self.point, &self.base, l, m + 1, cfg.depth, cfg.tol) {
            TailVerdict::Limit { value, bracket, exact } => (pre * value, pre.norm() * bracket.width(), exact),
            TailVerdict::InNf { .. } => (C64::new(0.0, 0.0), 0.0, true),
            TailVerdict::Undetermined { partial, .. } => (pre * partial, pre.norm() * partial, false),
        })
    }
}

pub fn char_eval_with(c: &Character, a: &TensorElem, cfg: &CharEvalCfg) -> Result<CharValue> {
    // base mismatches are reported even for degenerate points
    for t in a.terms() {
        c.exponent_of(t)?;
    }
    if let TailVerdict::InNf { .. } = c.tail_verdict(cfg) {
        return Ok(CharValue { value: C64::new(0.0, 0.0), radius: 0.0, exact: true, degenerate: true });
    }
    let mut out = CharValue { value: C64::new(0.0, 0.0), radius: 0.0, exact: true, degenerate: false };
    for t in a.terms() {
        let (v, r, exact) = c.eval_term(t, cfg)?;
        out.value += v;
        out.radius += r;
        out.exact &= exact;
    }
    Ok(out)
}

/// `gamma(x, q)(a)`.
pub fn char_eval(c: &Character, a: &TensorElem) -> Result<CharValue> {
    char_eval_with(c, a, &CharEvalCfg::default())
}

/// `max_i |gamma_i(a)|`, a lower bound for the norm of `a`.
pub fn char_sup_lower(a: &TensorElem, chars: &[Character]) -> Result<f64> {
    chars.iter().try_fold(0.0f64, |m, c| {
        let v = char_eval(c, a)?;
        Ok(m.max((v.value.norm() - v.radius).max(0.0)))
    })
}

impl Character {
    /// The induced function on finitely supported sequences, `t -> e^{i <t, x>}`.
    pub fn induced(&self, t: &FinSeq) -> C64 {
        let phase: f64 = t.iter().map(|(&n, &tn)| tn * self.point.value(n, &self.base)).sum();
        C64::from_polar(1.0, phase)
    }
}
