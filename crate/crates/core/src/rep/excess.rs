//! The excess operator `Q = lim B_n`, its semigroup law, and `pi_Q`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::engine::Engine;
use super::vector::{est_add, est_mul, weaker, DiagOp, LazyVec, RepValue, VecElem};
use crate::chars::{tail_product, CharEvalCfg, Character, TailVerdict};
use crate::error::{Error, Result};
use crate::infprod::{certify, certify_tol, Bracket, CBracket, ProductStatus, TailClass};
use crate::measures::Estimate;
use crate::tensor::{ElemTensor, StabSeq, Tail, TensorElem};
use crate::C64;

/// A representation in which excess operators are evaluated.
#[derive(Debug)]
pub enum Rep {
    Product(Engine),
    /// One-dimensional; vector arguments are ignored.
    Character {
        character: Character,
        cfg: CharEvalCfg,
    },
}

fn status_bracket(status: ProductStatus, lower: f64, upper: f64) -> Bracket {
    match status {
        ProductStatus::Certified => Bracket::exact(1.0),
        ProductStatus::Converged => Bracket { lower, upper: 1.0 },
        ProductStatus::Zero => Bracket { lower: 0.0, upper },
        ProductStatus::Undetermined => Bracket { lower: 0.0, upper: 1.0 },
    }
}

/// `lim_n prod_{j >= n} tail_j(x_j)` for a character point: 1 off the exceptional set, 0 on it.
fn char_indicator(c: &Character, tail: &Tail, cfg: &CharEvalCfg) -> (Bracket, ProductStatus) {
    if tail.is_unit() {
        return (Bracket::exact(1.0), ProductStatus::Certified);
    }
    if let Some((f, l)) = tail.as_power() {
        if f.as_ref() == c.base().as_ref() {
            return match tail_product(c.point(), f, l, 1, cfg.depth, cfg.tol) {
                TailVerdict::Limit { exact: true, .. } => (Bracket::exact(1.0), ProductStatus::Certified),
                TailVerdict::Limit { .. } => (Bracket::exact(1.0), ProductStatus::Converged),
                TailVerdict::InNf { .. } => (Bracket::exact(0.0), ProductStatus::Zero),
                TailVerdict::Undetermined { .. } => (Bracket { lower: 0.0, upper: 1.0 }, ProductStatus::Undetermined),
            };
        }
    }
    let factors: Vec<(f64, f64)> = (1..=cfg.depth).map(|j| (tail.slot_value(j, c.point().value(j, c.base())), 0.0)).collect();
    let out = certify_tol(&factors, TailClass::Unknown, cfg.tol);
    let b = match out.status {
        ProductStatus::Converged => Bracket::exact(1.0),
        ProductStatus::Zero => Bracket::exact(0.0),
        _ => Bracket { lower: 0.0, upper: 1.0 },
    };
    (b, out.status)
}

/// `<u, Q_tail v>` where `Q_tail = lim_n B_n[tail]`.
pub fn excess_tail(tail: &Tail, rep: &Rep, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    match rep {
        Rep::Product(engine) => engine.tail_limit(tail, u, v, engine.depth()),
        Rep::Character { character, cfg } => {
            let (b, status) = char_indicator(character, tail, cfg);
            let q = character.q().powi(tail.degree() as i32);
            Ok(RepValue { value: CBracket::scale(Estimate::exact(C64::new(q, 0.0)), b), status })
        }
    }
}

/// `<u, Q[f] v>`.
pub fn excess_elem(f: &Arc<StabSeq>, rep: &Rep, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    excess_tail(&Tail::power(f, 1), rep, u, v)
}

/// `<u, Q[f]^l v>` computed as the limit of `B_n^l`.
pub fn excess_power(f: &Arc<StabSeq>, l: u32, rep: &Rep, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    excess_tail(&Tail::power(f, l), rep, u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCheck {
    /// `<u, Q_f Q_g v>`
    pub lhs: RepValue,
    /// `<u, Q_{fg} v>`
    pub rhs: RepValue,
    pub residual: f64,
    pub slack: f64,
}

impl SemigroupCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual <= self.slack + tol
    }
}

fn product_lhs(engine: &Engine, f: &Arc<StabSeq>, g: &Arc<StabSeq>, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    let n = engine.depth().max(u.max_slot().max(v.max_slot()) + 1);
    let lazy = LazyVec::new(v.clone()).apply(DiagOp::tail_from(Tail::power(g, 1), n)).apply(DiagOp::tail_from(Tail::power(f, 1), n));
    // with both tails starting past every deviation the finite part is <u, v>
    let op = lazy.op()?;
    let base = engine.inner_op(u, &DiagOp::new(op.coeff(), op.slots().clone(), Tail::unit(), 1), v)?;
    let factors = (n..=engine.depth().max(n))
        .map(|j| {
            let h = f.slot_fn(j).mul(&g.slot_fn(j))?;
            engine.measure().at(j).integrate(&h, engine.cfg()).map(|e| (e.value.re, e.err))
        })
        .collect::<Result<Vec<_>>>()?;
    let last = n + factors.len() - 1;
    let class = match (engine.tails().classify(&Tail::power(f, 1), last), engine.tails().classify(&Tail::power(g, 1), last)) {
        (TailClass::Divergent, _) | (_, TailClass::Divergent) => TailClass::Divergent,
        (TailClass::Summable { remainder: a }, TailClass::Summable { remainder: b }) => TailClass::Summable { remainder: a + b },
        _ => TailClass::Unknown,
    };
    let out = certify(&factors, class);
    let b = status_bracket(out.status, out.limit.lower, out.limit.upper);
    let est = Estimate { value: base.value.estimate, err: base.value.radius };
    Ok(RepValue { value: CBracket::scale(est, b), status: weaker(out.status, base.status) })
}

/// `|<u, Q_f Q_g v> - <u, Q_{fg} v>|` with each side from its own limit.
pub fn excess_semigroup_check(f: &Arc<StabSeq>, g: &Arc<StabSeq>, rep: &Rep, u: &VecElem, v: &VecElem) -> Result<SemigroupCheck> {
    let lhs = match rep {
        Rep::Product(engine) => product_lhs(engine, f, g, u, v)?,
        Rep::Character { .. } => {
            let a = excess_elem(f, rep, u, v)?;
            let b = excess_elem(g, rep, u, v)?;
            let est = est_mul(
                Estimate { value: a.value.estimate, err: a.value.radius },
                Estimate { value: b.value.estimate, err: b.value.radius },
            );
            RepValue { value: CBracket { estimate: est.value, radius: est.err }, status: weaker(a.status, b.status) }
        }
    };
    let rhs = excess_tail(&Tail::power(f, 1).mul(&Tail::power(g, 1))?, rep, u, v)?;
    Ok(SemigroupCheck { lhs, rhs, residual: (lhs.value.estimate - rhs.value.estimate).norm(), slack: lhs.value.radius + rhs.value.radius })
}

/// Both evaluations of `<u, pi_Q(A) v>` with `Q = q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiQ {
    /// Finite window `pi_1(A_1) ... pi_m(A_m)`, then `F_{m+1}^(l)`, then `q^l`.
    pub window: RepValue,
    /// Full truncation `pi^(N)(L_1 (x) ... (x) L_N)` with the tail bracket, then `q^l`.
    pub truncation: RepValue,
}

impl PiQ {
    pub fn agree(&self, slack: f64) -> bool {
        self.window.value.close_to(&self.truncation.value, slack)
    }
}

fn exponent(t: &ElemTensor, f: &Arc<StabSeq>) -> Result<u32> {
    if t.tail().is_unit() {
        return Ok(0);
    }
    match t.tail().as_power() {
        Some((g, l)) if g.as_ref() == f.as_ref() => Ok(l),
        _ => {
            let id = t.tail().factors().iter().map(|(g, _)| g.id()).find(|&id| id != f.id()).unwrap_or(f.id());
            Err(Error::BaseMismatch(id.to_string()))
        }
    }
}

fn window_path(engine: &Engine, t: &ElemTensor, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    let m = t.max_deviation().max(1);
    let slots = (1..=m).map(|j| (j, t.slot_fn(j))).collect();
    engine.inner_op(u, &DiagOp::new(t.coeff(), slots, t.tail().clone(), m + 1), v)
}

fn truncation_path(engine: &Engine, t: &ElemTensor, u: &VecElem, v: &VecElem) -> Result<RepValue> {
    let big_n = engine.depth().max(t.max_deviation()).max(u.max_slot()).max(v.max_slot());
    let mut total = Estimate::exact(C64::new(0.0, 0.0));
    for (ca, ua) in u.terms() {
        for (cb, vb) in v.terms() {
            let mut acc = Estimate::exact(ca.conj() * cb * t.coeff());
            for j in 1..=big_n {
                let left = ua.get(&j).map_or_else(crate::fnalg::ScalarFn::one, |f| f.conj());
                let right = vb.get(&j).cloned().unwrap_or_else(crate::fnalg::ScalarFn::one);
                let g = left.mul(&t.slot_fn(j))?.mul(&right)?;
                acc = est_mul(acc, engine.measure().at(j).integrate(&g, engine.cfg())?);
            }
            total = est_add(total, acc);
        }
    }
    if t.tail().is_unit() {
        return Ok(RepValue { value: CBracket { estimate: total.value, radius: total.err }, status: ProductStatus::Certified });
    }
    let (b, status) = match engine.tails().classify(t.tail(), big_n) {
        TailClass::Summable { remainder } => (Bracket { lower: (1.0 - remainder).max(0.0), upper: 1.0 }, ProductStatus::Certified),
        TailClass::Divergent => (Bracket::exact(0.0), ProductStatus::Zero),
        TailClass::Unknown => (Bracket { lower: 0.0, upper: 1.0 }, ProductStatus::Undetermined),
    };
    Ok(RepValue { value: CBracket::scale(total, b), status })
}

/// `<u, pi_Q(A) v>` for `A` homogeneous over `f` in the product representation, `Q = q`.
pub fn pi_q_eval(engine: &Engine, a: &TensorElem, f: &Arc<StabSeq>, q: f64, u: &VecElem, v: &VecElem) -> Result<PiQ> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidCharacter("q must lie in (0,1]".into()));
    }
    let zero = RepValue::exact(C64::new(0.0, 0.0));
    let mut out = PiQ { window: zero, truncation: zero };
    for t in a.terms() {
        let l = exponent(t, f)?;
        let w = C64::new(q.powi(l as i32), 0.0);
        out.window = out.window.add(&window_path(engine, t, u, v)?.scale(w));
        out.truncation = out.truncation.add(&truncation_path(engine, t, u, v)?.scale(w));
    }
    Ok(out)
}
