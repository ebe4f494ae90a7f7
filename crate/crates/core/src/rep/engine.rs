//! Matrix elements of diagonal operators in a product-measure representation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::vector::{est_add, est_mul, DiagOp, LazyVec, RepValue, VecElem};
use crate::error::{Error, Result};
use crate::fnalg::ScalarFn;
use crate::infprod::{geometric_envelope, Bracket, CBracket, MeasureTails, ProductOutcome, ProductStatus, TailClass, DIVERGENCE_THRESHOLD};
use crate::measures::{Estimate, ProductMeasure, QuadratureCfg};
use crate::tensor::{StabSeq, Tail};
use crate::C64;

pub const DEFAULT_DEPTH: usize = 64;

/// A sequence of slot functions `(u_t)`.
#[derive(Clone)]
pub enum SlotSeq {
    /// `u_t = 1`
    Unit,
    /// `u_t = f_t`
    Stab(Arc<StabSeq>),
    Custom(Arc<dyn Fn(usize) -> ScalarFn + Send + Sync>),
}

impl SlotSeq {
    pub fn custom(f: impl Fn(usize) -> ScalarFn + Send + Sync + 'static) -> Self {
        SlotSeq::Custom(Arc::new(f))
    }

    pub fn slot(&self, t: usize) -> ScalarFn {
        match self {
            SlotSeq::Unit => ScalarFn::one(),
            SlotSeq::Stab(f) => f.slot_fn(t),
            SlotSeq::Custom(g) => g(t),
        }
    }
}

impl std::fmt::Debug for SlotSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlotSeq::Unit => f.write_str("Unit"),
            SlotSeq::Stab(s) => f.debug_tuple("Stab").field(&s.id()).finish(),
            SlotSeq::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Verdict on `sum_t |(u_t, v_t) - 1|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum VnVerdict {
    Convergent { partial_sum: f64, rest: f64 },
    Divergent { partial_sum: f64 },
    Undetermined { partial_sum: f64 },
}

/// Result of a projection limit with its cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PReport {
    pub value: RepValue,
    /// Values for tail exponents 1, 2, 3.
    pub per_level: Vec<RepValue>,
    pub level_independent: bool,
    /// `<Omega, P Omega>` against `<Omega, P^2 Omega>` by iterated limits.
    pub idempotent: bool,
}

/// Product representation on `L^2(prod mu_n)` truncated at `depth` coordinates.
#[derive(Debug)]
pub struct Engine {
    tails: MeasureTails,
    depth: usize,
}

impl Engine {
    pub fn new(measure: ProductMeasure, cfg: QuadratureCfg, depth: usize) -> Result<Self> {
        cfg.validate()?;
        if depth == 0 {
            return Err(Error::InvalidArgument("depth must be positive".into()));
        }
        Ok(Engine { tails: MeasureTails::new(measure, cfg), depth })
    }

    pub fn with_measure(measure: ProductMeasure) -> Self {
        Engine { tails: MeasureTails::new(measure, QuadratureCfg::default()), depth: DEFAULT_DEPTH }
    }

    pub fn measure(&self) -> &ProductMeasure {
        self.tails.measure()
    }

    pub fn cfg(&self) -> &QuadratureCfg {
        self.tails.cfg()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tails(&self) -> &MeasureTails {
        &self.tails
    }

    pub(crate) fn check(&self, v: &VecElem) -> Result<()> {
        if v.ambient() != self.measure() {
            return Err(Error::MeasureMismatch);
        }
        Ok(())
    }

    /// `<u, op v>` over slots `1..=m`.
    fn finite(&self, u: &VecElem, op: &DiagOp, v: &VecElem, m: usize) -> Result<Estimate> {
        let mut total = Estimate::exact(C64::new(0.0, 0.0));
        for (ca, ua) in u.terms() {
            for (cb, vb) in v.terms() {
                let mut acc = Estimate::exact(ca.conj() * cb * op.coeff());
                for n in 1..=m {
                    let (a, b) = (ua.get(&n), vb.get(&n));
                    let e = if a.is_none() && b.is_none() {
                        match op.slots().get(&n) {
                            Some(f) => self.measure().at(n).integrate(f, self.cfg())?,
                            None if op.tail_active(n) => self.tails.factor(n, op.tail().slot(n))?,
                            None => Estimate::exact(C64::new(1.0, 0.0)),
                        }
                    } else {
                        let left = a.map_or_else(ScalarFn::one, |f| f.conj());
                        let right = b.cloned().unwrap_or_else(ScalarFn::one);
                        let g = left.mul(&op.slot_fn(n))?.mul(&right)?;
                        self.measure().at(n).integrate(&g, self.cfg())?
                    };
                    acc = est_mul(acc, e);
                }
                total = est_add(total, acc);
            }
        }
        Ok(total)
    }

    /// `<u, op v>` with the tail beyond all explicit slots certified to `depth`.
    pub fn inner_op(&self, u: &VecElem, op: &DiagOp, v: &VecElem) -> Result<RepValue> {
        self.check(u)?;
        self.check(v)?;
        let m = u.max_slot().max(v.max_slot()).max(op.last_explicit());
        let fin = self.finite(u, op, v, m)?;
        if op.tail().is_unit() {
            return Ok(RepValue { value: CBracket { estimate: fin.value, radius: fin.err }, status: ProductStatus::Certified });
        }
        let out = self.tails.product(op.tail(), m + 1, self.depth.max(m + 1))?;
        Ok(RepValue { value: CBracket::scale(fin, out.limit), status: out.status })
    }

    pub fn inner(&self, u: &VecElem, v: &VecElem) -> Result<RepValue> {
        self.inner_op(u, &DiagOp::identity(), v)
    }

    pub fn inner_lazy(&self, u: &VecElem, v: &LazyVec) -> Result<RepValue> {
        self.inner_op(u, &v.op()?, &v.base)
    }

    /// Summands `|(u_t, v_t) - 1|` for `t = 1..=depth`. Pairs built from the unit
    /// and stabilizing sequences are classified structurally; anything else
    /// falls back to the threshold policy with tolerance `tol`.
    pub fn vn_equiv(&self, u: &SlotSeq, v: &SlotSeq, tol: f64) -> Result<(Vec<f64>, VnVerdict)> {
        let summands = (1..=self.depth)
            .map(|t| {
                let g = u.slot(t).conj().mul(&v.slot(t))?;
                Ok((self.measure().at(t).integrate(&g, self.cfg())?.value - 1.0).norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        let partial_sum: f64 = summands.iter().sum();
        let class = match (u, v) {
            (SlotSeq::Unit, SlotSeq::Unit) => TailClass::Summable { remainder: 0.0 },
            (SlotSeq::Unit, SlotSeq::Stab(f)) | (SlotSeq::Stab(f), SlotSeq::Unit) => self.tails.classify(&Tail::power(f, 1), self.depth),
            (SlotSeq::Stab(f), SlotSeq::Stab(g)) => self.tails.classify(&Tail::power(f, 1).mul(&Tail::power(g, 1))?, self.depth),
            _ => TailClass::Unknown,
        };
        let verdict = match class {
            TailClass::Summable { remainder } => VnVerdict::Convergent { partial_sum, rest: remainder },
            TailClass::Divergent => VnVerdict::Divergent { partial_sum },
            TailClass::Unknown if partial_sum > DIVERGENCE_THRESHOLD => VnVerdict::Divergent { partial_sum },
            TailClass::Unknown => match geometric_envelope(&summands, tol) {
                Some(rest) if rest < tol => VnVerdict::Convergent { partial_sum, rest },
                _ => VnVerdict::Undetermined { partial_sum },
            },
        };
        Ok((summands, verdict))
    }

    /// `<u, F_k^(l) v>` with `F_k^(l)` the limit of `prod_{j=k}^N pi_j(f_j^l)`.
    pub fn f_elem(&self, k: usize, l: u32, f: &Arc<StabSeq>, u: &VecElem, v: &VecElem) -> Result<RepValue> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidArgument("k and l must be at least 1".into()));
        }
        self.inner_op(u, &DiagOp::tail_from(Tail::power(f, l), k), v)
    }

    /// Partial products `<Omega, prod_{j=k}^N pi_j(f_j^l) Omega>` for `N = k..=depth`.
    pub fn f_sweep(&self, k: usize, l: u32, f: &Arc<StabSeq>) -> Result<ProductOutcome> {
        self.tails.product(&Tail::power(f, l), k, self.depth.max(k))
    }

    /// `lim_k <u, tail_k v>` for the operators `1 (x) ... (x) tail_k (x) tail_{k+1} ...`,
    /// bracketed from index `k`. Certified summable tails give 1, divergent tails 0.
    pub fn tail_limit(&self, tail: &Tail, u: &VecElem, v: &VecElem, k: usize) -> Result<RepValue> {
        self.check(u)?;
        self.check(v)?;
        let base = self.finite(u, &DiagOp::identity(), v, u.max_slot().max(v.max_slot()))?;
        if tail.is_unit() {
            return Ok(RepValue { value: CBracket { estimate: base.value, radius: base.err }, status: ProductStatus::Certified });
        }
        let k = k.max(u.max_slot().max(v.max_slot()) + 1);
        let out = self.tails.product(tail, k, self.depth.max(k))?;
        // a certified summable remainder vanishes in the limit
        let bracket = match out.status {
            ProductStatus::Certified => Bracket::exact(1.0),
            ProductStatus::Converged => Bracket { lower: out.limit.lower, upper: 1.0 },
            ProductStatus::Zero => Bracket { lower: 0.0, upper: out.limit.upper },
            ProductStatus::Undetermined => Bracket { lower: 0.0, upper: 1.0 },
        };
        Ok(RepValue { value: CBracket::scale(base, bracket), status: out.status })
    }

    /// `<u, P[f] v>` with `P[f] = lim_k F_k^(l)`.
    pub fn p_elem(&self, f: &Arc<StabSeq>, u: &VecElem, v: &VecElem, k_max: usize) -> Result<PReport> {
        let per_level = (1..=3).map(|l| self.tail_limit(&Tail::power(f, l), u, v, k_max)).collect::<Result<Vec<_>>>()?;
        let slack = 1e-12;
        let level_independent = per_level.iter().all(|a| per_level.iter().all(|b| a.value.close_to(&b.value, slack)));
        let omega = VecElem::omega(self.measure().clone());
        let once = self.tail_limit(&Tail::power(f, 1), &omega, &omega, k_max)?;
        let square = Tail::power(f, 1).mul(&Tail::power(f, 1))?;
        let twice = self.tail_limit(&square, &omega, &omega, k_max)?;
        Ok(PReport { value: per_level[0], level_independent, idempotent: once.value.close_to(&twice.value, slack), per_level })
    }
}
