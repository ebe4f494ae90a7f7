//! Certified infinite products `prod_{j >= start} tau_j` with `tau_j in [0, 1]`.
//!
//! A product is classified from the structure of its factors: summable
//! deficits give the bracket `[P_N (1 - R(N)), P_N]` where `R(N)` bounds the
//! remaining deficits; an eventually periodic block with a factor below 1 forces
//! the limit to 0; anything else falls back to a numeric threshold policy.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{Budget, Estimate, ProductMeasure, QuadratureCfg};
use crate::tensor::{LevelRule, Slot, StabSeq, Tail};
use crate::C64;

/// Deficit sum beyond which a product is declared zero (`prod < e^-50`).
pub const DIVERGENCE_THRESHOLD: f64 = 50.0;
/// Increments below this (over the trailing window) count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-12;
const TRAILING_WINDOW: usize = 8;

/// Real interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn exact(v: f64) -> Self {
        Bracket { lower: v, upper: v }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lower - slack && v <= self.upper + slack
    }

    pub fn overlaps(&self, other: &Bracket, slack: f64) -> bool {
        self.lower <= other.upper + slack && other.lower <= self.upper + slack
    }
}

/// Complex estimate with a certified radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CBracket {
    pub estimate: C64,
    pub radius: f64,
}

impl CBracket {
    pub fn exact(v: C64) -> Self {
        CBracket { estimate: v, radius: 0.0 }
    }

    /// `a * t` for an estimate `a` and a real interval `t`.
    pub fn scale(a: Estimate, t: Bracket) -> Self {
        let mid = t.mid();
        CBracket { estimate: a.value * mid, radius: a.value.norm() * 0.5 * t.width() + a.err * t.upper.abs().max(t.lower.abs()) }
    }

    pub fn close_to(&self, other: &CBracket, slack: f64) -> bool {
        (self.estimate - other.estimate).norm() <= self.radius + other.radius + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductStatus {
    /// Bracket from an analytic bound on the remaining deficits.
    Certified,
    /// Limit is 0: an eventually periodic factor block lies below 1, or the deficit sum passed the threshold.
    Zero,
    /// Trailing increments fell below tolerance under a geometric envelope.
    Converged,
    Undetermined,
}

/// How the deficits `1 - tau_j` behave beyond the computed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    /// `sum_{j > N} (1 - tau_j) <= remainder`.
    Summable {
        remainder: f64,
    },
    /// The infinite product is exactly 0.
    Divergent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductOutcome {
    /// `prod_{j=start}^{n} tau_j` for `n = start..=depth`.
    pub partials: Vec<f64>,
    pub limit: Bracket,
    pub status: ProductStatus,
    pub deficit_sum: f64,
}

impl ProductOutcome {
    pub fn last_partial(&self) -> f64 {
        self.partials.last().copied().unwrap_or(1.0)
    }
}

/// Combine computed factors (value, abs error) with the tail classification.
pub fn certify(factors: &[(f64, f64)], class: TailClass) -> ProductOutcome {
    certify_tol(factors, class, CONVERGENCE_TOL)
}

/// [`certify`] with an explicit convergence tolerance for unclassified tails.
pub fn certify_tol(factors: &[(f64, f64)], class: TailClass, tol: f64) -> ProductOutcome {
    let mut p = 1.0;
    let mut err = 0.0;
    let mut deficit_sum = 0.0;
    let mut partials = Vec::with_capacity(factors.len());
    for &(v, e) in factors {
        p *= v.clamp(0.0, 1.0);
        err += e;
        deficit_sum += (1.0 - v).max(0.0);
        partials.push(p);
    }
    let upper = (p + err).min(1.0);
    match class {
        TailClass::Summable { remainder } => ProductOutcome {
            partials,
            limit: Bracket { lower: (p * (1.0 - remainder).max(0.0) - err).max(0.0), upper },
            status: ProductStatus::Certified,
            deficit_sum,
        },
        TailClass::Divergent => ProductOutcome { partials, limit: Bracket::exact(0.0), status: ProductStatus::Zero, deficit_sum },
        TailClass::Unknown => {
            if deficit_sum > DIVERGENCE_THRESHOLD {
                return ProductOutcome { partials, limit: Bracket { lower: 0.0, upper }, status: ProductStatus::Zero, deficit_sum };
            }
            let deficits: Vec<f64> = factors.iter().map(|&(v, _)| (1.0 - v).max(0.0)).collect();
            match geometric_envelope(&deficits, tol) {
                Some(rest) if rest < tol => ProductOutcome {
                    partials,
                    limit: Bracket { lower: (p * (1.0 - rest) - err).max(0.0), upper },
                    status: ProductStatus::Converged,
                    deficit_sum,
                },
                _ => ProductOutcome { partials, limit: Bracket { lower: 0.0, upper }, status: ProductStatus::Undetermined, deficit_sum },
            }
        }
    }
}

/// Estimated remaining deficit assuming the trailing window decays geometrically.
pub fn geometric_envelope(deficits: &[f64], tol: f64) -> Option<f64> {
    if deficits.len() < TRAILING_WINDOW {
        return None;
    }
    let w = &deficits[deficits.len() - TRAILING_WINDOW..];
    if w.iter().any(|&d| d >= tol) {
        return None;
    }
    let last = *w.last().expect("window nonempty");
    if w.iter().all(|&d| d == 0.0) {
        return Some(0.0);
    }
    let ratio = w.windows(2).filter(|p| p[0] > 0.0).map(|p| p[1] / p[0]).fold(0.0f64, f64::max);
    if ratio >= 1.0 {
        return None;
    }
    Some(last.max(w[0] * ratio) * ratio / (1.0 - ratio))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Deficit behaviour of one stabilizing sequence against a product measure.
#[derive(Debug, Clone, PartialEq)]
enum FactorClass {
    /// Deficits vanish from slot `from` on.
    Finite {
        from: usize,
    },
    Budgeted(Budget),
    Divergent,
    Unknown,
}

/// Integrals of tail slots against the coordinates of a product measure, with
/// caching and tail classification.
#[derive(Debug)]
pub struct MeasureTails {
    measure: ProductMeasure,
    cfg: QuadratureCfg,
    cache: Mutex<HashMap<(usize, Slot), Estimate>>,
}

impl MeasureTails {
    pub fn new(measure: ProductMeasure, cfg: QuadratureCfg) -> Self {
        MeasureTails { measure, cfg, cache: Mutex::new(HashMap::new()) }
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.measure
    }

    pub fn cfg(&self) -> &QuadratureCfg {
        &self.cfg
    }

    /// `int slot dmu_j` (1 for the unit slot).
    pub fn factor(&self, j: usize, slot: Option<Slot>) -> Result<Estimate> {
        let Some(slot) = slot else {
            return Ok(Estimate::exact(C64::new(1.0, 0.0)));
        };
        let key = (self.measure.class_of(j), slot);
        if let Some(e) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*e);
        }
        let mu = self.measure.at(j);
        let e =
            if mu.carried_by(slot.level as f64) { Estimate::exact(C64::new(1.0, 0.0)) } else { mu.integrate(&slot.function(), &self.cfg)? };
        self.cache.lock().expect("cache lock").insert(key, e);
        Ok(e)
    }

    fn classify_factor(&self, f: &StabSeq) -> FactorClass {
        match f.rule() {
            LevelRule::Periodic { prefix, cycle } => {
                let from = prefix.len().max(self.measure.prefix().len()) + 1;
                let (a, b) = (cycle.len(), self.measure.period());
                let period = a / gcd(a, b) * b;
                let divergent = (from..from + period).any(|j| !self.measure.at(j).carried_by(f.level(j) as f64));
                if divergent {
                    FactorClass::Divergent
                } else {
                    FactorClass::Finite { from }
                }
            }
            LevelRule::Selected { measure, budget } if *measure == self.measure => FactorClass::Budgeted(*budget),
            LevelRule::Selected { .. } => FactorClass::Unknown,
        }
    }

    /// Classification of `prod_{j > n} int tail_j dmu_j`.
    pub fn classify(&self, tail: &Tail, n: usize) -> TailClass {
        let mut remainder = 0.0;
        let mut unknown = false;
        for (f, _) in tail.factors() {
            match self.classify_factor(f) {
                FactorClass::Divergent => return TailClass::Divergent,
                FactorClass::Unknown => unknown = true,
                FactorClass::Budgeted(b) => remainder += b.remainder(n),
                FactorClass::Finite { from } => {
                    remainder += (n + 1..from).map(|j| self.measure.at(j).tail_mass(f.level(j) as f64)).sum::<f64>();
                }
            }
        }
        if unknown {
            TailClass::Unknown
        } else {
            TailClass::Summable { remainder }
        }
    }

    /// `prod_{j >= start} int tail_j dmu_j` computed to `depth`.
    pub fn product(&self, tail: &Tail, start: usize, depth: usize) -> Result<ProductOutcome> {
        let start = start.max(1);
        let last = depth.max(start - 1);
        let factors = (start..=last).map(|j| self.factor(j, tail.slot(j)).map(|e| (e.value.re, e.err))).collect::<Result<Vec<_>>>()?;
        Ok(certify(&factors, self.classify(tail, last)))
    }
}
