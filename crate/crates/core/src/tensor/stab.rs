//! Stabilizing bump sequences and tail classes.

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnalg::{bump_power, bump_value, ScalarFn};
use crate::measures::{least_level, Budget, ProductMeasure, LEVEL_CAP};

/// How the level `k_n` of slot `n` is determined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LevelRule {
    /// `prefix` for the first slots, then `cycle` repeated.
    Periodic { prefix: Vec<u32>, cycle: Vec<u32> },
    /// Least level whose plateau deficit under `measure` is within `budget(n)`.
    Selected { measure: ProductMeasure, budget: Budget },
}

impl LevelRule {
    pub fn constant(level: u32) -> Self {
        LevelRule::Periodic { prefix: Vec::new(), cycle: vec![level] }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LevelRule::Periodic { prefix, cycle } => {
                if cycle.is_empty() {
                    return Err(Error::InvalidArgument("level cycle cannot be empty".into()));
                }
                if let Some(&bad) = prefix.iter().chain(cycle).find(|&&k| k < 1) {
                    return Err(Error::InvalidLevel(bad as i64));
                }
                Ok(())
            }
            LevelRule::Selected { measure, .. } => {
                // the first slot surfaces heavy tails early
                least_level(measure.at(1), 1.0, 1).map(|_| ())
            }
        }
    }
}

/// A sequence `f = (f_n)` with `f_n` the canonical bump of level `k_n`.
pub struct StabSeq {
    id: String,
    rule: LevelRule,
    cache: Mutex<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct RawStab {
    id: String,
    rule: LevelRule,
}

impl Serialize for StabSeq {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawStab { id: self.id.clone(), rule: self.rule.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StabSeq {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawStab::deserialize(d)?;
        StabSeq::new(raw.id, raw.rule).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for StabSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StabSeq").field("id", &self.id).field("rule", &self.rule).finish()
    }
}

impl PartialEq for StabSeq {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.rule == other.rule
    }
}

impl Clone for StabSeq {
    fn clone(&self) -> Self {
        StabSeq { id: self.id.clone(), rule: self.rule.clone(), cache: Mutex::new(self.cache.lock().expect("cache lock").clone()) }
    }
}

impl StabSeq {
    pub fn new(id: impl Into<String>, rule: LevelRule) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidArgument("sequence id cannot be empty".into()));
        }
        rule.validate()?;
        Ok(StabSeq { id, rule, cache: Mutex::new(Vec::new()) })
    }

    pub fn constant(id: impl Into<String>, level: u32) -> Result<Self> {
        Self::new(id, LevelRule::constant(level))
    }

    pub fn periodic(id: impl Into<String>, prefix: Vec<u32>, cycle: Vec<u32>) -> Result<Self> {
        Self::new(id, LevelRule::Periodic { prefix, cycle })
    }

    /// Levels selected against `measure`; levels `1..=depth` are computed eagerly
    /// so that search failures surface here.
    pub fn selected(id: impl Into<String>, measure: ProductMeasure, budget: Budget, depth: usize) -> Result<Self> {
        let s = Self::new(id, LevelRule::Selected { measure, budget })?;
        s.levels_checked(depth)?;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn rule(&self) -> &LevelRule {
        &self.rule
    }

    /// Levels `k_1..k_depth`, propagating search failures.
    pub fn levels_checked(&self, depth: usize) -> Result<Vec<u32>> {
        match &self.rule {
            LevelRule::Periodic { .. } => Ok((1..=depth).map(|n| self.level(n)).collect()),
            LevelRule::Selected { measure, budget } => {
                let mut cache = self.cache.lock().expect("cache lock");
                while cache.len() < depth {
                    let n = cache.len() + 1;
                    cache.push(least_level(measure.at(n), budget.value(n), n)?);
                }
                Ok(cache[..depth].to_vec())
            }
        }
    }

    /// Level `k_n` (1-based). For selected rules a failed search saturates at the level cap.
    pub fn level(&self, n: usize) -> u32 {
        assert!(n >= 1, "slots are 1-based");
        match &self.rule {
            LevelRule::Periodic { prefix, cycle } => {
                if n <= prefix.len() {
                    prefix[n - 1]
                } else {
                    cycle[(n - 1 - prefix.len()) % cycle.len()]
                }
            }
            LevelRule::Selected { measure, budget } => {
                let mut cache = self.cache.lock().expect("cache lock");
                while cache.len() < n {
                    let m = cache.len() + 1;
                    let k = least_level(measure.at(m), budget.value(m), m).unwrap_or(LEVEL_CAP as u32);
                    cache.push(k);
                }
                cache[n - 1]
            }
        }
    }

    pub fn slot_fn(&self, n: usize) -> ScalarFn {
        bump_power(self.level(n), 1).expect("levels are >= 1")
    }
}

/// A tail class: the monomial `prod_i f_i^{e_i}` over stabilizing sequences,
/// sorted by id. The empty monomial is the unit tail (all slots equal 1).
#[derive(Debug, Clone, Default)]
pub struct Tail {
    factors: Vec<(Arc<StabSeq>, u32)>,
}

impl PartialEq for Tail {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

/// Slot data of a tail: `bump(level)^power`, or `None` for the unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub level: u32,
    pub power: u32,
}

impl Slot {
    pub fn value(&self, t: f64) -> f64 {
        bump_value(self.level, self.power, t)
    }

    pub fn function(&self) -> ScalarFn {
        bump_power(self.level, self.power).expect("valid slot")
    }
}

impl Tail {
    pub fn unit() -> Self {
        Tail { factors: Vec::new() }
    }

    pub fn power(f: &Arc<StabSeq>, exponent: u32) -> Self {
        if exponent == 0 {
            return Self::unit();
        }
        Tail { factors: vec![(Arc::clone(f), exponent)] }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Arc<StabSeq>, u32)] {
        &self.factors
    }

    /// Sum of exponents (the grading degree).
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn key(&self) -> Vec<(&str, u32)> {
        self.factors.iter().map(|(s, e)| (s.id(), *e)).collect()
    }

    /// `Some((f, l))` if the tail is `f^l` for a single sequence.
    pub fn as_power(&self) -> Option<(&Arc<StabSeq>, u32)> {
        match self.factors.as_slice() {
            [(f, e)] => Some((f, *e)),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Tail) -> Result<Tail> {
        let mut out: Vec<(Arc<StabSeq>, u32)> = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            let take_left = match (self.factors.get(i), other.factors.get(j)) {
                (Some((a, _)), Some((b, _))) => match a.id().cmp(b.id()) {
                    std::cmp::Ordering::Less => Some(true),
                    std::cmp::Ordering::Greater => Some(false),
                    std::cmp::Ordering::Equal => None,
                },
                (Some(_), None) => Some(true),
                (None, Some(_)) => Some(false),
                (None, None) => unreachable!(),
            };
            match take_left {
                Some(true) => {
                    out.push(self.factors[i].clone());
                    i += 1;
                }
                Some(false) => {
                    out.push(other.factors[j].clone());
                    j += 1;
                }
                None => {
                    let (a, ea) = &self.factors[i];
                    let (b, eb) = &other.factors[j];
                    if a.rule() != b.rule() {
                        return Err(Error::ConflictingStab(a.id().to_string()));
                    }
                    out.push((Arc::clone(a), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(Tail { factors: out })
    }

    /// Slot `n`: the product `prod f_i(n)^{e_i}` equals the bump of the least level
    /// raised to the total exponent of the factors attaining it.
    pub fn slot(&self, n: usize) -> Option<Slot> {
        let mut best: Option<Slot> = None;
        for (f, e) in &self.factors {
            let k = f.level(n);
            best = match best {
                None => Some(Slot { level: k, power: *e }),
                Some(s) if k < s.level => Some(Slot { level: k, power: *e }),
                Some(s) if k == s.level => Some(Slot { level: k, power: s.power + e }),
                keep => keep,
            };
        }
        best
    }

    pub fn slot_fn(&self, n: usize) -> ScalarFn {
        match self.slot(n) {
            Some(s) => s.function(),
            None => ScalarFn::one(),
        }
    }

    pub fn slot_value(&self, n: usize, t: f64) -> f64 {
        self.slot(n).map_or(1.0, |s| s.value(t))
    }
}
