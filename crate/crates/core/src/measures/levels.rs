//! Summable deficit budgets and plateau level selection.

use serde::{Deserialize, Serialize};

use super::measure1d::Measure1D;
use super::product::ProductMeasure;
use crate::error::{Error, Result};

/// Largest level the search will consider.
pub const LEVEL_CAP: u64 = 1_000_000;

/// A positive summable sequence `n -> budget(n)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Budget {
    /// `2^{-n}`
    #[default]
    Geometric,
    /// `n^{-p}` with `p > 1`
    InversePower { p: f64 },
}

impl Budget {
    pub fn inverse_power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("inverse-power budget needs p > 1, got {p}")));
        }
        Ok(Budget::InversePower { p })
    }

    pub fn value(&self, n: usize) -> f64 {
        match self {
            Budget::Geometric => 0.5f64.powi(n.min(i32::MAX as usize) as i32),
            Budget::InversePower { p } => (n as f64).powf(-p),
        }
    }

    /// Upper bound for `sum_{n > big_n} budget(n)`.
    pub fn remainder(&self, big_n: usize) -> f64 {
        match self {
            Budget::Geometric => 0.5f64.powi(big_n.min(i32::MAX as usize) as i32),
            Budget::InversePower { p } => {
                if big_n == 0 {
                    // 1 + int_1^inf x^-p dx
                    1.0 + 1.0 / (p - 1.0)
                } else {
                    (big_n as f64).powf(1.0 - p) / (p - 1.0)
                }
            }
        }
    }

    pub fn partial_sum(&self, big_n: usize) -> f64 {
        (1..=big_n).map(|n| self.value(n)).sum()
    }
}

/// Least level `k >= 1` with `tail_mass(mu, k) <= budget`.
pub fn least_level(mu: &Measure1D, budget: f64, coordinate: usize) -> Result<u32> {
    let ok = |k: u64| mu.tail_mass(k as f64) <= budget;
    if ok(1) {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !ok(hi) {
        if hi >= LEVEL_CAP {
            return Err(Error::HeavyTail { coordinate, cap: LEVEL_CAP });
        }
        hi = (hi * 2).min(LEVEL_CAP);
    }
    let mut lo = hi / 2; // fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as u32)
}

/// `k_1..k_N` with each `k_n` the least level meeting `budget(n)`.
pub fn select_levels(mu: &ProductMeasure, budget: &Budget, depth: usize) -> Result<Vec<u32>> {
    (1..=depth).map(|n| least_level(mu.at(n), budget.value(n), n)).collect()
}
