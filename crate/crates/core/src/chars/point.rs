//! Point sequences in `R^N` and tail products `prod f_j(x_j)^l`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnalg::bump_value;
use crate::infprod::{certify_tol, Bracket, ProductStatus, TailClass, DIVERGENCE_THRESHOLD};
use crate::measures::{draw, ProductMeasure};
use crate::tensor::{LevelRule, StabSeq};

/// Values of `x_n` outside the explicit deviations. Rules that mention levels
/// refer to the stabilizing sequence the point is paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailRule {
    /// `x_n = theta * k_n` with `|theta| <= 1`, inside every plateau.
    InPlateau {
        theta: f64,
    },
    /// `x_n` drawn from `mu_n` with a fixed seed.
    Sampled {
        measure: ProductMeasure,
        seed: u64,
    },
    Constant {
        c: f64,
    },
    /// `x_n = k_n + delta` with `delta >= 0`: every tail factor equals `(1 - delta)_+`.
    LevelOffset {
        delta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeq {
    deviations: BTreeMap<usize, f64>,
    tail: TailRule,
}

impl PointSeq {
    pub fn new(deviations: BTreeMap<usize, f64>, tail: TailRule) -> Result<Self> {
        if deviations.keys().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("point coordinates are 1-based".into()));
        }
        if deviations.values().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite point coordinate".into()));
        }
        match &tail {
            TailRule::InPlateau { theta } if !(theta.abs() <= 1.0) => {
                return Err(Error::InvalidArgument("plateau points need |theta| <= 1".into()))
            }
            TailRule::LevelOffset { delta } if !(*delta >= 0.0 && delta.is_finite()) => {
                return Err(Error::InvalidArgument("level offsets must be nonnegative".into()))
            }
            TailRule::Constant { c } if !c.is_finite() => return Err(Error::InvalidArgument("non-finite constant tail".into())),
            _ => {}
        }
        Ok(PointSeq { deviations, tail })
    }

    /// The origin.
    pub fn origin() -> Self {
        PointSeq { deviations: BTreeMap::new(), tail: TailRule::Constant { c: 0.0 } }
    }

    /// Finitely many deviations, plateau tail at `theta = 0`.
    pub fn finite(deviations: BTreeMap<usize, f64>) -> Result<Self> {
        Self::new(deviations, TailRule::InPlateau { theta: 0.0 })
    }

    pub fn deviations(&self) -> &BTreeMap<usize, f64> {
        &self.deviations
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn max_deviation(&self) -> usize {
        self.deviations.keys().next_back().copied().unwrap_or(0)
    }

    /// `x_n` relative to the stabilizing sequence `f`.
    pub fn value(&self, n: usize, f: &StabSeq) -> f64 {
        if let Some(&x) = self.deviations.get(&n) {
            return x;
        }
        match &self.tail {
            TailRule::InPlateau { theta } => theta * f.level(n) as f64,
            TailRule::Sampled { measure, seed } => draw(measure.at(n), *seed, n, 0),
            TailRule::Constant { c } => *c,
            TailRule::LevelOffset { delta } => f.level(n) as f64 + delta,
        }
    }
}

/// Outcome of `prod_{j=k}^{k+N-1} f_j(x_j)^l` and its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TailVerdict {
    Limit { value: f64, bracket: Bracket, exact: bool },
    InNf { deficit_sum: f64 },
    Undetermined { partial: f64, deficit_sum: f64 },
}

impl TailVerdict {
    pub fn is_in_nf(&self) -> bool {
        matches!(self, TailVerdict::InNf { .. })
    }
}

fn factor(x: &PointSeq, f: &StabSeq, l: u32, j: usize) -> f64 {
    bump_value(f.level(j), l, x.value(j, f))
}

/// Tail product of `x` against `f^l` from slot `k`, `depth` factors computed.
pub fn tail_product(x: &PointSeq, f: &StabSeq, l: u32, k: usize, depth: usize, tol: f64) -> TailVerdict {
    let k = k.max(1);
    let last = (k + depth.max(1) - 1).max(x.max_deviation());
    let factors: Vec<(f64, f64)> = (k..=last).map(|j| (factor(x, f, l, j), 0.0)).collect();
    let partial: f64 = factors.iter().map(|p| p.0).product();
    let deficit_sum: f64 = factors.iter().map(|p| 1.0 - p.0).sum();

    // eventually periodic tails are decided exactly from one block
    let exact_block: Option<Vec<f64>> = match (&x.tail, f.rule()) {
        (TailRule::InPlateau { .. }, _) => Some(vec![1.0]),
        (TailRule::LevelOffset { delta }, _) => Some(vec![(1.0 - delta).max(0.0).powi(l as i32)]),
        (TailRule::Constant { c }, LevelRule::Periodic { prefix, cycle }) => {
            let from = (last + 1).max(prefix.len() + 1);
            Some((from..from + cycle.len()).map(|j| bump_value(f.level(j), l, *c)).collect())
        }
        _ => None,
    };
    match exact_block {
        Some(block) if block.iter().all(|&v| v == 1.0) => {
            TailVerdict::Limit { value: partial, bracket: Bracket::exact(partial), exact: true }
        }
        Some(_) => TailVerdict::InNf { deficit_sum: f64::INFINITY },
        None => {
            let out = certify_tol(&factors, TailClass::Unknown, tol);
            match out.status {
                _ if out.deficit_sum > DIVERGENCE_THRESHOLD => TailVerdict::InNf { deficit_sum },
                ProductStatus::Converged => TailVerdict::Limit { value: partial, bracket: out.limit, exact: false },
                _ => TailVerdict::Undetermined { partial, deficit_sum },
            }
        }
    }
}
