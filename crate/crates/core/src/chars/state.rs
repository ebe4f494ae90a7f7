//! Product states on finitely supported sequences and positive-definiteness checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::character::Character;
use crate::error::Result;
use crate::fnalg::bump_power;
use crate::infprod::MeasureTails;
use crate::measures::{Estimate, ProductMeasure, QuadratureCfg};
use crate::tensor::{FinSeq, StabSeq, Tail};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub measure: ProductMeasure,
}

impl ProductState {
    pub fn new(measure: ProductMeasure) -> Self {
        ProductState { measure }
    }
}

/// `omega(x) = prod_{n in supp x} char_fn(mu_n, x_n)`.
pub fn state_eval(s: &ProductState, x: &FinSeq, cfg: &QuadratureCfg) -> Result<Estimate> {
    let mut value = C64::new(1.0, 0.0);
    let mut err = 0.0;
    for (&n, &xn) in x.iter().filter(|(_, &v)| v != 0.0) {
        let e = s.measure.at(n).char_fn(xn, cfg)?;
        value *= e.value;
        err += e.err;
    }
    Ok(Estimate { value, err })
}

/// Strict-extension residual along the approximate identity built from `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrictExt {
    /// `<Omega, eta(x) E_N Omega>`
    pub omega_n: C64,
    /// `omega(x)`
    pub omega: C64,
    pub residual: f64,
}

/// `E_N` carries `bump(k_j + N)` in slots `j <= N` and `f_j` afterwards; the
/// residual is `|<Omega, eta(x) E_N Omega> - omega(x)|`.
pub fn strict_ext_check(s: &ProductState, f: &StabSeq, x: &FinSeq, big_n: usize, cfg: &QuadratureCfg) -> Result<StrictExt> {
    let f = std::sync::Arc::new(f.clone());
    let tails = MeasureTails::new(s.measure.clone(), *cfg);
    let last = big_n.max(x.keys().next_back().copied().unwrap_or(0));
    let mut value = C64::new(1.0, 0.0);
    for j in 1..=last {
        let level = if j <= big_n { f.level(j) + big_n as u32 } else { f.level(j) };
        let slot = bump_power(level, 1)?;
        let xj = x.get(&j).copied().unwrap_or(0.0);
        let g = if xj != 0.0 { slot.modulate(xj)? } else { slot };
        value *= s.measure.at(j).integrate(&g, cfg)?.value;
    }
    let tail = tails.product(&Tail::power(&f, 1), last + 1, last + 64)?;
    let omega_n = value * tail.limit.mid();
    let omega = state_eval(s, x, cfg)?.value;
    Ok(StrictExt { omega_n, omega, residual: (omega_n - omega).norm() })
}

/// A candidate positive definite function on finitely supported sequences.
pub trait PdCandidate {
    fn value(&self, x: &FinSeq) -> Result<C64>;
}

impl PdCandidate for ProductState {
    fn value(&self, x: &FinSeq) -> Result<C64> {
        Ok(state_eval(self, x, &QuadratureCfg::default())?.value)
    }
}

impl PdCandidate for Character {
    fn value(&self, x: &FinSeq) -> Result<C64> {
        Ok(self.induced(x))
    }
}

/// `1.5 prod_n cos(2 x_n) - 0.5`: normalized but not positive definite.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineNonState;

impl PdCandidate for CosineNonState {
    fn value(&self, x: &FinSeq) -> Result<C64> {
        let p: f64 = x.values().map(|&t| (2.0 * t).cos()).product();
        Ok(C64::new(1.5 * p - 0.5, 0.0))
    }
}

fn difference(a: &FinSeq, b: &FinSeq) -> FinSeq {
    let mut d = a.clone();
    for (&n, &v) in b {
        *d.entry(n).or_insert(0.0) -= v;
    }
    d.retain(|_, v| *v != 0.0);
    d
}

/// Smallest eigenvalue of the Hermitian Gram matrix `[omega(x_i - x_j)]`.
pub fn psd_check(omega: &dyn PdCandidate, points: &[FinSeq]) -> Result<f64> {
    let m = points.len();
    let mut g = DMatrix::<C64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = omega.value(&difference(&points[i], &points[j]))?;
        }
    }
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Ok(h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}
