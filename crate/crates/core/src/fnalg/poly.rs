//! Compactly supported piecewise polynomials.
//!
//! Each piece stores its coefficients in the local coordinate `s = t - b_i`
//! where `b_i` is the left breakpoint of the piece. Outside the breakpoint
//! range the function is 0.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the degree of a single piece.
pub const DEGREE_CAP: usize = 16;

/// Coefficients with magnitude below this (relative to the piece scale) are snapped to zero.
const SNAP: f64 = 1e-13;

/// Breakpoints closer than this (relative) are identified.
pub const BREAK_TOL: f64 = 1e-12;

pub trait Coeff:
    Copy + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn magnitude(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Coeff for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Evaluate a polynomial given by ascending coefficients.
pub fn horner<T: Coeff>(coeffs: &[T], s: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
}

/// Coefficients of `p(u + d)` given those of `p(s)`.
pub fn taylor_shift<T: Coeff>(coeffs: &[T], d: f64) -> Vec<T> {
    let mut a = coeffs.to_vec();
    if d == 0.0 {
        return a;
    }
    let d = T::from_real(d);
    let n = a.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = a[j + 1];
            a[j] = a[j] + d * next;
        }
    }
    a
}

pub fn poly_mul<T: Coeff>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

pub fn poly_add<T: Coeff>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or_else(T::zero);
            let y = b.get(i).copied().unwrap_or_else(T::zero);
            x + y
        })
        .collect()
}

pub fn poly_derivative<T: Coeff>(a: &[T]) -> Vec<T> {
    a.iter().enumerate().skip(1).map(|(k, &c)| T::from_real(k as f64) * c).collect()
}

/// Upper bound for `sup_{u in [0,h]} |p(u)|` from the coefficients.
pub fn coeff_bound<T: Coeff>(a: &[T], h: f64) -> f64 {
    let mut hk = 1.0;
    let mut acc = 0.0;
    for c in a {
        acc += c.magnitude() * hk;
        hk *= h;
    }
    acc
}

fn trim<T: Coeff>(mut a: Vec<T>) -> Vec<T> {
    let scale = a.iter().fold(1.0f64, |m, c| m.max(c.magnitude()));
    for c in a.iter_mut() {
        if c.magnitude() <= SNAP * scale {
            *c = T::zero();
        }
    }
    while matches!(a.last(), Some(c) if c.magnitude() == 0.0) {
        a.pop();
    }
    a
}

fn coeffs_close<T: Coeff>(a: &[T], b: &[T], tol: f64) -> bool {
    let n = a.len().max(b.len());
    (0..n).all(|i| {
        let x = a.get(i).copied().unwrap_or_else(T::zero);
        let y = b.get(i).copied().unwrap_or_else(T::zero);
        (x - y).magnitude() <= tol * (1.0f64).max(x.magnitude()).max(y.magnitude())
    })
}

pub(crate) fn same_break(a: f64, b: f64) -> bool {
    (a - b).abs() <= BREAK_TOL * (1.0f64).max(a.abs()).max(b.abs())
}

/// Sorted union of breakpoint lists with near-duplicates identified.
pub fn merge_breakpoints<'a>(lists: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = lists.into_iter().flatten().copied().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if same_break(last, x) => {}
            _ => out.push(x),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly<T>", bound(serialize = "T: Serialize", deserialize = "T: Coeff + Deserialize<'de>"))]
pub struct PiecewisePoly<T: Coeff> {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<T>>,
}

#[derive(Deserialize)]
struct RawPoly<T> {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<T>>,
}

impl<T: Coeff> TryFrom<RawPoly<T>> for PiecewisePoly<T> {
    type Error = Error;
    fn try_from(raw: RawPoly<T>) -> Result<Self> {
        PiecewisePoly::new(raw.breakpoints, raw.pieces)
    }
}

impl<T: Coeff> PiecewisePoly<T> {
    pub fn zero() -> Self {
        PiecewisePoly { breakpoints: Vec::new(), pieces: Vec::new() }
    }

    /// Validated constructor; the result is normalized.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<T>>) -> Result<Self> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::InvalidPoly(format!("{} breakpoints cannot bound {} pieces", breakpoints.len(), pieces.len())));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPoly("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPoly("breakpoints must be strictly increasing".into()));
        }
        for p in &pieces {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPoly("non-finite coefficient".into()));
            }
        }
        let mut out = PiecewisePoly { breakpoints, pieces };
        out.normalize()?;
        Ok(out)
    }

    /// Single polynomial on `[a, b]` (coefficients in `t - a`).
    pub fn single(a: f64, b: f64, coeffs: Vec<T>) -> Result<Self> {
        Self::new(vec![a, b], vec![coeffs])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<T>] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    fn normalize(&mut self) -> Result<()> {
        let mut bps = std::mem::take(&mut self.breakpoints);
        let mut pieces: Vec<Vec<T>> = std::mem::take(&mut self.pieces).into_iter().map(trim).collect();
        if let Some(d) = pieces.iter().map(|p| p.len().saturating_sub(1)).max() {
            if d > DEGREE_CAP {
                return Err(Error::DegreeOverflow { degree: d, cap: DEGREE_CAP });
            }
        }
        // drop degenerate pieces created by near-equal breakpoints
        let mut i = 0;
        while i < pieces.len() {
            if same_break(bps[i], bps[i + 1]) {
                pieces.remove(i);
                bps.remove(i + 1);
            } else {
                i += 1;
            }
        }
        while matches!(pieces.first(), Some(p) if p.is_empty()) {
            pieces.remove(0);
            bps.remove(0);
        }
        while matches!(pieces.last(), Some(p) if p.is_empty()) {
            pieces.pop();
            bps.pop();
        }
        if pieces.is_empty() {
            *self = Self::zero();
            return Ok(());
        }
        let mut mb = vec![bps[0]];
        let mut mp: Vec<Vec<T>> = vec![pieces[0].clone()];
        for (k, p) in pieces.into_iter().enumerate().skip(1) {
            let last = mp.last().expect("nonempty");
            let start = *mb.last().expect("nonempty");
            let shifted = trim(taylor_shift(last, bps[k] - start));
            if coeffs_close(&shifted, &p, BREAK_TOL) {
                continue;
            }
            mb.push(bps[k]);
            mp.push(p);
        }
        mb.push(*bps.last().expect("nonempty"));
        self.breakpoints = mb;
        self.pieces = mp;
        Ok(())
    }

    /// Index of the piece containing `t`, if any; the right piece wins at interior breakpoints.
    fn locate(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.support()?;
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        Some(idx.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, t: f64) -> T {
        match self.locate(t) {
            Some(i) => horner(&self.pieces[i], T::from_real(t - self.breakpoints[i])),
            None => T::zero(),
        }
    }

    /// Local coefficients on the cell starting at `a` (which must not straddle a breakpoint).
    pub fn local_at(&self, a: f64, b: f64) -> Vec<T> {
        let mid = 0.5 * (a + b);
        match self.locate(mid) {
            Some(i) if mid < self.breakpoints[i + 1] || i + 1 == self.pieces.len() => {
                taylor_shift(&self.pieces[i], a - self.breakpoints[i])
            }
            _ => Vec::new(),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(T) -> U) -> PiecewisePoly<U> {
        let mut out = PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.iter().map(|&c| f(c)).collect()).collect(),
        };
        out.normalize().expect("degree is preserved by coefficient maps");
        out
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn conj(&self) -> Self {
        self.map(Coeff::conj)
    }

    /// Build from cells over `grid` with `cell(a, b)` giving local coefficients.
    fn from_cells(grid: &[f64], mut cell: impl FnMut(f64, f64) -> Vec<T>) -> Result<Self> {
        if grid.len() < 2 {
            return Ok(Self::zero());
        }
        let pieces = grid.windows(2).map(|w| cell(w[0], w[1])).collect();
        Self::new(grid.to_vec(), pieces)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let grid = merge_breakpoints([self.breakpoints(), other.breakpoints()]);
        Self::from_cells(&grid, |a, b| poly_add(&self.local_at(a, b), &other.local_at(a, b))).expect("sums keep degree within cap")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.map(|c| -c))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (Some((a0, a1)), Some((b0, b1))) = (self.support(), other.support()) else {
            return Ok(Self::zero());
        };
        let (lo, hi) = (a0.max(b0), a1.min(b1));
        if lo >= hi {
            return Ok(Self::zero());
        }
        let grid: Vec<f64> =
            merge_breakpoints([self.breakpoints(), other.breakpoints()]).into_iter().filter(|&x| x >= lo && x <= hi).collect();
        let mut overflow = None;
        let out = Self::from_cells(&grid, |a, b| {
            let p = poly_mul(&self.local_at(a, b), &other.local_at(a, b));
            if p.len() > DEGREE_CAP + 1 {
                overflow = Some(p.len() - 1);
            }
            p
        });
        if let Some(degree) = overflow {
            return Err(Error::DegreeOverflow { degree, cap: DEGREE_CAP });
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let pieces = self.pieces.iter().map(|p| poly_derivative(p)).collect();
        let mut out = PiecewisePoly { breakpoints: self.breakpoints.clone(), pieces };
        out.normalize().expect("differentiation lowers degree");
        out
    }

    /// Normal-form equality: same breakpoints and coefficients within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.breakpoints.len() == other.breakpoints.len()
            && self.breakpoints.iter().zip(&other.breakpoints).all(|(a, b)| (a - b).abs() <= tol * (1.0f64).max(a.abs()))
            && self.pieces.iter().zip(&other.pieces).all(|(p, q)| coeffs_close(p, q, tol))
    }

    /// First coefficient (pieces left to right, low to high degree) that is not negligible.
    pub fn leading(&self) -> Option<T> {
        let scale = self.pieces.iter().flatten().fold(0.0f64, |m, c| m.max(c.magnitude()));
        self.pieces.iter().flatten().copied().find(|c| c.magnitude() >= 1e-6 * scale && c.magnitude() > 0.0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.pieces.iter().flatten().fold(0.0f64, |m, c| m.max(c.magnitude()))
    }
}

impl PiecewisePoly<f64> {
    pub fn to_complex(&self) -> PiecewisePoly<C64> {
        self.map(|c| C64::new(c, 0.0))
    }
}
