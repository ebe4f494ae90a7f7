//! Finite-window projections and the regrouping check.

use std::collections::BTreeSet;

use super::elem::{ElemTensor, TensorElem, NF_TOL};
use super::stab::Tail;
use crate::error::{Error, Result};
use crate::fnalg::ScalarFn;
use crate::C64;

/// `sum_i c_i (x)_{t in window} f_{i,t}`: an element of the algebraic tensor
/// product over a finite window.
#[derive(Debug, Clone)]
pub struct FiniteTensor {
    window: Vec<usize>,
    terms: Vec<(C64, Vec<ScalarFn>)>,
}

impl FiniteTensor {
    pub fn new(window: Vec<usize>, terms: Vec<(C64, Vec<ScalarFn>)>) -> Self {
        let mut out: Vec<(C64, Vec<ScalarFn>)> = Vec::new();
        'next: for (c, slots) in terms {
            debug_assert_eq!(slots.len(), window.len());
            let mut c = c;
            let mut units = Vec::with_capacity(slots.len());
            for f in slots {
                match f.split_scale() {
                    None => continue 'next,
                    Some((s, u)) => {
                        c *= s;
                        units.push(u);
                    }
                }
            }
            match out.iter_mut().find(|(_, u)| u.iter().zip(&units).all(|(a, b)| a.approx_eq(b, NF_TOL))) {
                Some(entry) => entry.0 += c,
                None => out.push((c, units)),
            }
        }
        let scale = out.iter().fold(1.0f64, |m, (c, _)| m.max(c.norm()));
        out.retain(|(c, _)| c.norm() > 1e-14 * scale);
        FiniteTensor { window, terms: out }
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn terms(&self) -> &[(C64, Vec<ScalarFn>)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// For an empty window the value is a plain scalar.
    pub fn scalar(&self) -> C64 {
        self.terms.iter().map(|(c, _)| *c).sum()
    }

    pub fn add(&self, other: &FiniteTensor) -> FiniteTensor {
        assert_eq!(self.window, other.window, "windows must agree");
        FiniteTensor::new(self.window.clone(), self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn mul(&self, other: &FiniteTensor) -> Result<FiniteTensor> {
        assert_eq!(self.window, other.window, "windows must agree");
        let mut terms = Vec::new();
        for (a, fs) in &self.terms {
            for (b, gs) in &other.terms {
                let slots = fs.iter().zip(gs).map(|(f, g)| f.mul(g)).collect::<Result<Vec<_>>>()?;
                terms.push((a * b, slots));
            }
        }
        Ok(FiniteTensor::new(self.window.clone(), terms))
    }

    /// Value at a point of `R^window`.
    pub fn eval(&self, x: &[f64]) -> C64 {
        self.terms.iter().map(|(c, fs)| fs.iter().zip(x).fold(*c, |acc, (f, &t)| acc * f.eval(t))).sum()
    }

    pub fn approx_eq(&self, other: &FiniteTensor, tol: f64) -> bool {
        if self.window != other.window || self.terms.len() != other.terms.len() {
            return false;
        }
        let mut used = vec![false; other.terms.len()];
        self.terms.iter().all(|(c, fs)| {
            let hit = other.terms.iter().enumerate().find(|(i, (d, gs))| {
                !used[*i] && (c - d).norm() <= tol * (1.0f64).max(c.norm()) && fs.iter().zip(gs).all(|(f, g)| f.approx_eq(g, tol))
            });
            match hit {
                Some((i, _)) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }
}

fn project(a: &TensorElem, base: &ElemTensor, window: &BTreeSet<usize>, strict: bool) -> Result<FiniteTensor> {
    let win: Vec<usize> = window.iter().copied().collect();
    let mut terms = Vec::new();
    for t in a.terms() {
        if !t.equivalent(base) {
            continue;
        }
        let mut c = t.coeff();
        let off: BTreeSet<usize> = t.deviations().keys().chain(base.deviations().keys()).filter(|n| !window.contains(n)).copied().collect();
        for n in off {
            let (ts, bs) = (t.slot_fn(n), base.slot_fn(n));
            if strict && !ts.approx_eq(&bs, NF_TOL) {
                return Err(Error::WindowTooSmall(n));
            }
            let denom = bs.eval(0.0);
            if denom.norm() == 0.0 {
                return Err(Error::InvalidArgument(format!("base slot {n} vanishes at 0 outside the window")));
            }
            c *= ts.eval(0.0) / denom;
        }
        let slots = win.iter().map(|&n| t.slot_fn(n)).collect();
        terms.push((c, slots));
    }
    Ok(FiniteTensor::new(win, terms))
}

/// Window projection onto `window` relative to `base`: terms outside the base
/// class vanish; off-window slots must agree with the base.
pub fn window_project(a: &TensorElem, base: &ElemTensor, window: &BTreeSet<usize>) -> Result<FiniteTensor> {
    project(a, base, window, true)
}

/// Like [`window_project`] but off-window slots are contracted by evaluation at 0.
pub fn window_contract(a: &TensorElem, base: &ElemTensor, window: &BTreeSet<usize>) -> Result<FiniteTensor> {
    project(a, base, window, false)
}

/// Checks that windowing at `{1..m}` is multiplicative on every pair of tail
/// classes of `a` and `b`: `W(a_X b_Y) = W(a_X) W(b_Y)`.
pub fn regroup_check(a: &TensorElem, b: &TensorElem, m: usize) -> Result<bool> {
    let window: BTreeSet<usize> = (1..=m).collect();
    let base_of = |t: &Tail| ElemTensor::new(C64::new(1.0, 0.0), t.clone(), Default::default());
    for x in a.classes() {
        let ax = a.component(&x);
        let wa = window_contract(&ax, &base_of(&x), &window)?;
        for y in b.classes() {
            let by = b.component(&y);
            let wb = window_contract(&by, &base_of(&y), &window)?;
            let prod = ax.mul(&by)?;
            let xy = x.mul(&y)?;
            let lhs = window_contract(&prod, &base_of(&xy), &window)?;
            let rhs = wa.mul(&wb)?;
            if !lhs.approx_eq(&rhs, 1e-10) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
