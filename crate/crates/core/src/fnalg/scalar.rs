//! `ScalarFn`: constant part plus frequency-modulated piecewise polynomial envelopes.

use serde::{Deserialize, Serialize};

use super::poly::{same_break, PiecewisePoly};
use crate::error::{Error, Result};
use crate::C64;

/// Snap threshold for the constant part.
const CONST_SNAP: f64 = 1e-14;

/// One modulated term `e^{i freq t} envelope(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub freq: f64,
    pub envelope: PiecewisePoly<C64>,
}

/// A complex function `constant + sum_k e^{i w_k t} E_k(t)` in normal form:
/// terms are sorted by frequency, at most one term per frequency, no zero envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScalarFn")]
pub struct ScalarFn {
    constant: C64,
    terms: Vec<Term>,
}

#[derive(Deserialize)]
struct RawScalarFn {
    constant: C64,
    #[serde(default)]
    terms: Vec<Term>,
}

impl TryFrom<RawScalarFn> for ScalarFn {
    type Error = Error;
    fn try_from(raw: RawScalarFn) -> Result<Self> {
        if !(raw.constant.re.is_finite() && raw.constant.im.is_finite()) {
            return Err(Error::InvalidPoly("non-finite constant".into()));
        }
        if raw.terms.iter().any(|t| !t.freq.is_finite()) {
            return Err(Error::InvalidPoly("non-finite frequency".into()));
        }
        Ok(ScalarFn::from_parts(raw.constant, raw.terms))
    }
}

fn same_freq(a: f64, b: f64) -> bool {
    same_break(a, b)
}

impl ScalarFn {
    pub fn zero() -> Self {
        ScalarFn { constant: C64::new(0.0, 0.0), terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        ScalarFn::from_parts(c, Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// Real piecewise polynomial with no modulation.
    pub fn from_real_poly(p: &PiecewisePoly<f64>) -> Self {
        Self::from_parts(C64::new(0.0, 0.0), vec![Term { freq: 0.0, envelope: p.to_complex() }])
    }

    pub fn from_term(freq: f64, envelope: PiecewisePoly<C64>) -> Self {
        Self::from_parts(C64::new(0.0, 0.0), vec![Term { freq, envelope }])
    }

    /// Normalize arbitrary parts.
    pub fn from_parts(constant: C64, mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| a.freq.total_cmp(&b.freq));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if same_freq(last.freq, t.freq) => {
                    last.envelope = last.envelope.add(&t.envelope);
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.envelope.is_zero());
        let scale = merged.iter().fold(constant.norm(), |m, t| m.max(t.envelope.max_coeff())).max(1.0);
        let constant = if constant.norm() <= CONST_SNAP * scale { C64::new(0.0, 0.0) } else { constant };
        ScalarFn { constant, terms: merged }
    }

    pub fn constant_part(&self) -> C64 {
        self.constant
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.constant == C64::new(0.0, 0.0) && self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().fold(self.constant, |acc, term| acc + C64::from_polar(1.0, term.freq * t) * term.envelope.eval(t))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.constant * c, self.terms.iter().map(|t| Term { freq: t.freq, envelope: t.envelope.scale(c) }).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::from_parts(self.constant + other.constant, terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Exact pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &other.terms {
            if self.constant != C64::new(0.0, 0.0) {
                terms.push(Term { freq: t.freq, envelope: t.envelope.scale(self.constant) });
            }
        }
        for t in &self.terms {
            if other.constant != C64::new(0.0, 0.0) {
                terms.push(Term { freq: t.freq, envelope: t.envelope.scale(other.constant) });
            }
        }
        for a in &self.terms {
            for b in &other.terms {
                let envelope = a.envelope.mul(&b.envelope)?;
                if !envelope.is_zero() {
                    terms.push(Term { freq: a.freq + b.freq, envelope });
                }
            }
        }
        Ok(Self::from_parts(self.constant * other.constant, terms))
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(self.constant.conj(), self.terms.iter().map(|t| Term { freq: -t.freq, envelope: t.envelope.conj() }).collect())
    }

    /// Multiply by `e^{ixt}`. A zero shift is the identity; otherwise a nonzero
    /// constant part is rejected.
    pub fn modulate(&self, x: f64) -> Result<Self> {
        if x == 0.0 {
            return Ok(self.clone());
        }
        if self.constant != C64::new(0.0, 0.0) {
            return Err(Error::UnsupportedModulation);
        }
        Ok(Self::from_parts(self.constant, self.terms.iter().map(|t| Term { freq: t.freq + x, envelope: t.envelope.clone() }).collect()))
    }

    /// Hull of all envelope supports.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.terms.iter().filter_map(|t| t.envelope.support()).reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    /// All envelope breakpoints, merged.
    pub fn breakpoints(&self) -> Vec<f64> {
        super::poly::merge_breakpoints(self.terms.iter().map(|t| t.envelope.breakpoints()))
    }

    /// Normal-form equality within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let c_ok = (self.constant - other.constant).norm() <= tol * (1.0f64).max(self.constant.norm());
        c_ok && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|(a, b)| (a.freq - b.freq).abs() <= tol * (1.0f64).max(a.freq.abs()) && a.envelope.approx_eq(&b.envelope, tol))
    }

    /// Canonical scale: the constant part if nonzero, else the first
    /// non-negligible coefficient of the lowest-frequency envelope.
    pub fn leading(&self) -> Option<C64> {
        if self.constant != C64::new(0.0, 0.0) {
            return Some(self.constant);
        }
        self.terms.first().and_then(|t| t.envelope.leading())
    }

    /// Split off the canonical scale: `self = scale * unit` with `unit.leading() == 1`.
    pub fn split_scale(&self) -> Option<(C64, ScalarFn)> {
        let c = self.leading()?;
        Some((c, self.scale(c.inv())))
    }

    pub fn is_real_valued(&self) -> bool {
        self.approx_eq(&self.conj(), 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnalg::make_bump;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_is_neutral() {
        let f = make_bump(2).unwrap().modulate(0.3).unwrap();
        assert!(f.mul(&ScalarFn::one()).unwrap().approx_eq(&f, 1e-12));
    }

    #[test]
    fn conj_of_imaginary_multiple() {
        let b = make_bump(1).unwrap();
        let f = b.scale(c(0.0, 1.0));
        assert!(f.conj().approx_eq(&b.scale(c(0.0, -1.0)), 1e-12));
    }

    #[test]
    fn conj_of_modulation_flips_frequency() {
        let b = make_bump(1).unwrap();
        assert!(b.modulate(0.8).unwrap().conj().approx_eq(&b.modulate(-0.8).unwrap(), 1e-12));
    }

    #[test]
    fn modulation_of_constant_rejected() {
        let f = ScalarFn::one().add(&make_bump(1).unwrap());
        assert_eq!(f.modulate(1.0), Err(Error::UnsupportedModulation));
        assert!(f.modulate(0.0).unwrap().approx_eq(&f, 0.0));
    }

    #[test]
    fn modulated_plateau_value() {
        let f = make_bump(1).unwrap().modulate(std::f64::consts::PI).unwrap();
        let v = f.eval(0.5);
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn equal_frequencies_merge() {
        let b = make_bump(1).unwrap();
        let f = b.modulate(0.5).unwrap();
        let s = f.add(&f);
        assert_eq!(s.terms().len(), 1);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn product_constants_distribute() {
        let b = make_bump(1).unwrap();
        let f = ScalarFn::constant(c(2.0, 0.0)).add(&b);
        let g = ScalarFn::constant(c(0.0, 1.0)).add(&b.modulate(1.0).unwrap());
        let p = f.mul(&g).unwrap();
        for &t in &[-3.0, -1.5, 0.0, 0.7, 1.9, 4.0] {
            assert!((p.eval(t) - f.eval(t) * g.eval(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn split_scale_roundtrip() {
        let f = make_bump(2).unwrap().scale(c(3.0, -1.0));
        let (s, u) = f.split_scale().unwrap();
        assert!((s - c(3.0, -1.0)).norm() < 1e-14);
        assert!(u.approx_eq(&make_bump(2).unwrap(), 1e-12));
    }

    #[test]
    fn json_roundtrip() {
        let f = make_bump(2).unwrap().modulate(0.25).unwrap().add(&ScalarFn::constant(c(0.5, 0.0)));
        let s = serde_json::to_string(&f).unwrap();
        let g: ScalarFn = serde_json::from_str(&s).unwrap();
        assert!(g.approx_eq(&f, 0.0));
    }

    #[test]
    fn json_rejects_invalid() {
        let bad = r#"{"constant":[0,0],"terms":[{"freq":0,"envelope":{"breakpoints":[1,0],"pieces":[[[1,0]]]}}]}"#;
        assert!(serde_json::from_str::<ScalarFn>(bad).is_err());
    }
}
