//! JSON interchange for tensor elements.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::elem::{ElemTensor, TensorElem};
use super::stab::{StabSeq, Tail};
use crate::error::{Error, Result};
use crate::fnalg::ScalarFn;
use crate::C64;

#[derive(Serialize, Deserialize)]
struct RawFactor {
    seq: StabSeq,
    exponent: u32,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coeff: C64,
    #[serde(default)]
    tail: Vec<RawFactor>,
    #[serde(default)]
    deviations: Vec<(usize, ScalarFn)>,
}

#[derive(Serialize, Deserialize)]
struct RawElem {
    terms: Vec<RawTerm>,
}

impl Serialize for TensorElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .iter()
            .map(|t| RawTerm {
                coeff: t.coeff(),
                tail: t.tail().factors().iter().map(|(f, e)| RawFactor { seq: (**f).clone(), exponent: *e }).collect(),
                deviations: t.deviations().iter().map(|(&n, f)| (n, f.clone())).collect(),
            })
            .collect();
        RawElem { terms }.serialize(s)
    }
}

fn build(raw: RawElem) -> Result<TensorElem> {
    let mut registry: BTreeMap<String, Arc<StabSeq>> = BTreeMap::new();
    let mut terms = Vec::with_capacity(raw.terms.len());
    for rt in raw.terms {
        if !(rt.coeff.re.is_finite() && rt.coeff.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let mut tail = Tail::unit();
        for f in rt.tail {
            if f.exponent == 0 {
                return Err(Error::InvalidArgument("tail exponents start at 1".into()));
            }
            let seq = match registry.get(f.seq.id()) {
                Some(known) if **known != f.seq => return Err(Error::ConflictingStab(f.seq.id().to_string())),
                Some(known) => Arc::clone(known),
                None => {
                    let a = Arc::new(f.seq);
                    registry.insert(a.id().to_string(), Arc::clone(&a));
                    a
                }
            };
            tail = tail.mul(&Tail::power(&seq, f.exponent))?;
        }
        let mut devs = BTreeMap::new();
        for (n, f) in rt.deviations {
            if n == 0 {
                return Err(Error::InvalidArgument("slots are 1-based".into()));
            }
            if devs.insert(n, f).is_some() {
                return Err(Error::InvalidArgument(format!("slot {n} listed twice")));
            }
        }
        terms.push(ElemTensor::new(rt.coeff, tail, devs));
    }
    Ok(TensorElem::from_terms(terms))
}

impl<'de> Deserialize<'de> for TensorElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        build(RawElem::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Parse a tensor element from JSON, reporting structural errors.
pub fn tensor_from_json(s: &str) -> Result<TensorElem> {
    let raw: RawElem = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    build(raw)
}
