//! Seeded random elements for the property runs.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use itp_core::chars::{Character, PointSeq, TailRule};
use itp_core::fnalg::{bump_power, ScalarFn};
use itp_core::tensor::{ElemTensor, FinSeq, StabSeq, Tail, TensorElem};
use itp_core::C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Periodic sequence with levels 1, 2 then 2, 3 repeating.
pub fn base_f() -> Arc<StabSeq> {
    static F: OnceLock<Arc<StabSeq>> = OnceLock::new();
    F.get_or_init(|| Arc::new(StabSeq::periodic("g", vec![1, 2], vec![2, 3]).expect("valid levels"))).clone()
}

pub fn coeff<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

/// A modulated, rescaled bump power.
pub fn compact_fn<R: Rng>(rng: &mut R) -> ScalarFn {
    let level = rng.gen_range(1..=3);
    let power = rng.gen_range(1..=2);
    let x = rng.gen_range(-2.0..2.0);
    let mut s = coeff(rng) * 0.75;
    if s.norm() < 0.1 {
        s = C64::new(1.0, 0.0);
    }
    bump_power(level, power).and_then(|b| b.modulate(x)).expect("bump powers modulate").scale(s)
}

/// Elementary tensor over `base_f()^exponent` with up to 3 deviations in slots 1..=5.
pub fn elem<R: Rng>(rng: &mut R, exponent: u32) -> ElemTensor {
    let n = rng.gen_range(0..=3);
    let devs: BTreeMap<usize, ScalarFn> = (0..n).map(|_| (rng.gen_range(1..=5), compact_fn(rng))).collect();
    ElemTensor::new(coeff(rng), Tail::power(&base_f(), exponent), devs)
}

pub fn homogeneous<R: Rng>(rng: &mut R, exponent: u32) -> TensorElem {
    let n = rng.gen_range(1..=3);
    TensorElem::from_terms((0..n).map(|_| elem(rng, exponent)).collect::<Vec<_>>())
}

/// Terms in the classes of exponent 0, 1 and 2.
pub fn mixed<R: Rng>(rng: &mut R) -> TensorElem {
    let n = rng.gen_range(1..=3);
    TensorElem::from_terms(
        (0..n)
            .map(|_| {
                let e = rng.gen_range(0..=2);
                elem(rng, e)
            })
            .collect::<Vec<_>>(),
    )
}

/// Point with up to 4 slots in `1..=max_slot`, entries uniform in `[-scale, scale]`.
pub fn point<R: Rng>(rng: &mut R, max_slot: usize, scale: f64) -> FinSeq {
    let n = rng.gen_range(1..=4.min(max_slot));
    (0..n).map(|_| (rng.gen_range(1..=max_slot), rng.gen_range(-scale..=scale))).filter(|&(_, v)| v != 0.0).collect()
}

/// Character of `base_f()` at a point inside every plateau.
pub fn plateau_character<R: Rng>(rng: &mut R) -> Character {
    let f = base_f();
    let n = rng.gen_range(0..=4);
    let devs = (0..n)
        .map(|_| {
            let slot = rng.gen_range(1..=6);
            (slot, rng.gen_range(-1.0..1.0) * f.level(slot) as f64)
        })
        .collect();
    let theta = rng.gen_range(-1.0..=1.0);
    let q = rng.gen_range(0.05..=1.0);
    let point = PointSeq::new(devs, TailRule::InPlateau { theta }).expect("plateau points are valid");
    Character::new(point, q, f).expect("q lies in (0, 1]")
}
