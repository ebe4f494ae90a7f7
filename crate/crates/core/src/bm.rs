//! Decomposition of product states into characters: level selection, the tail
//! condition, and Monte Carlo checks of the characteristic functional.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chars::{char_eval_with, state_eval, CharEvalCfg, Character, PointSeq, ProductState, TailRule};
use crate::error::{Error, Result};
use crate::fnalg::{bump_power, ScalarFn};
use crate::infprod::{CBracket, MeasureTails};
use crate::measures::{draw, Budget, QuadratureCfg};
use crate::rep::{DiagOp, Engine, VecElem};
use crate::tensor::{cross_norm_upper, ElemTensor, FinSeq, StabSeq, Tail, TensorElem};
use crate::C64;

pub const SCHEMA: &str = "itp-report/1";
/// Exponent of the deficit budget `n^-4`.
pub const BUDGET_POWER: f64 = 4.0;
/// Monte Carlo radius is `MC_RADIUS_SCALE / sqrt(M)` for integrands bounded by 1.
pub const MC_RADIUS_SCALE: f64 = 4.0;
const MC_CHUNK: usize = 4096;
/// Slack for comparisons against analytic bounds.
pub const BOUND_TOL: f64 = 1e-8;

/// `k_n` = least level with plateau deficit at most `n^-4`.
pub fn choose_f(s: &ProductState, depth: usize) -> Result<Arc<StabSeq>> {
    let budget = Budget::inverse_power(BUDGET_POWER)?;
    Ok(Arc::new(StabSeq::selected("f", s.measure.clone(), budget, depth.max(1))?))
}

/// Plateau deficits `1 - mu_n([-k_n, k_n])` for `n = 1..=depth`.
pub fn deficits(f: &StabSeq, s: &ProductState, depth: usize) -> Vec<f64> {
    (1..=depth).map(|n| 1.0 - s.measure.at(n).plateau_mass(f.level(n) as f64)).collect()
}

/// `sum_{n <= N} n^-4`.
pub fn budget_partial_sum(depth: usize) -> f64 {
    (1..=depth).map(|n| (n as f64).powf(-BUDGET_POWER)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: usize,
    /// `1 - prod_{j=k}^N int f_j dmu_j`
    pub residual: f64,
    pub err: f64,
    /// `1/(k-1)`
    pub bound: f64,
    /// `1/(k-1) - 1/(N+1)`
    pub sharp_bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residuals `r_k` against the `1/(k-1)` envelope for each `k >= 2` in `ks`.
pub fn verify_tail(
    f: &Arc<StabSeq>,
    s: &ProductState,
    ks: impl IntoIterator<Item = usize>,
    big_n: usize,
    cfg: &QuadratureCfg,
) -> Result<Vec<TailRow>> {
    let tails = MeasureTails::new(s.measure.clone(), *cfg);
    let tail = Tail::power(f, 1);
    ks.into_iter()
        .map(|k| {
            if k < 2 {
                return Err(Error::InvalidArgument("tail residuals need k >= 2".into()));
            }
            let (mut p, mut err) = (1.0, 0.0);
            for j in k..=big_n {
                let e = tails.factor(j, tail.slot(j))?;
                p *= e.value.re;
                err += e.err;
            }
            let bound = 1.0 / (k as f64 - 1.0);
            let residual = 1.0 - p;
            Ok(TailRow {
                k,
                residual,
                err,
                bound,
                sharp_bound: bound - 1.0 / (big_n as f64 + 1.0),
                tolerance: BOUND_TOL,
                pass: residual <= bound + BOUND_TOL + err,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub closed: C64,
    pub estimate: C64,
    pub radius: f64,
    pub pass: bool,
}

/// `(1/M) sum_i e^{i <x, Y_i>}` with the sample stream of [`crate::measures::sample`].
pub fn mc_mean(s: &ProductState, x: &FinSeq, samples: usize, seed: u64) -> C64 {
    if samples == 0 {
        return C64::new(0.0, 0.0);
    }
    let coords: Vec<(usize, f64)> = x.iter().filter(|(_, &v)| v != 0.0).map(|(&n, &v)| (n, v)).collect();
    if coords.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let chunks: Vec<C64> = (0..samples.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            (c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples))
                .map(|i| {
                    let phase: f64 = coords.iter().map(|&(n, xn)| xn * draw(s.measure.at(n), seed, n, i)).sum();
                    C64::new(phase.cos(), phase.sin())
                })
                .sum()
        })
        .collect();
    chunks.into_iter().sum::<C64>() / samples as f64
}

/// Closed form against Monte Carlo for each point, radius `4/sqrt(M)`.
pub fn mc_verify(s: &ProductState, points: &[FinSeq], samples: usize, seed: u64, cfg: &QuadratureCfg) -> Result<Vec<McRow>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let radius = MC_RADIUS_SCALE / (samples as f64).sqrt();
    points
        .iter()
        .map(|x| {
            let closed = state_eval(s, x, cfg)?;
            let estimate = mc_mean(s, x, samples, seed);
            let pass = (closed.value - estimate).norm() <= radius + closed.err;
            Ok(McRow { closed: closed.value, estimate, radius, pass })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardRow {
    pub label: String,
    /// `<Omega, pi(A) Omega>`
    pub expected: CBracket,
    /// Mean of `gamma(y, 1)(A)` over sampled `y`.
    pub estimate: C64,
    pub radius: f64,
    pub pass: bool,
}

/// Probe elements over `f`: deviations in the first slots, tail `f`.
pub fn probe_elements(f: &Arc<StabSeq>) -> Result<Vec<(String, TensorElem)>> {
    let tail = Tail::power(f, 1);
    let b1 = bump_power(1, 1)?;
    let b2 = bump_power(2, 2)?;
    let wave = b1.modulate(1.0)?;
    let mut out = vec![("pure-tail".to_string(), TensorElem::pure(f, 1))];
    out.push(("bump1-slot1".into(), TensorElem::single(ElemTensor::new(C64::new(1.0, 0.0), tail.clone(), BTreeMap::from([(1, b1)])))));
    out.push((
        "wave-slot1-bump2-slot2".into(),
        TensorElem::single(ElemTensor::new(C64::new(0.5, 0.5), tail, BTreeMap::from([(1, wave), (2, b2)]))),
    ));
    Ok(out)
}

fn pushforward(s: &ProductState, f: &Arc<StabSeq>, cfg: &DecomposeCfg) -> Result<Vec<PushforwardRow>> {
    let engine = Engine::new(s.measure.clone(), cfg.quad, cfg.depth)?;
    let omega = VecElem::omega(s.measure.clone());
    let char_cfg = CharEvalCfg { depth: cfg.depth, ..CharEvalCfg::default() };
    let chars = (0..cfg.char_samples)
        .map(|i| {
            let point =
                PointSeq::new(BTreeMap::new(), TailRule::Sampled { measure: s.measure.clone(), seed: cfg.seed.wrapping_add(i as u64) })?;
            Character::new(point, 1.0, f.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let m = chars.len().max(1) as f64;
    probe_elements(f)?
        .into_iter()
        .map(|(label, a)| {
            let mut expected = CBracket::exact(C64::new(0.0, 0.0));
            for t in a.terms() {
                let v = engine.inner_op(&omega, &DiagOp::from_elem(t), &omega)?;
                expected = CBracket { estimate: expected.estimate + v.value.estimate, radius: expected.radius + v.value.radius };
            }
            let values = chars.par_iter().map(|c| char_eval_with(c, &a, &char_cfg)).collect::<Result<Vec<_>>>()?;
            let estimate = values.iter().map(|v| v.value).sum::<C64>() / m;
            let eval_radius = values.iter().map(|v| v.radius).sum::<f64>() / m;
            let radius = MC_RADIUS_SCALE * cross_norm_upper(&a) / m.sqrt() + eval_radius;
            let pass = (estimate - expected.estimate).norm() <= radius + expected.radius;
            Ok(PushforwardRow { label, expected, estimate, radius, pass })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeCfg {
    /// Truncation depth for level selection and tail products.
    pub depth: usize,
    /// `N` in the tail residuals.
    pub tail_n: usize,
    pub ks: Vec<usize>,
    pub points: Vec<FinSeq>,
    pub samples: usize,
    pub char_samples: usize,
    pub seed: u64,
    pub quad: QuadratureCfg,
}

impl Default for DecomposeCfg {
    fn default() -> Self {
        DecomposeCfg {
            depth: 64,
            tail_n: 200,
            ks: (2..=10).collect(),
            points: Vec::new(),
            samples: 100_000,
            char_samples: 2000,
            seed: 0,
            quad: QuadratureCfg::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage<T> {
    pub rows: Vec<T>,
    pub pass: bool,
    pub error: Option<String>,
}

impl<T> Stage<T> {
    fn from_result(r: Result<Vec<T>>, ok: impl Fn(&T) -> bool) -> Self {
        match r {
            Ok(rows) => {
                let pass = rows.iter().all(ok);
                Stage { rows, pass, error: None }
            }
            Err(e) => Stage { rows: Vec::new(), pass: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitStage {
    pub levels: Vec<u32>,
    pub deficits: Vec<f64>,
    pub partial_sum: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub schema: String,
    pub state: ProductState,
    pub config: DecomposeCfg,
    pub stab: Option<StabSeq>,
    pub selection_error: Option<String>,
    pub deficits: Option<DeficitStage>,
    pub tail: Stage<TailRow>,
    pub mc: Stage<McRow>,
    pub pushforward: Stage<PushforwardRow>,
    pub pass: bool,
}

fn no_stab<T>(e: &Error) -> Result<Vec<T>> {
    Err(Error::InvalidArgument(format!("no stabilizing sequence: {e}")))
}

fn deficit_stage(f: &StabSeq, s: &ProductState, depth: usize) -> Result<DeficitStage> {
    let levels = f.levels_checked(depth)?;
    let deficits = deficits(f, s, depth);
    let partial_sum: f64 = deficits.iter().sum();
    let bound = budget_partial_sum(depth);
    Ok(DeficitStage { pass: partial_sum <= bound + BOUND_TOL, levels, deficits, partial_sum, bound })
}

/// Runs selection, the tail condition, Monte Carlo and the pushforward check.
/// `f` overrides the selected sequence.
pub fn decompose_with(s: &ProductState, cfg: &DecomposeCfg, f: Option<Arc<StabSeq>>) -> DecompositionReport {
    let selected = match f {
        Some(f) => Ok(f),
        None => choose_f(s, cfg.depth.max(cfg.tail_n)),
    };
    let (stab, selection_error) = match &selected {
        Ok(f) => (Some(f.as_ref().clone()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let deficits = selected.as_ref().ok().and_then(|f| deficit_stage(f, s, cfg.depth).ok());
    let tail = Stage::from_result(
        selected.as_ref().map_or_else(no_stab, |f| verify_tail(f, s, cfg.ks.iter().copied(), cfg.tail_n, &cfg.quad)),
        |r| r.pass,
    );
    let mc = Stage::from_result(mc_verify(s, &cfg.points, cfg.samples, cfg.seed, &cfg.quad), |r| r.pass);
    let pushforward = Stage::from_result(selected.as_ref().map_or_else(no_stab, |f| pushforward(s, f, cfg)), |r| r.pass);
    let pass = selection_error.is_none() && deficits.as_ref().is_some_and(|d| d.pass) && tail.pass && mc.pass && pushforward.pass;
    DecompositionReport {
        schema: SCHEMA.into(),
        state: s.clone(),
        config: cfg.clone(),
        stab,
        selection_error,
        deficits,
        tail,
        mc,
        pushforward,
        pass,
    }
}

pub fn decompose(s: &ProductState, cfg: &DecomposeCfg) -> DecompositionReport {
    decompose_with(s, cfg, None)
}

/// `int |g - 1|^2 dmu` for a slot function, the quantity bounded by the level rule.
pub fn l2_deficit(g: &ScalarFn, s: &ProductState, n: usize, cfg: &QuadratureCfg) -> Result<f64> {
    let d = g.sub(&ScalarFn::one());
    Ok(s.measure.at(n).integrate(&d.conj().mul(&d)?, cfg)?.value.re)
}
