//! The five subcommands. Each returns `(pass, summary, artifacts)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use itp_core::bm::{self, DecomposeCfg};
use itp_core::chars::{
    char_eval_with, char_sup_lower, psd_check, state_eval, tail_product, CharEvalCfg, Character, CosineNonState, PdCandidate, PointSeq,
    ProductState, TailRule, TailVerdict,
};
use itp_core::fnalg::make_bump;
use itp_core::infprod::{ProductStatus, CONVERGENCE_TOL};
use itp_core::measures::QuadratureCfg;
use itp_core::rep::{excess_power, excess_semigroup_check, Engine, Rep, RepValue, VecElem};
use itp_core::tensor::{adjoint, cross_norm_upper, mul, regroup_check, FinSeq, StabSeq, TensorElem};
use itp_core::C64;
use rand::Rng;

use crate::config::{Candidate, RunConfig, StabSpec};
use crate::gen;
use crate::output::{num, point_label, re_im, Artifact, Table};
use crate::CliError;

pub type Ran = (bool, Vec<String>, Vec<Artifact>);

/// Coefficient tolerance for the exact algebra laws.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Gram matrices of states may dip below zero by rounding only.
pub const PSD_TOL: f64 = 1e-8;
pub const SEMIGROUP_TOL: f64 = 1e-6;
const ORDER_SLACK: f64 = 1e-12;

fn quad(cfg: &RunConfig) -> Result<QuadratureCfg, CliError> {
    let q = QuadratureCfg::with_tol(cfg.tol);
    q.validate()?;
    Ok(q)
}

fn state(cfg: &RunConfig) -> ProductState {
    ProductState::new(cfg.measure.clone())
}

pub fn stab(cfg: &RunConfig, s: &ProductState) -> Result<Arc<StabSeq>, CliError> {
    Ok(match &cfg.stab {
        StabSpec::Auto => bm::choose_f(s, cfg.depth)?,
        StabSpec::Periodic { prefix, cycle } => Arc::new(StabSeq::periodic("f", prefix.clone(), cycle.clone())?),
    })
}

/// Explicit points followed by the seeded random ones.
pub fn points(cfg: &RunConfig) -> Vec<FinSeq> {
    let mut rng = gen::rng(cfg.seed);
    let p = &cfg.points;
    let mut out = p.explicit.clone();
    out.extend((0..p.random).map(|_| gen::point(&mut rng, p.max_slot, p.scale)));
    out
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn status(s: ProductStatus) -> &'static str {
    match s {
        ProductStatus::Certified => "certified",
        ProductStatus::Zero => "zero",
        ProductStatus::Converged => "converged",
        ProductStatus::Undetermined => "undetermined",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// `bump(n) * bump(m) == bump(n)` for random `n < m <= 20`.
pub fn bump_semigroup(seed: u64, trials: usize) -> Result<CheckRow, CliError> {
    let mut rng = gen::rng(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let n = rng.gen_range(1..20);
        let m = rng.gen_range(n + 1..=20);
        let prod = make_bump(n)?.mul(&make_bump(m)?)?;
        failures += usize::from(!prod.approx_eq(&make_bump(n)?, ALGEBRA_TOL));
    }
    Ok(CheckRow { name: "bump-semigroup", trials, failures, tolerance: ALGEBRA_TOL })
}

/// Commutativity, associativity, involution, grading and regrouping on random elements.
pub fn algebra_laws(seed: u64, trials: usize) -> Result<Vec<CheckRow>, CliError> {
    let mut rng = gen::rng(seed);
    let names = ["commutative", "associative", "adjoint-multiplicative", "adjoint-involutive", "grading", "regroup"];
    let mut failures = [0usize; 6];
    for _ in 0..trials {
        let (a, b, c) = (gen::mixed(&mut rng), gen::mixed(&mut rng), gen::mixed(&mut rng));
        let ab = mul(&a, &b)?;
        failures[0] += usize::from(!ab.approx_eq(&mul(&b, &a)?, ALGEBRA_TOL));
        failures[1] += usize::from(!mul(&ab, &c)?.approx_eq(&mul(&a, &mul(&b, &c)?)?, ALGEBRA_TOL));
        failures[2] += usize::from(!adjoint(&ab).approx_eq(&mul(&adjoint(&b), &adjoint(&a))?, ALGEBRA_TOL));
        failures[3] += usize::from(!adjoint(&adjoint(&a)).approx_eq(&a, ALGEBRA_TOL));

        let (k, l) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (x, y) = (gen::homogeneous(&mut rng, k), gen::homogeneous(&mut rng, l));
        let graded = mul(&x, &y)?.terms().iter().all(|t| t.tail().as_power().map(|(_, e)| e) == Some(k + l));
        failures[4] += usize::from(!graded);

        let m = rng.gen_range(1..=6);
        failures[5] += usize::from(!regroup_check(&a, &b, m)?);
    }
    Ok(names.into_iter().zip(failures).map(|(name, failures)| CheckRow { name, trials, failures, tolerance: ALGEBRA_TOL }).collect())
}

pub fn algebra_check(cfg: &RunConfig) -> Result<Ran, CliError> {
    let mut rows = vec![bump_semigroup(cfg.seed, cfg.trials)?];
    rows.extend(algebra_laws(cfg.seed.wrapping_add(1), cfg.trials)?);
    let mut t = Table::new(&["check", "trials", "failures", "tolerance", "pass"]);
    let mut summary = Vec::new();
    for r in &rows {
        t.push(vec![r.name.into(), r.trials.to_string(), r.failures.to_string(), num(r.tolerance), r.pass().to_string()]);
        summary.push(format!("{}: {} ({} of {} failed)", r.name, verdict(r.pass()), r.failures, r.trials));
    }
    Ok((rows.iter().all(CheckRow::pass), summary, vec![t.into_artifact("algebra.csv")]))
}

fn gram_artifact(name: &str, n: usize, min_eig: f64) -> (bool, Artifact) {
    let pass = min_eig >= -PSD_TOL;
    let mut t = Table::new(&["candidate", "points", "min_eigenvalue", "tolerance", "pass"]);
    t.push(vec![name.into(), n.to_string(), num(min_eig), num(PSD_TOL), pass.to_string()]);
    (pass, t.into_artifact("gram.csv"))
}

pub fn bochner(cfg: &RunConfig) -> Result<Ran, CliError> {
    let pts = points(cfg);
    let q = quad(cfg)?;
    let mut summary = Vec::new();
    match cfg.candidate {
        Candidate::State => {
            let s = state(cfg);
            let rows = bm::mc_verify(&s, &pts, cfg.samples, cfg.seed, &q)?;
            let mut t = Table::new(&["point", "state_re", "state_im", "state_err", "mc_re", "mc_im", "mc_radius", "pass"]);
            for (x, r) in pts.iter().zip(&rows) {
                let err = state_eval(&s, x, &q)?.err;
                let [sr, si] = re_im(r.closed);
                let [mr, mi] = re_im(r.estimate);
                t.push(vec![point_label(x), sr, si, num(err), mr, mi, num(r.radius), r.pass.to_string()]);
            }
            let mc_pass = rows.iter().all(|r| r.pass);
            summary.push(format!("monte carlo vs closed form: {} ({} points)", verdict(mc_pass), rows.len()));

            let mut cf = Table::new(&["slot", "x", "re", "im", "err"]);
            let coords: BTreeSet<(usize, u64)> = pts.iter().flat_map(|x| x.iter().map(|(&n, &v)| (n, v.to_bits()))).collect();
            for (n, bits) in coords {
                let x = f64::from_bits(bits);
                let e = s.measure.at(n).char_fn(x, &q)?;
                let [re, im] = re_im(e.value);
                cf.push(vec![n.to_string(), x.to_string(), re, im, num(e.err)]);
            }

            let (gram_pass, gram) = gram_artifact("state", pts.len(), psd_check(&s, &pts)?);
            summary.push(format!("gram matrix positive semidefinite: {}", verdict(gram_pass)));
            Ok((mc_pass && gram_pass, summary, vec![t.into_artifact("bochner.csv"), cf.into_artifact("char_fn.csv"), gram]))
        }
        Candidate::CosineNonState => {
            let mut t = Table::new(&["point", "value_re", "value_im", "radius"]);
            for x in &pts {
                let [re, im] = re_im(CosineNonState.value(x)?);
                t.push(vec![point_label(x), re, im, num(0.0)]);
            }
            let (gram_pass, gram) = gram_artifact("cosine-non-state", pts.len(), psd_check(&CosineNonState, &pts)?);
            summary.push(format!("gram matrix positive semidefinite: {}", verdict(gram_pass)));
            Ok((gram_pass, summary, vec![t.into_artifact("bochner.csv"), gram]))
        }
    }
}

fn rep_row(t: &mut Table, rep: &str, l: u32, v: &RepValue) {
    let [re, im] = re_im(v.value.estimate);
    t.push(vec![rep.into(), l.to_string(), re, im, num(v.value.radius), status(v.status).into()]);
}

fn char_rep(cfg: &RunConfig, f: &Arc<StabSeq>) -> Result<Option<Rep>, CliError> {
    let Some(spec) = &cfg.character else { return Ok(None) };
    let character = spec.build(f.clone())?;
    Ok(Some(Rep::Character { character, cfg: CharEvalCfg { depth: cfg.depth, tol: CONVERGENCE_TOL } }))
}

pub fn excess(cfg: &RunConfig) -> Result<Ran, CliError> {
    let s = state(cfg);
    let q = quad(cfg)?;
    let f = stab(cfg, &s)?;
    let engine = Engine::new(cfg.measure.clone(), q, cfg.depth)?;
    let omega = VecElem::omega(cfg.measure.clone());
    let mut summary = Vec::new();

    let mut ft = Table::new(&["k", "l", "partial", "limit_lower", "limit_upper", "status", "value_re", "value_im", "value_radius"]);
    let (mut bounded, mut monotone_n, mut monotone_k) = (true, true, true);
    for l in 1..=cfg.max_power {
        let mut prev: Option<RepValue> = None;
        for k in 1..=cfg.k_max {
            let sweep = engine.f_sweep(k, l, &f)?;
            let v = engine.f_elem(k, l, &f, &omega, &omega)?;
            monotone_n &= sweep.partials.windows(2).all(|w| w[1] <= w[0] + ORDER_SLACK);
            bounded &= sweep.partials.iter().all(|p| (-ORDER_SLACK..=1.0 + ORDER_SLACK).contains(p));
            if let Some(p) = prev {
                let slack = p.value.radius + v.value.radius + ORDER_SLACK;
                monotone_k &= v.value.estimate.re >= p.value.estimate.re - slack;
            }
            prev = Some(v);
            let [re, im] = re_im(v.value.estimate);
            ft.push(vec![
                k.to_string(),
                l.to_string(),
                num(sweep.last_partial()),
                num(sweep.limit.lower),
                num(sweep.limit.upper),
                status(sweep.status).into(),
                re,
                im,
                num(v.value.radius),
            ]);
        }
    }
    summary.push(format!("F partials in [0, 1]: {}", verdict(bounded)));
    summary.push(format!("F nonincreasing in N: {}", verdict(monotone_n)));
    summary.push(format!("F nondecreasing in k: {}", verdict(monotone_k)));

    let p = engine.p_elem(&f, &omega, &omega, cfg.k_max)?;
    let mut pt = Table::new(&["rep", "l", "re", "im", "radius", "status"]);
    rep_row(&mut pt, "product", 0, &p.value);
    for (l, v) in (1..).zip(&p.per_level) {
        rep_row(&mut pt, "product", l, v);
    }
    summary.push(format!("P independent of l: {}", verdict(p.level_independent)));
    summary.push(format!("P idempotent: {}", verdict(p.idempotent)));

    let mut reps = vec![("product", Rep::Product(Engine::new(cfg.measure.clone(), q, cfg.depth)?))];
    if let Some(r) = char_rep(cfg, &f)? {
        reps.push(("character", r));
    }
    let mut qt = Table::new(&["rep", "l", "re", "im", "radius", "status"]);
    let mut st = Table::new(&["rep", "residual", "slack", "tolerance", "pass"]);
    let mut semigroup = true;
    for (name, rep) in &reps {
        for l in 1..=cfg.max_power {
            rep_row(&mut qt, name, l, &excess_power(&f, l, rep, &omega, &omega)?);
        }
        let chk = excess_semigroup_check(&f, &f, rep, &omega, &omega)?;
        let ok = chk.holds(SEMIGROUP_TOL);
        semigroup &= ok;
        st.push(vec![(*name).into(), num(chk.residual), num(chk.slack), num(SEMIGROUP_TOL), ok.to_string()]);
    }
    summary.push(format!("Q semigroup law: {}", verdict(semigroup)));

    let pass = bounded && monotone_n && monotone_k && p.level_independent && p.idempotent && semigroup;
    Ok((
        pass,
        summary,
        vec![ft.into_artifact("f_sweep.csv"), pt.into_artifact("p.csv"), qt.into_artifact("q.csv"), st.into_artifact("semigroup.csv")],
    ))
}

const TAIL_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 'k'
set ylabel 'residual'
set logscale y
plot 'tail.csv' using 1:2 with linespoints title 'r_k', \\
     'tail.csv' using 1:4 with lines title '1/(k-1)', \\
     'tail.csv' using 1:5 with lines title '1/(k-1) - 1/(N+1)'
";

pub fn decompose_cfg(cfg: &RunConfig) -> Result<DecomposeCfg, CliError> {
    Ok(DecomposeCfg {
        depth: cfg.depth,
        tail_n: cfg.tail_n,
        points: points(cfg),
        samples: cfg.samples,
        char_samples: cfg.char_samples,
        seed: cfg.seed,
        quad: quad(cfg)?,
        ..DecomposeCfg::default()
    })
}

pub fn decompose(cfg: &RunConfig) -> Result<Ran, CliError> {
    let s = state(cfg);
    let dcfg = decompose_cfg(cfg)?;
    let report = match &cfg.stab {
        StabSpec::Auto => bm::decompose(&s, &dcfg),
        StabSpec::Periodic { .. } => bm::decompose_with(&s, &dcfg, Some(stab(cfg, &s)?)),
    };
    let mut summary = Vec::new();
    if let Some(e) = &report.selection_error {
        summary.push(format!("level selection: FAIL ({e})"));
    }

    let mut dt = Table::new(&["n", "level", "deficit", "budget"]);
    if let Some(d) = &report.deficits {
        for (i, (k, x)) in d.levels.iter().zip(&d.deficits).enumerate() {
            let n = i + 1;
            dt.push(vec![n.to_string(), k.to_string(), num(*x), num((n as f64).powi(-4))]);
        }
        summary.push(format!("deficit partial sum {} <= {}: {}", num(d.partial_sum), num(d.bound), verdict(d.pass)));
    }

    let mut tt = Table::new(&["k", "residual", "err", "bound", "sharp_bound", "tolerance", "pass"]);
    for r in &report.tail.rows {
        tt.push(vec![r.k.to_string(), num(r.residual), num(r.err), num(r.bound), num(r.sharp_bound), num(r.tolerance), r.pass.to_string()]);
    }
    summary.push(format!("tail residuals: {}", verdict(report.tail.pass)));

    let mut mt = Table::new(&["point", "closed_re", "closed_im", "mc_re", "mc_im", "radius", "pass"]);
    for (x, r) in dcfg.points.iter().zip(&report.mc.rows) {
        let [cr, ci] = re_im(r.closed);
        let [mr, mi] = re_im(r.estimate);
        mt.push(vec![point_label(x), cr, ci, mr, mi, num(r.radius), r.pass.to_string()]);
    }
    summary.push(format!("monte carlo: {} ({} points)", verdict(report.mc.pass), report.mc.rows.len()));

    let mut pt = Table::new(&["probe", "expected_re", "expected_im", "expected_radius", "estimate_re", "estimate_im", "radius", "pass"]);
    for r in &report.pushforward.rows {
        let [er, ei] = re_im(r.expected.estimate);
        let [mr, mi] = re_im(r.estimate);
        pt.push(vec![r.label.clone(), er, ei, num(r.expected.radius), mr, mi, num(r.radius), r.pass.to_string()]);
    }
    summary.push(format!("pushforward: {}", verdict(report.pushforward.pass)));
    for (stage, err) in [("tail", &report.tail.error), ("monte carlo", &report.mc.error), ("pushforward", &report.pushforward.error)] {
        if let Some(e) = err {
            summary.push(format!("{stage} error: {e}"));
        }
    }

    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(format!("report serialization: {e}")))? + "\n";
    let artifacts = vec![
        Artifact { name: "report.json".into(), body: json },
        dt.into_artifact("deficits.csv"),
        tt.into_artifact("tail.csv"),
        mt.into_artifact("mc.csv"),
        pt.into_artifact("pushforward.csv"),
        Artifact { name: "tail.gp".into(), body: TAIL_PLOT.into() },
    ];
    Ok((report.pass, summary, artifacts))
}

/// Name, `(exponent, coefficient)` pairs and the scalar polynomial.
type TailPoly = (&'static str, Vec<(u32, f64)>, fn(f64) -> f64);

/// `sum_i c_i F^i` as a tail polynomial over `f`.
fn tail_poly(f: &Arc<StabSeq>, coeffs: &[(u32, f64)]) -> TensorElem {
    coeffs.iter().fold(TensorElem::zero(), |acc, &(l, c)| acc.add(&TensorElem::pure(f, l).scale(C64::new(c, 0.0))))
}

pub fn spectrum(cfg: &RunConfig) -> Result<Ran, CliError> {
    let s = state(cfg);
    let f = stab(cfg, &s)?;
    let point = match &cfg.character {
        Some(spec) => spec.point()?,
        None => PointSeq::origin(),
    };
    let ccfg = CharEvalCfg { depth: cfg.depth, tol: CONVERGENCE_TOL };
    let grid: Vec<f64> = (1..=cfg.q_grid).map(|i| i as f64 / cfg.q_grid as f64).collect();
    let chars = grid.iter().map(|&q| Character::new(point.clone(), q, f.clone())).collect::<Result<Vec<_>, _>>()?;
    let mut summary = Vec::new();

    let mut ct = Table::new(&["q", "l", "re", "im", "radius", "exact", "degenerate"]);
    for (q, ch) in grid.iter().zip(&chars) {
        for l in 1..=cfg.max_power {
            let v = char_eval_with(ch, &TensorElem::pure(&f, l), &ccfg)?;
            let [re, im] = re_im(v.value);
            ct.push(vec![num(*q), l.to_string(), re, im, num(v.radius), v.exact.to_string(), v.degenerate.to_string()]);
        }
    }

    let mut rules: Vec<(String, PointSeq)> = vec![
        ("origin".into(), PointSeq::origin()),
        ("in-plateau 0.5".into(), PointSeq::new(FinSeq::new(), TailRule::InPlateau { theta: 0.5 })?),
        ("level-offset 0.5".into(), PointSeq::new(FinSeq::new(), TailRule::LevelOffset { delta: 0.5 })?),
        ("level-offset 1.5".into(), PointSeq::new(FinSeq::new(), TailRule::LevelOffset { delta: 1.5 })?),
    ];
    if cfg.character.is_some() {
        rules.push(("configured".into(), point.clone()));
    }
    let mut nt = Table::new(&["point", "verdict", "value", "lower", "upper", "deficit_sum"]);
    for (name, x) in &rules {
        let row = match tail_product(x, &f, 1, 1, cfg.depth, CONVERGENCE_TOL) {
            TailVerdict::Limit { value, bracket, .. } => {
                ["limit".into(), num(value), num(bracket.lower), num(bracket.upper), String::new()]
            }
            TailVerdict::InNf { deficit_sum } => ["in-nf".into(), num(0.0), num(0.0), num(0.0), num(deficit_sum)],
            TailVerdict::Undetermined { partial, deficit_sum } => {
                ["undetermined".into(), num(partial), num(0.0), num(partial), num(deficit_sum)]
            }
        };
        let mut cells = vec![name.clone()];
        cells.extend(row);
        nt.push(cells);
    }

    // p(t) = t, t - t^2 and t^2 - t^3 evaluated on the grid
    let polys: [TailPoly; 3] = [
        ("F", vec![(1, 1.0)], |t| t),
        ("F-F^2", vec![(1, 1.0), (2, -1.0)], |t| t - t * t),
        ("F^2-F^3", vec![(2, 1.0), (3, -1.0)], |t| t * t - t * t * t),
    ];
    let mut nst = Table::new(&["element", "char_sup_lower", "cross_norm_upper", "grid_sup", "pass"]);
    let mut sandwich = true;
    for (name, coeffs, p) in &polys {
        let a = tail_poly(&f, coeffs);
        let lower = char_sup_lower(&a, &chars)?;
        let upper = cross_norm_upper(&a);
        let grid_sup = grid.iter().map(|&t| p(t).abs()).fold(0.0, f64::max);
        let ok = lower <= upper + ORDER_SLACK;
        sandwich &= ok;
        nst.push(vec![(*name).into(), num(lower), num(upper), num(grid_sup), ok.to_string()]);
    }
    summary.push(format!("norm sandwich: {}", verdict(sandwich)));
    summary.push(format!("{} characters on the q grid, {} point rules", chars.len(), rules.len()));
    Ok((sandwich, summary, vec![ct.into_artifact("spectrum.csv"), nt.into_artifact("nf.csv"), nst.into_artifact("sandwich.csv")]))
}
