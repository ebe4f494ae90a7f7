//! Plain-text run configuration: `[section]` headers and `key = value` lines.
//!
//! ```text
//! [run]
//! subcommand = decompose
//! depth = 64
//! seed = 0
//!
//! [measure]
//! cycle = gaussian(1)
//!
//! [points]
//! x = 1:0.7, 2:-1.3
//! ```
//!
//! `#` starts a comment. Unknown sections and keys are errors, and every
//! diagnostic names the offending line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use itp_core::chars::{Character, PointSeq, TailRule};
use itp_core::fnalg::PiecewisePoly;
use itp_core::measures::{Measure1D, ProductMeasure};
use itp_core::tensor::{FinSeq, StabSeq};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl ConfigError {
    fn new(line: usize, msg: impl Into<String>) -> Self {
        ConfigError { line, msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    AlgebraCheck,
    Bochner,
    Excess,
    Decompose,
    Spectrum,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] =
        [Subcommand::AlgebraCheck, Subcommand::Bochner, Subcommand::Excess, Subcommand::Decompose, Subcommand::Spectrum];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::AlgebraCheck => "algebra-check",
            Subcommand::Bochner => "bochner",
            Subcommand::Excess => "excess",
            Subcommand::Decompose => "decompose",
            Subcommand::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}` (expected one of algebra-check, bochner, excess, decompose, spectrum)"))
    }
}

/// Which stabilizing sequence a run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum StabSpec {
    /// Levels selected from the measure.
    Auto,
    Periodic {
        prefix: Vec<u32>,
        cycle: Vec<u32>,
    },
}

/// The function tested by `bochner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    /// The characteristic functional of the configured product measure.
    State,
    CosineNonState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterSpec {
    pub q: f64,
    pub deviations: FinSeq,
    pub tail: TailRule,
}

impl CharacterSpec {
    pub fn point(&self) -> itp_core::Result<PointSeq> {
        PointSeq::new(self.deviations.clone(), self.tail.clone())
    }

    pub fn build(&self, base: Arc<StabSeq>) -> itp_core::Result<Character> {
        Character::new(self.point()?, self.q, base)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointsSpec {
    pub explicit: Vec<FinSeq>,
    /// Extra points drawn uniformly from `[-scale, scale]` in slots `1..=max_slot`.
    pub random: usize,
    pub scale: f64,
    pub max_slot: usize,
}

impl Default for PointsSpec {
    fn default() -> Self {
        PointsSpec { explicit: Vec::new(), random: 0, scale: 2.0, max_slot: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub measure: ProductMeasure,
    pub stab: StabSpec,
    pub depth: usize,
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub char_samples: usize,
    pub trials: usize,
    pub out: PathBuf,
    pub points: PointsSpec,
    pub character: Option<CharacterSpec>,
    pub candidate: Candidate,
    pub k_max: usize,
    pub max_power: u32,
    pub q_grid: usize,
    pub tail_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: None,
            measure: ProductMeasure::standard_gaussian(),
            stab: StabSpec::Auto,
            depth: 64,
            tol: 1e-10,
            seed: 0,
            samples: 100_000,
            char_samples: 2000,
            trials: 500,
            out: PathBuf::from("out"),
            points: PointsSpec::default(),
            character: None,
            candidate: Candidate::State,
            k_max: 10,
            max_power: 3,
            q_grid: 1000,
            tail_n: 200,
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["subcommand", "depth", "tol", "seed", "samples", "char_samples", "trials", "out"]),
    ("measure", &["prefix", "cycle"]),
    ("stab", &["levels", "prefix", "cycle"]),
    ("points", &["x", "random", "scale", "max_slot"]),
    ("character", &["q", "tail", "theta", "c", "delta", "deviations"]),
    ("bochner", &["candidate"]),
    ("excess", &["k_max", "max_power"]),
    ("spectrum", &["q_grid", "max_power"]),
    ("decompose", &["tail_n"]),
];

/// Keys that may repeat within their section.
const REPEATABLE: &[(&str, &str)] = &[("points", "x")];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn positive<T: FromStr + PartialOrd + Default>(e: &Entry, key: &str) -> Result<T, ConfigError> {
    match e.value.parse::<T>() {
        Ok(v) if v > T::default() => Ok(v),
        _ => Err(ConfigError::new(e.line, format!("`{key}` must be a positive integer, got `{}`", e.value))),
    }
}

fn finite(e: &Entry, key: &str) -> Result<f64, ConfigError> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::new(e.line, format!("`{key}` must be a finite number, got `{}`", e.value))),
    }
}

fn positive_f64(e: &Entry, key: &str) -> Result<f64, ConfigError> {
    match finite(e, key)? {
        v if v > 0.0 => Ok(v),
        _ => Err(ConfigError::new(e.line, format!("`{key}` must be positive, got `{}`", e.value))),
    }
}

/// Splits on commas that are not nested in brackets or braces.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

/// Parses `gaussian(sigma)`, `uniform(a, b)` or `density({...})`; bare `gaussian` means sigma 1.
pub fn parse_measure(spec: &str) -> Result<Measure1D, String> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(open) => {
            let inner = spec[open + 1..].strip_suffix(')').ok_or_else(|| format!("missing `)` in `{spec}`"))?;
            (spec[..open].trim(), Some(inner.trim()))
        }
        None => (spec, None),
    };
    let nums = |args: &str, want: usize| -> Result<Vec<f64>, String> {
        let parts = split_top(args);
        if parts.len() != want {
            return Err(format!("`{name}` takes {want} argument(s), got {}", parts.len()));
        }
        parts.iter().map(|p| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"))).collect()
    };
    let measure = match (name, args) {
        ("gaussian", None) => Measure1D::gaussian(1.0),
        ("gaussian", Some(a)) => Measure1D::gaussian(nums(a, 1)?[0]),
        ("uniform", Some(a)) => {
            let v = nums(a, 2)?;
            Measure1D::uniform(v[0], v[1])
        }
        ("density", Some(a)) => {
            let p: PiecewisePoly<f64> = serde_json::from_str(a).map_err(|e| format!("bad density: {e}"))?;
            Measure1D::density(p)
        }
        _ => return Err(format!("unknown measure `{spec}` (expected gaussian(s), uniform(a, b) or density({{...}}))")),
    };
    measure.map_err(|e| e.to_string())
}

/// Comma-separated list of measure specs; empty input gives an empty list.
pub fn parse_measure_list(s: &str) -> Result<Vec<Measure1D>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(s).into_iter().map(parse_measure).collect()
}

/// `1:0.7, 2:-1.3`; empty input is the origin.
pub fn parse_point(s: &str) -> Result<FinSeq, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (n, v) = part.split_once(':').ok_or_else(|| format!("expected `slot:value`, got `{part}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad slot `{}`", n.trim()))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad value `{}`", v.trim()))?;
        if n == 0 {
            return Err("slots are 1-based".into());
        }
        if !v.is_finite() {
            return Err(format!("non-finite value at slot {n}"));
        }
        if out.insert(n, v).is_some() {
            return Err(format!("slot {n} given twice"));
        }
    }
    Ok(out.into_iter().filter(|&(_, v)| v != 0.0).collect())
}

fn parse_levels(s: &str) -> Result<Vec<u32>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| match p.trim().parse::<u32>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(format!("levels are integers >= 1, got `{}`", p.trim())),
        })
        .collect()
}

fn wrap<T>(e: &Entry, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|m| ConfigError::new(e.line, m))
}

type Sections<'a> = BTreeMap<&'static str, BTreeMap<&'static str, Vec<Entry<'a>>>>;

fn tokenize(text: &str) -> Result<Sections<'_>, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<(&'static str, &'static [&'static str])> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::new(line, "unterminated section header"))?.trim();
            let &(sec, keys) =
                SECTIONS.iter().find(|(s, _)| *s == name).ok_or_else(|| ConfigError::new(line, format!("unknown section [{name}]")))?;
            if sections.contains_key(sec) {
                return Err(ConfigError::new(line, format!("section [{sec}] appears twice")));
            }
            sections.insert(sec, BTreeMap::new());
            current = Some((sec, keys));
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::new(line, "expected `key = value` or `[section]`"))?;
        let (key, value) = (key.trim(), value.trim());
        let (sec, keys) = current.ok_or_else(|| ConfigError::new(line, format!("key `{key}` before any section header")))?;
        let &key = keys.iter().find(|k| **k == key).ok_or_else(|| ConfigError::new(line, format!("unknown key `{key}` in [{sec}]")))?;
        let entries = sections.get_mut(sec).expect("section registered").entry(key).or_default();
        if !entries.is_empty() && !REPEATABLE.contains(&(sec, key)) {
            return Err(ConfigError::new(line, format!("duplicate key `{key}` in [{sec}]")));
        }
        entries.push(Entry { line, value });
    }
    Ok(sections)
}

/// Parses a configuration; omitted keys keep their defaults.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let sections = tokenize(text)?;
    let mut cfg = RunConfig::default();
    let get = |sec: &str, key: &str| sections.get(sec).and_then(|s| s.get(key)).and_then(|v| v.last());

    if let Some(e) = get("run", "subcommand") {
        cfg.subcommand = Some(wrap(e, e.value.parse())?);
    }
    if let Some(e) = get("run", "depth") {
        cfg.depth = positive(e, "depth")?;
    }
    if let Some(e) = get("run", "tol") {
        cfg.tol = positive_f64(e, "tol")?;
    }
    if let Some(e) = get("run", "seed") {
        cfg.seed =
            e.value.parse().map_err(|_| ConfigError::new(e.line, format!("`seed` must be an unsigned integer, got `{}`", e.value)))?;
    }
    if let Some(e) = get("run", "samples") {
        cfg.samples = positive(e, "samples")?;
    }
    if let Some(e) = get("run", "char_samples") {
        cfg.char_samples = positive(e, "char_samples")?;
    }
    if let Some(e) = get("run", "trials") {
        cfg.trials = positive(e, "trials")?;
    }
    if let Some(e) = get("run", "out") {
        if e.value.is_empty() {
            return Err(ConfigError::new(e.line, "`out` cannot be empty"));
        }
        cfg.out = PathBuf::from(e.value);
    }

    if let Some(sec) = sections.get("measure") {
        let prefix = match sec.get("prefix").and_then(|v| v.last()) {
            Some(e) => wrap(e, parse_measure_list(e.value))?,
            None => Vec::new(),
        };
        let line = sec.values().flatten().map(|e| e.line).min().unwrap_or(0);
        let cycle = match sec.get("cycle").and_then(|v| v.last()) {
            Some(e) => wrap(e, parse_measure_list(e.value))?,
            None => return Err(ConfigError::new(line, "[measure] needs a `cycle`")),
        };
        cfg.measure = ProductMeasure::new(prefix, cycle).map_err(|e| ConfigError::new(line, e.to_string()))?;
    }

    if let Some(sec) = sections.get("stab") {
        let levels = sec.get("levels").and_then(|v| v.last());
        let cycle = sec.get("cycle").and_then(|v| v.last());
        let prefix = sec.get("prefix").and_then(|v| v.last());
        cfg.stab = match (levels.map(|e| (e, e.value)), cycle) {
            (Some((_, "auto")) | None, None) => {
                if let Some(p) = prefix {
                    return Err(ConfigError::new(p.line, "`prefix` needs a `cycle`"));
                }
                StabSpec::Auto
            }
            (Some((e, "auto")), Some(_)) => return Err(ConfigError::new(e.line, "`levels = auto` conflicts with `cycle`")),
            (Some((e, other)), _) if other != "periodic" => {
                return Err(ConfigError::new(e.line, format!("`levels` must be `auto` or `periodic`, got `{other}`")))
            }
            (Some((e, _)), None) => return Err(ConfigError::new(e.line, "periodic levels need a `cycle`")),
            (_, Some(c)) => {
                let cycle = wrap(c, parse_levels(c.value))?;
                if cycle.is_empty() {
                    return Err(ConfigError::new(c.line, "`cycle` cannot be empty"));
                }
                let prefix = match prefix {
                    Some(p) => wrap(p, parse_levels(p.value))?,
                    None => Vec::new(),
                };
                StabSpec::Periodic { prefix, cycle }
            }
        };
    }

    if let Some(sec) = sections.get("points") {
        for e in sec.get("x").into_iter().flatten() {
            cfg.points.explicit.push(wrap(e, parse_point(e.value))?);
        }
        if let Some(e) = sec.get("random").and_then(|v| v.last()) {
            cfg.points.random = positive(e, "random")?;
        }
        if let Some(e) = sec.get("scale").and_then(|v| v.last()) {
            cfg.points.scale = positive_f64(e, "scale")?;
        }
        if let Some(e) = sec.get("max_slot").and_then(|v| v.last()) {
            cfg.points.max_slot = positive(e, "max_slot")?;
        }
    }

    if let Some(sec) = sections.get("character") {
        cfg.character = Some(parse_character(sec)?);
    }

    if let Some(e) = get("bochner", "candidate") {
        cfg.candidate = match e.value {
            "state" => Candidate::State,
            "cosine-non-state" => Candidate::CosineNonState,
            other => return Err(ConfigError::new(e.line, format!("unknown candidate `{other}` (expected state or cosine-non-state)"))),
        };
    }
    if let Some(e) = get("excess", "k_max") {
        cfg.k_max = positive(e, "k_max")?;
    }
    for sec in ["excess", "spectrum"] {
        if let Some(e) = get(sec, "max_power") {
            cfg.max_power = positive(e, "max_power")?;
        }
    }
    if let Some(e) = get("spectrum", "q_grid") {
        cfg.q_grid = positive(e, "q_grid")?;
    }
    if let Some(e) = get("decompose", "tail_n") {
        cfg.tail_n = positive(e, "tail_n")?;
    }
    Ok(cfg)
}

fn parse_character(sec: &BTreeMap<&'static str, Vec<Entry>>) -> Result<CharacterSpec, ConfigError> {
    let get = |k: &str| sec.get(k).and_then(|v| v.last());
    let first_line = sec.values().flatten().map(|e| e.line).min().unwrap_or(0);
    let q_entry = get("q").ok_or_else(|| ConfigError::new(first_line, "[character] needs `q`"))?;
    let q = finite(q_entry, "q")?;
    let deviations = match get("deviations") {
        Some(e) => parse_point(e.value).map_err(|m| ConfigError::new(e.line, m))?,
        None => FinSeq::new(),
    };
    let num = |k: &str, default: f64| get(k).map_or(Ok(default), |e| finite(e, k));
    let tail_entry = get("tail");
    let (tail, allowed): (TailRule, &[&str]) = match tail_entry.map_or("in-plateau", |e| e.value) {
        "in-plateau" => (TailRule::InPlateau { theta: num("theta", 0.0)? }, &["theta"]),
        "constant" => (TailRule::Constant { c: num("c", 0.0)? }, &["c"]),
        "level-offset" => (TailRule::LevelOffset { delta: num("delta", 0.0)? }, &["delta"]),
        other => {
            let line = tail_entry.map_or(first_line, |e| e.line);
            return Err(ConfigError::new(line, format!("unknown tail rule `{other}` (expected in-plateau, constant or level-offset)")));
        }
    };
    let params: BTreeSet<&str> = ["theta", "c", "delta"].into();
    for p in params.iter().filter(|p| !allowed.contains(p)) {
        if let Some(e) = get(p) {
            return Err(ConfigError::new(e.line, format!("`{p}` does not apply to this tail rule")));
        }
    }
    let spec = CharacterSpec { q, deviations, tail };
    // validate against the library invariants with a throwaway base sequence
    let base = Arc::new(StabSeq::constant("probe", 1).expect("level 1 is valid"));
    if let Err(e) = spec.point() {
        let line = allowed.iter().find_map(|p| get(p)).or(tail_entry).map_or(first_line, |e| e.line);
        return Err(ConfigError::new(line, e.to_string()));
    }
    spec.build(base).map_err(|e| ConfigError::new(q_entry.line, e.to_string()))?;
    Ok(spec)
}
