//! One-dimensional probability measures.

use libm::{erf, erfc};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::quad::{integrate_grid, Estimate, QuadratureCfg};
use crate::error::{Error, Result};
use crate::fnalg::{coeff_bound, horner, merge_breakpoints, PiecewisePoly, ScalarFn};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub enum Measure1D {
    /// Centered normal law.
    Gaussian {
        sigma: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// Nonnegative piecewise polynomial density normalized to mass 1.
    Density(PiecewisePoly<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawMeasure {
    Gaussian { sigma: f64 },
    Uniform { a: f64, b: f64 },
    Density { density: PiecewisePoly<f64> },
}

impl TryFrom<RawMeasure> for Measure1D {
    type Error = Error;
    fn try_from(r: RawMeasure) -> Result<Self> {
        match r {
            RawMeasure::Gaussian { sigma } => Measure1D::gaussian(sigma),
            RawMeasure::Uniform { a, b } => Measure1D::uniform(a, b),
            RawMeasure::Density { density } => Measure1D::density(density),
        }
    }
}

impl From<Measure1D> for RawMeasure {
    fn from(m: Measure1D) -> Self {
        match m {
            Measure1D::Gaussian { sigma } => RawMeasure::Gaussian { sigma },
            Measure1D::Uniform { a, b } => RawMeasure::Uniform { a, b },
            Measure1D::Density(density) => RawMeasure::Density { density },
        }
    }
}

/// Exact integral of a local polynomial over `[0, h]`.
fn poly_integral(c: &[f64], h: f64) -> f64 {
    c.iter().enumerate().map(|(k, &x)| x * h.powi(k as i32 + 1) / (k + 1) as f64).sum()
}

/// Exact mass of a piecewise polynomial over `[lo, hi]`.
fn poly_mass(p: &PiecewisePoly<f64>, lo: f64, hi: f64) -> f64 {
    let bps = p.breakpoints();
    let mut total = 0.0;
    for (i, piece) in p.pieces().iter().enumerate() {
        let (a, b) = (bps[i].max(lo), bps[i + 1].min(hi));
        if a < b {
            let shifted = crate::fnalg::taylor_shift(piece, a - bps[i]);
            total += poly_integral(&shifted, b - a);
        }
    }
    total
}

impl Measure1D {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidMeasure(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Measure1D::Gaussian { sigma })
    }

    pub fn standard_gaussian() -> Self {
        Measure1D::Gaussian { sigma: 1.0 }
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMeasure(format!("uniform needs a < b, got [{a}, {b}]")));
        }
        Ok(Measure1D::Uniform { a, b })
    }

    /// Normalizes `p` to unit mass after checking it is nonnegative.
    pub fn density(p: PiecewisePoly<f64>) -> Result<Self> {
        let bps = p.breakpoints().to_vec();
        for (i, piece) in p.pieces().iter().enumerate() {
            let h = bps[i + 1] - bps[i];
            for j in 0..=64 {
                let v = horner(piece, h * j as f64 / 64.0);
                if v < -1e-12 {
                    return Err(Error::InvalidMeasure("density takes negative values".into()));
                }
            }
        }
        let mass = poly_mass(&p, f64::NEG_INFINITY, f64::INFINITY);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidMeasure("density has no mass".into()));
        }
        Ok(Measure1D::Density(p.scale(1.0 / mass)))
    }

    /// Mass outside `[-k, k]`.
    pub fn tail_mass(&self, k: f64) -> f64 {
        match self {
            Measure1D::Gaussian { sigma } => erfc(k / (sigma * std::f64::consts::SQRT_2)),
            Measure1D::Uniform { a, b } => {
                let inside = (b.min(k) - a.max(-k)).max(0.0);
                ((b - a - inside) / (b - a)).max(0.0)
            }
            Measure1D::Density(p) => (poly_mass(p, f64::NEG_INFINITY, -k) + poly_mass(p, k, f64::INFINITY)).max(0.0),
        }
    }

    /// `mu([-k, k])`.
    pub fn plateau_mass(&self, k: f64) -> f64 {
        match self {
            Measure1D::Gaussian { sigma } => erf(k / (sigma * std::f64::consts::SQRT_2)),
            Measure1D::Uniform { .. } | Measure1D::Density(_) => (1.0 - self.tail_mass(k)).clamp(0.0, 1.0),
        }
    }

    /// Whether the measure is carried by `[-k, k]` (decided structurally, not numerically).
    pub fn carried_by(&self, k: f64) -> bool {
        match self {
            Measure1D::Gaussian { .. } => false,
            Measure1D::Uniform { a, b } => -k <= *a && *b <= k,
            Measure1D::Density(p) => p.support().is_none_or(|(lo, hi)| -k <= lo && hi <= k),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            Measure1D::Gaussian { sigma } => {
                let z = t / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Measure1D::Uniform { a, b } => {
                if (*a..=*b).contains(&t) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Measure1D::Density(p) => p.eval(t),
        }
    }

    /// Integration window and breakpoints of the density itself.
    fn window(&self, cfg: &QuadratureCfg) -> (f64, f64, Vec<f64>) {
        match self {
            Measure1D::Gaussian { sigma } => {
                let r = cfg.sigma_trunc * sigma;
                (-r, r, vec![-r, 0.0, r])
            }
            Measure1D::Uniform { a, b } => (*a, *b, vec![*a, *b]),
            Measure1D::Density(p) => {
                let (lo, hi) = p.support().unwrap_or((0.0, 0.0));
                (lo, hi, p.breakpoints().to_vec())
            }
        }
    }

    /// Mass not covered by the integration window.
    fn truncated_mass(&self, cfg: &QuadratureCfg) -> f64 {
        match self {
            Measure1D::Gaussian { sigma } => self.tail_mass(cfg.sigma_trunc * sigma),
            _ => 0.0,
        }
    }

    /// `int f dmu` with forced subdivision at every breakpoint.
    pub fn integrate(&self, f: &ScalarFn, cfg: &QuadratureCfg) -> Result<Estimate> {
        let (lo, hi, own) = self.window(cfg);
        let mut value = f.constant_part();
        let mut err = 0.0;
        if f.terms().is_empty() {
            return Ok(Estimate { value, err });
        }
        let env_breaks = f.breakpoints();
        let mut grid: Vec<f64> =
            merge_breakpoints([own.as_slice(), env_breaks.as_slice()]).into_iter().filter(|&x| x >= lo && x <= hi).collect();
        let (slo, shi) = f.support().expect("terms present");
        grid.retain(|&x| x >= slo && x <= shi);
        if grid.len() >= 2 {
            let est = integrate_grid(
                |t| {
                    let d = self.pdf(t);
                    if d == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        (f.eval(t) - f.constant_part()) * d
                    }
                },
                &grid,
                cfg,
            )?;
            value += est.value;
            err += est.err;
        }
        let trunc = self.truncated_mass(cfg);
        if trunc > 0.0 {
            let env_sup: f64 = f
                .terms()
                .iter()
                .map(|t| {
                    let b = t.envelope.breakpoints();
                    t.envelope.pieces().iter().enumerate().map(|(i, p)| coeff_bound(p, b[i + 1] - b[i])).fold(0.0, f64::max)
                })
                .sum();
            err += trunc * env_sup;
        }
        Ok(Estimate { value, err })
    }

    /// Characteristic function `int e^{ixy} dmu(y)`.
    pub fn char_fn(&self, x: f64, cfg: &QuadratureCfg) -> Result<Estimate> {
        match self {
            Measure1D::Gaussian { sigma } => Ok(Estimate::exact(C64::new((-0.5 * sigma * sigma * x * x).exp(), 0.0))),
            Measure1D::Uniform { a, b } => {
                if x == 0.0 {
                    return Ok(Estimate::exact(C64::new(1.0, 0.0)));
                }
                let num = C64::from_polar(1.0, x * b) - C64::from_polar(1.0, x * a);
                Ok(Estimate::exact(num / C64::new(0.0, x * (b - a))))
            }
            Measure1D::Density(_) => {
                if x == 0.0 {
                    return Ok(Estimate::exact(C64::new(1.0, 0.0)));
                }
                self.char_fn_quadrature(x, cfg)
            }
        }
    }

    /// `int e^{ixy} dmu(y)` by plain quadrature of the density (used as an oracle and for densities).
    pub fn char_fn_quadrature(&self, x: f64, cfg: &QuadratureCfg) -> Result<Estimate> {
        let (_, _, grid) = self.window(cfg);
        let mut est = integrate_grid(|t| C64::from_polar(self.pdf(t), x * t), &grid, cfg)?;
        est.err += self.truncated_mass(cfg);
        Ok(est)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Measure1D::Gaussian { sigma } => Normal::new(0.0, *sigma).expect("validated sigma").sample(rng),
            Measure1D::Uniform { a, b } => rng.gen_range(*a..*b),
            Measure1D::Density(p) => {
                let bps = p.breakpoints();
                let masses: Vec<f64> = p.pieces().iter().enumerate().map(|(i, c)| poly_integral(c, bps[i + 1] - bps[i]).max(0.0)).collect();
                let total: f64 = masses.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                let mut idx = masses.len() - 1;
                for (i, m) in masses.iter().enumerate() {
                    if u < *m {
                        idx = i;
                        break;
                    }
                    u -= m;
                }
                let h = bps[idx + 1] - bps[idx];
                let piece = &p.pieces()[idx];
                let cap = coeff_bound(piece, h).max(f64::MIN_POSITIVE);
                loop {
                    let s = rng.gen::<f64>() * h;
                    if rng.gen::<f64>() * cap <= horner(piece, s) {
                        return bps[idx] + s;
                    }
                }
            }
        }
    }
}
