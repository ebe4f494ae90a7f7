//! Probability measures on `R` and product measures on `R^N`.

mod levels;
mod measure1d;
mod product;
mod quad;
mod sample;

pub use levels::{least_level, select_levels, Budget, LEVEL_CAP};
pub use measure1d::Measure1D;
pub use product::ProductMeasure;
pub use quad::{integrate_grid, Estimate, QuadratureCfg};
pub use sample::{coordinate_rng, draw, sample};

use crate::error::Result;
use crate::fnalg::ScalarFn;

pub fn integrate(f: &ScalarFn, mu: &Measure1D, cfg: &QuadratureCfg) -> Result<Estimate> {
    mu.integrate(f, cfg)
}

pub fn char_fn(mu: &Measure1D, x: f64, cfg: &QuadratureCfg) -> Result<Estimate> {
    mu.char_fn(x, cfg)
}

pub fn plateau_mass(mu: &Measure1D, k: u32) -> f64 {
    mu.plateau_mass(k as f64)
}
