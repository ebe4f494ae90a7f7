//! Scalar function algebra: piecewise polynomials, modulations and canonical bumps.

mod bump;
mod poly;
mod scalar;
mod supnorm;

pub use bump::{bump_poly, bump_power, bump_value, make_bump};
pub use poly::{coeff_bound, horner, merge_breakpoints, poly_mul, taylor_shift, Coeff, PiecewisePoly, DEGREE_CAP};
pub use scalar::{ScalarFn, Term};
pub use supnorm::sup_norm_bound;

use crate::error::Result;

pub fn multiply(f: &ScalarFn, g: &ScalarFn) -> Result<ScalarFn> {
    f.mul(g)
}

pub fn conj(f: &ScalarFn) -> ScalarFn {
    f.conj()
}

pub fn modulate(x: f64, f: &ScalarFn) -> Result<ScalarFn> {
    f.modulate(x)
}
