//! Adaptive Gauss–Kronrod (7/15) quadrature over a fixed cell grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCfg {
    pub abs_tol: f64,
    /// Gaussians are integrated over `[-sigma_trunc * sigma, sigma_trunc * sigma]`.
    pub sigma_trunc: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureCfg {
    fn default() -> Self {
        QuadratureCfg { abs_tol: 1e-10, sigma_trunc: 8.0, max_subdivisions: 4000 }
    }
}

impl QuadratureCfg {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureCfg { abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidArgument("abs_tol must be positive".into()));
        }
        if !(self.sigma_trunc > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("bad quadrature configuration".into()));
        }
        Ok(())
    }
}

/// A value with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: C64,
    pub err: f64,
}

impl Estimate {
    pub fn exact(value: C64) -> Self {
        Estimate { value, err: 0.0 }
    }
}

// Kronrod nodes and weights as published, beyond f64 precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

struct Cell {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

/// Integrate `f` over the cells of `grid`, always splitting at grid points.
pub fn integrate_grid(f: impl Fn(f64) -> C64, grid: &[f64], cfg: &QuadratureCfg) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    for w in grid.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&f, w[0], w[1]);
            heap.push(Cell { a: w[0], b: w[1], value, err });
        }
    }
    let mut splits = 0;
    loop {
        let (total, err) = heap.iter().fold((C64::new(0.0, 0.0), 0.0), |(v, e), c| (v + c.value, e + c.err));
        if err <= cfg.abs_tol {
            // sum in a fixed order for determinism
            let mut cells: Vec<&Cell> = heap.iter().collect();
            cells.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = cells.iter().fold(C64::new(0.0, 0.0), |v, c| v + c.value);
            return Ok(Estimate { value, err });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure { estimate: total, bound: err });
        }
        let worst = heap.pop().expect("nonempty when err > 0");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(Error::QuadratureFailure { estimate: total, bound: err });
        }
        for (a, b) in [(worst.a, m), (m, worst.b)] {
            let (value, err) = gk15(&f, a, b);
            heap.push(Cell { a, b, value, err });
        }
        splits += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate_grid(|t| C64::new(t * t * t - t, 0.0), &[0.0, 2.0], &QuadratureCfg::default()).unwrap();
        assert!((est.value.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let est = integrate_grid(|t| C64::from_polar(1.0, 3.0 * t), &[0.0, 1.0, 5.0], &QuadratureCfg::default()).unwrap();
        let exact = (C64::from_polar(1.0, 15.0) - 1.0) / C64::new(0.0, 3.0);
        assert!((est.value - exact).norm() < 1e-12);
        assert!(est.err <= 1e-10);
    }

    #[test]
    fn failure_reports_estimate() {
        let cfg = QuadratureCfg { abs_tol: 1e-300, max_subdivisions: 3, ..Default::default() };
        let r = integrate_grid(|t| C64::new(t.abs().sqrt(), 0.0), &[-1.0, 1.0], &cfg);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
