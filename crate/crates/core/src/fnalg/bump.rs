//! Canonical trapezoid bumps and their powers.

use super::poly::{PiecewisePoly, DEGREE_CAP};
use super::scalar::ScalarFn;
use crate::error::{Error, Result};

fn binomial_row(p: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for k in 0..p {
        let next = row[k] * (p - k) as f64 / (k + 1) as f64;
        row.push(next.round());
    }
    row
}

/// Real envelope of `bump(level)^power`: `s^p`, `1`, `(1-s)^p` on the three pieces.
pub fn bump_poly(level: u32, power: u32) -> Result<PiecewisePoly<f64>> {
    if level < 1 {
        return Err(Error::InvalidLevel(level as i64));
    }
    let p = power as usize;
    if p > DEGREE_CAP {
        return Err(Error::DegreeOverflow { degree: p, cap: DEGREE_CAP });
    }
    let n = level as f64;
    let mut rise = vec![0.0; p + 1];
    rise[p] = 1.0;
    let fall: Vec<f64> = binomial_row(p).into_iter().enumerate().map(|(k, b)| if k % 2 == 0 { b } else { -b }).collect();
    PiecewisePoly::new(vec![-n - 1.0, -n, n, n + 1.0], vec![rise, vec![1.0], fall])
}

/// The canonical bump of level `n`.
pub fn make_bump(n: i64) -> Result<ScalarFn> {
    if n < 1 || n > u32::MAX as i64 {
        return Err(Error::InvalidLevel(n));
    }
    bump_power(n as u32, 1)
}

/// `make_bump(level)^power`; `power == 0` gives the constant 1.
pub fn bump_power(level: u32, power: u32) -> Result<ScalarFn> {
    if power == 0 {
        if level < 1 {
            return Err(Error::InvalidLevel(level as i64));
        }
        return Ok(ScalarFn::one());
    }
    Ok(ScalarFn::from_real_poly(&bump_poly(level, power)?))
}

/// Direct evaluation of `bump(level)^power` at `t`.
pub fn bump_value(level: u32, power: u32, t: f64) -> f64 {
    let n = level as f64;
    let a = t.abs();
    let base = if a <= n {
        1.0
    } else if a >= n + 1.0 {
        0.0
    } else {
        n + 1.0 - a
    };
    base.powi(power as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let b = make_bump(1).unwrap();
        assert_eq!(b.eval(0.0).re, 1.0);
        assert_eq!(b.eval(1.5).re, 0.5);
        assert_eq!(b.eval(3.0).re, 0.0);
        assert_eq!(b.eval(-1.5).re, 0.5);
    }

    #[test]
    fn invalid_level() {
        assert_eq!(make_bump(0), Err(Error::InvalidLevel(0)));
        assert_eq!(make_bump(-3), Err(Error::InvalidLevel(-3)));
    }

    #[test]
    fn square_at_ramp_midpoint() {
        let b = make_bump(1).unwrap();
        let sq = b.mul(&b).unwrap();
        assert!((sq.eval(1.5).re - 0.25).abs() < 1e-15);
        assert!(sq.approx_eq(&bump_power(1, 2).unwrap(), 1e-12));
    }

    #[test]
    fn power_matches_direct_value() {
        for p in 0..=6 {
            let f = bump_power(3, p).unwrap();
            for i in 0..=90 {
                let t = -4.5 + i as f64 * 0.1;
                assert!((f.eval(t).re - bump_value(3, p, t)).abs() < 1e-12, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn conj_is_identity_on_bumps() {
        let b = make_bump(2).unwrap();
        assert!(b.conj().approx_eq(&b, 0.0));
    }

    #[test]
    fn power_over_cap() {
        assert!(matches!(bump_power(1, 17), Err(Error::DegreeOverflow { .. })));
    }
}
