//! Certified sup-norm brackets for `ScalarFn`.

use super::poly::{coeff_bound, poly_add, poly_derivative};
use super::scalar::ScalarFn;
use crate::C64;

/// Bracket `lower <= sup |f| <= upper`.
///
/// Every envelope piece is cut into `refinement` equal cells. On each cell the
/// derivative of `e^{-i w0 t} f(t)` (which has the same modulus as `f`) is
/// bounded by freezing the phases at the left endpoint and bounding the
/// remainder, and the tent bound `(|f(a)| + |f(b)| + L h) / 2` caps the cell.
pub fn sup_norm_bound(f: &ScalarFn, refinement: usize) -> (f64, f64) {
    if f.is_zero() {
        return (0.0, 0.0);
    }
    let refinement = refinement.max(2);
    let c = f.constant_part();
    let base = c.norm();
    let grid = f.breakpoints();
    if grid.len() < 2 {
        return (base, base);
    }
    // frequency to factor out; keep 0 when the constant part is present
    let w0 = if base > 0.0 { 0.0 } else { f.terms()[0].freq };

    let mut lower = base;
    let mut upper = base;
    for w in grid.windows(2) {
        let (p0, p1) = (w[0], w[1]);
        let h = (p1 - p0) / refinement as f64;
        // local data for every term on this piece is shifted per cell below
        let mut fa = f.eval(p0).norm();
        lower = lower.max(fa);
        for j in 0..refinement {
            let a = p0 + j as f64 * h;
            let b = if j + 1 == refinement { p1 } else { a + h };
            let hb = b - a;
            let fb = f.eval(b).norm();
            lower = lower.max(fb);

            let mut frozen: Vec<C64> = Vec::new();
            let mut remainder = 0.0;
            for t in f.terms() {
                let e = t.envelope.local_at(a, b);
                if e.is_empty() {
                    continue;
                }
                let nu = t.freq - w0;
                let de = poly_derivative(&e);
                // i nu E + E'
                let scaled: Vec<C64> = e.iter().map(|&x| x * C64::new(0.0, nu)).collect();
                let g = poly_add(&scaled, &de);
                let phase = C64::from_polar(1.0, nu * a);
                let g_phase: Vec<C64> = g.iter().map(|&x| x * phase).collect();
                frozen = poly_add(&frozen, &g_phase);
                remainder += nu.abs() * hb * coeff_bound(&g, hb);
            }
            let lip = coeff_bound(&frozen, hb) + remainder;
            let cell = if lip * hb <= (fa - fb).abs() { fa.max(fb) } else { 0.5 * (fa + fb + lip * hb) };
            upper = upper.max(cell);
            fa = fb;
        }
    }
    (lower, upper.max(lower))
}
