//! Short/long-range split of `I1` at a single point.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::integrate_to_infinity;

/// `(I1^{1,r}[f](x), I1^{2,r}[f](x))`: the contributions of `|y - x| < r` and
/// `|y - x| >= r` to `I1[f](x)`.
///
/// Both parts use the trapezoid rule in `s = |y - x|` on a lattice of step
/// `r / ceil(r / h)` through the cubic interpolant, with the Euler–Maclaurin
/// endpoint correction at `s = r`; beyond the grid the far-field continuation
/// is integrated adaptively.
pub fn i1_split(f: &ScalarField, x: f64, r: f64) -> Result<(f64, f64)> {
    let h = f.grid.spacing();
    if !(r >= 2.0 * h) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("split radius {r} below grid resolution 2h = {}", 2.0 * h)));
    }
    let k_split = (r / h).ceil() as usize;
    let hs = r / k_split as f64;
    let fx = f.eval(x);
    let g = |s: f64| (f.eval(x + s) + f.eval(x - s) - 2.0 * fx) / (s * s);
    let dg = |s: f64| (g(s + hs) - g(s - hs)) / (2.0 * hs);

    // s = 0 endpoint: the integrand tends to f''(x).
    let g0 = (f.eval(x + hs) + f.eval(x - hs) - 2.0 * fx) / (hs * hs);
    let mut short = 0.5 * g0;
    for k in 1..k_split {
        short += g(k as f64 * hs);
    }
    short += 0.5 * g(r);
    short = hs * short - hs * hs / 12.0 * dg(r);

    // Long range: lattice up to where both x +- s have left the grid.
    let reach = (x - f.grid.left()).max(f.grid.right() - x).max(r);
    let k_end = ((reach / hs).ceil() as usize).max(k_split + 1);
    let s_end = k_end as f64 * hs;
    let mut long = 0.5 * g(r);
    for k in k_split + 1..k_end {
        long += g(k as f64 * hs);
    }
    long += 0.5 * g(s_end);
    long = hs * long - hs * hs / 12.0 * (dg(s_end) - dg(r));
    long += integrate_to_infinity(g, s_end, 1e-14, 1e-12);

    Ok((short / PI, long / PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;

    #[test]
    fn constant_splits_to_zero() {
        let g = Grid1D::new(0.0, 10.0, 512).unwrap();
        let f = ScalarField::constant(g, 2.0);
        let (s, l) = i1_split(&f, 0.3, 1.0).unwrap();
        assert!(s.abs() < 1e-14 && l.abs() < 1e-14, "{s} {l}");
    }

    #[test]
    fn radius_below_resolution_is_rejected() {
        let g = Grid1D::new(0.0, 10.0, 512).unwrap();
        let f = ScalarField::constant(g, 2.0);
        assert!(i1_split(&f, 0.0, g.spacing()).is_err());
    }
}
