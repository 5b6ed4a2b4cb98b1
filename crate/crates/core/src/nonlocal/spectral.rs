//! Fourier-multiplier evaluation on the periodic extension of a sampled field.
//!
//! The `n` samples are treated as one period of length `n h`. This is exact
//! for band-limited periodic data and a performance path otherwise.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Apply the multiplier `symbol(xi)` to the samples; `symbol` receives the
/// angular frequency and whether it is the (unpaired) Nyquist mode.
pub fn apply_symbol(values: &[f64], h: f64, symbol: impl Fn(f64, bool) -> Complex<f64>) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let period = n as f64 * h;
    for (m, b) in buf.iter_mut().enumerate() {
        let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let nyquist = n.is_multiple_of(2) && m == n / 2;
        *b *= symbol(2.0 * PI * k / period, nyquist);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

fn limits_match(f: &ScalarField) -> bool {
    let scale = f.left_limit.abs().max(f.right_limit.abs()).max(1.0);
    (f.left_limit - f.right_limit).abs() <= 1e-12 * scale
}

fn output(f: &ScalarField, values: Vec<f64>) -> ScalarField {
    ScalarField { grid: f.grid, values, left_limit: 0.0, right_limit: 0.0, tail_power: Some(2.0) }
}

/// `I1[f]` through the symbol `-|xi|`; requires equal far-field limits.
pub fn half_laplacian(f: &ScalarField) -> Result<ScalarField> {
    if !limits_match(f) {
        return Err(Error::NonMatchingLimits { left: f.left_limit, right: f.right_limit });
    }
    let v = apply_symbol(&f.values, f.grid.spacing(), |xi, _| Complex::new(-xi.abs(), 0.0));
    Ok(output(f, v))
}

/// `I1[f]` for fields with different limits: the ramp
/// `L + (R - L)(1/2 + atan((x - c)/a)/pi)` is subtracted, the remainder goes
/// through the spectral path and the ramp's exact `I1` is added back.
pub fn half_laplacian_with_ramp(f: &ScalarField, ramp_width: f64) -> Result<ScalarField> {
    if !(ramp_width > 0.0) {
        return Err(Error::InvalidArgument(format!("ramp width must be positive, got {ramp_width}")));
    }
    let (l, r) = (f.left_limit, f.right_limit);
    let c = f.grid.center;
    let ramp = |x: f64| l + (r - l) * (0.5 + ((x - c) / ramp_width).atan() / PI);
    let rest: Vec<f64> = f.values.iter().enumerate().map(|(i, v)| v - ramp(f.grid.x(i))).collect();
    let mut out = apply_symbol(&rest, f.grid.spacing(), |xi, _| Complex::new(-xi.abs(), 0.0));
    for (i, o) in out.iter_mut().enumerate() {
        let y = f.grid.x(i) - c;
        *o += -(r - l) * y / (PI * (y * y + ramp_width * ramp_width));
    }
    Ok(ScalarField { tail_power: Some(1.0), ..output(f, out) })
}

/// `H[f]` through the symbol `i sgn(xi)` (Nyquist mode dropped).
pub fn hilbert(f: &ScalarField) -> Result<ScalarField> {
    if !limits_match(f) {
        return Err(Error::NonMatchingLimits { left: f.left_limit, right: f.right_limit });
    }
    let v = apply_symbol(&f.values, f.grid.spacing(), |xi, nyq| {
        if nyq || xi == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, xi.signum())
        }
    });
    Ok(ScalarField { tail_power: Some(1.0), ..output(f, v) })
}

/// Spectral first derivative (symbol `i xi`, Nyquist mode dropped).
pub fn derivative(f: &ScalarField) -> ScalarField {
    let v = apply_symbol(&f.values, f.grid.spacing(), |xi, nyq| {
        if nyq {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, xi)
        }
    });
    output(f, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;

    /// Grid whose sample period `n h` is exactly `period`.
    fn periodic_grid(n: usize, period: f64) -> Grid1D {
        let h = period / n as f64;
        Grid1D::new(0.0, 0.5 * h * (n - 1) as f64, n).unwrap()
    }

    #[test]
    fn cosine_goes_to_minus_sine() {
        let g = periodic_grid(64, 2.0 * PI);
        let f = ScalarField::from_fn(g, |x| (3.0 * x).cos(), 0.0, 0.0, None).unwrap();
        let hf = hilbert(&f).unwrap();
        for i in 0..g.n {
            assert!((hf.values[i] + (3.0 * g.x(i)).sin()).abs() < 1e-12);
        }
        let i1 = half_laplacian(&f).unwrap();
        for i in 0..g.n {
            assert!((i1.values[i] + 3.0 * (3.0 * g.x(i)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_limits_are_rejected() {
        let g = Grid1D::new(0.0, 4.0, 64).unwrap();
        let f = ScalarField::from_fn(g, |x| x.atan(), -1.0, 1.0, Some(1.0)).unwrap();
        assert!(matches!(half_laplacian(&f), Err(Error::NonMatchingLimits { .. })));
        assert!(half_laplacian_with_ramp(&f, 1.0).is_ok());
    }
}
