//! Quadrature, differentiation and norms on sampled fields.

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Mass carried by an algebraic tail `e * (R / s)^p` for `s > R`.
fn tail_mass(edge: f64, half_width: f64, power: Option<f64>) -> Result<f64> {
    match power {
        None => Ok(0.0),
        Some(_) if edge == 0.0 => Ok(0.0),
        Some(p) if p <= 1.0 => Err(Error::DivergentIntegral(format!(
            "tail power {p} with non-zero tail value {edge:e}"
        ))),
        Some(p) => Ok(edge * half_width / (p - 1.0)),
    }
}

/// Trapezoid rule over the grid plus the closed-form mass of the algebraic tails.
///
/// The integrand must vanish at infinity; a non-zero limit is a divergent integral.
pub fn trapezoid_integral(f: &ScalarField) -> Result<f64> {
    if f.left_limit != 0.0 || f.right_limit != 0.0 {
        return Err(Error::DivergentIntegral(format!(
            "integrand tends to {} / {} at infinity",
            f.left_limit, f.right_limit
        )));
    }
    let v = &f.values;
    let n = v.len();
    let h = f.grid.spacing();
    let inner: f64 = v[1..n - 1].iter().sum();
    let body = h * (inner + 0.5 * (v[0] + v[n - 1]));
    let r = f.grid.half_width;
    Ok(body + tail_mass(v[0], r, f.tail_power)? + tail_mass(v[n - 1], r, f.tail_power)?)
}

/// Running trapezoid integral starting from `base` at the left grid edge.
///
/// The far-field limits of the result include the tail masses of `f` when
/// those are finite.
pub fn cumulative_integral(f: &ScalarField, base: f64) -> ScalarField {
    let v = &f.values;
    let h = f.grid.spacing();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = base;
    out.push(acc);
    for w in v.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    let r = f.grid.half_width;
    let decays = f.left_limit == 0.0 && f.right_limit == 0.0;
    let (left_mass, right_mass, tail_power) = match f.tail_power {
        Some(p) if decays && p > 1.0 => (
            tail_mass(v[0], r, Some(p)).unwrap_or(0.0),
            tail_mass(v[v.len() - 1], r, Some(p)).unwrap_or(0.0),
            Some(p - 1.0),
        ),
        _ => (0.0, 0.0, None),
    };
    let last = *out.last().expect("grid has at least 8 nodes");
    ScalarField {
        grid: f.grid,
        values: out,
        left_limit: base - left_mass,
        right_limit: last + right_mass,
        tail_power,
    }
}

/// Second-order central differences inside, second-order one-sided at the edges.
pub fn central_derivative(f: &ScalarField) -> ScalarField {
    let v = &f.values;
    let n = v.len();
    let h = f.grid.spacing();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    ScalarField {
        grid: f.grid,
        values: d,
        left_limit: 0.0,
        right_limit: 0.0,
        tail_power: f.tail_power.map(|p| p + 1.0),
    }
}

/// Maximum of `|a - b|` over the nodes inside `window = (lo, hi)`.
pub fn sup_distance(a: &ScalarField, b: &ScalarField, window: (f64, f64)) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let (lo, hi) = window;
    let mut found = false;
    let mut worst = 0.0_f64;
    for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
        let xi = a.grid.x(i);
        if xi >= lo && xi <= hi {
            found = true;
            worst = worst.max((x - y).abs());
        }
    }
    if !found {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] contains no grid node")));
    }
    Ok(worst)
}

/// `sup_distance` over the whole grid.
pub fn sup_norm_diff(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    sup_distance(a, b, (f64::NEG_INFINITY, f64::INFINITY))
}
