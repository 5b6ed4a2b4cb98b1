//! Adaptive Gauss–Kronrod quadrature and reference principal-value integrals
//! for analytically known profiles.
//!
//! These routines work on closures, not on sampled fields, and serve as the
//! independent oracle for the lattice operators and the particle sums.

use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * hw, ((k - g) * hw).abs())
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut panels = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..4000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    panels.iter().map(|p| p.2).sum()
}

/// Integral of `f` over `[a, +inf)` through the substitution `s = a + (1 - t) / t`.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            let s = a + (1.0 - t) / t;
            f(s) / (t * t)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Inner cut-off below which symmetric difference quotients lose their
/// significant digits to cancellation.
const SLIVER: f64 = 1e-3;

/// `int_0^a g` for an even-in-`s` integrand `g(s) = c0 + c2 s^2 + O(s^4)`,
/// fitted from `g(a/2)` and `g(a)` instead of sampling the cancelling region.
fn even_sliver(g: impl Fn(f64) -> f64, a: f64) -> f64 {
    let (g1, g2) = (g(0.5 * a), g(a));
    let c0 = (4.0 * g1 - g2) / 3.0;
    let c2a2 = 4.0 * (g2 - g1) / 3.0;
    a * (c0 + c2a2 / 3.0)
}

/// `int_0^r g` with the cancelling sliver near `s = 0` handled by [`even_sliver`].
fn symmetric_integral(g: impl Fn(f64) -> f64 + Copy, r: f64) -> f64 {
    let a = SLIVER.min(0.5 * r);
    even_sliver(g, a) + integrate(g, a, r, 1e-13, 1e-12)
}

/// Reference `I1[v](x) = (1/pi) PV int (v(y) - v(x)) / (y - x)^2 dy`, written as
/// `(1/pi) int_0^inf (v(x+s) + v(x-s) - 2 v(x)) / s^2 ds` and split at `s = 1`.
pub fn reference_half_laplacian(v: impl Fn(f64) -> f64, x: f64) -> f64 {
    let vx = v(x);
    let g = |s: f64| (v(x + s) + v(x - s) - 2.0 * vx) / (s * s);
    let near = symmetric_integral(g, 1.0);
    let far = integrate_to_infinity(g, 1.0, 1e-13, 1e-12);
    (near + far) / PI
}

/// Reference short-range part `(1/pi) int_0^r (v(x+s) + v(x-s) - 2 v(x)) / s^2 ds`.
pub fn reference_half_laplacian_short(v: impl Fn(f64) -> f64, x: f64, r: f64) -> f64 {
    let vx = v(x);
    let g = |s: f64| (v(x + s) + v(x - s) - 2.0 * vx) / (s * s);
    symmetric_integral(g, r) / PI
}

/// Reference `H[v](x) = (1/pi) PV int v(y) / (y - x) dy`
/// `= (1/pi) int_0^inf (v(x+s) - v(x-s)) / s ds`.
pub fn reference_hilbert(v: impl Fn(f64) -> f64, x: f64) -> f64 {
    let g = |s: f64| (v(x + s) - v(x - s)) / s;
    let near = symmetric_integral(g, 1.0);
    let far = integrate_to_infinity(g, 1.0, 1e-13, 1e-12);
    (near + far) / PI
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - z);
        weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}
