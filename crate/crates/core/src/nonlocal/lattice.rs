//! Lattice principal-value sums for `I1` and `H`.
//!
//! Both operators are discretized by the symmetric trapezoid rule in the
//! offset variable `s = y - x` with the grid spacing as step:
//!
//! ```text
//! I1_j = (1/pi) [ (f_{j+1} + f_{j-1} - 2 f_j) / (2h) + (1/h) (sum_{k != 0} f_{j+k} / k^2 - f_j pi^2 / 3) ]
//! H_j  = (1/pi) [ (f_{j+1} - f_{j-1}) / 2 + sum_{k != 0} f_{j+k} / k ]
//! ```
//!
//! where `f_m` outside the grid is the far-field continuation of the field.
//! The first bracket term is the `s = 0` endpoint of the trapezoid (the
//! second resp. first derivative at `x_j`); since the integrands are even in
//! `s`, the rule has no further endpoint corrections.
//!
//! The on-grid part of the sums is a Toeplitz product evaluated either
//! directly (sequential or rayon-parallel) or by FFT; the off-grid part is
//! linear in the two limits and the two edge excesses and uses precomputed
//! tables of lattice sums.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::field::ScalarField;
use crate::quadrature::integrate_to_infinity;

/// How the on-grid Toeplitz sums are evaluated. All variants compute the same
/// discretization and agree to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    /// Pairwise `O(N^2)` sum, one node per task.
    Direct(Execution),
    /// Zero-padded FFT convolution, `O(N log N)`.
    #[default]
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kernel {
    /// `1 / d^2`
    InverseSquare,
    /// `1 / d`
    Inverse,
}

impl Kernel {
    #[inline]
    fn at(self, d: isize) -> f64 {
        if d == 0 {
            return 0.0;
        }
        let d = d as f64;
        match self {
            Kernel::InverseSquare => 1.0 / (d * d),
            Kernel::Inverse => 1.0 / d,
        }
    }

    fn exponent(self) -> i32 {
        match self {
            Kernel::InverseSquare => 2,
            Kernel::Inverse => 1,
        }
    }
}

struct ToeplitzFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Transform of the wrapped kernel, already divided by the FFT length.
    spectrum: Vec<Complex<f64>>,
}

impl ToeplitzFft {
    fn new(n: usize, kernel: Kernel) -> Self {
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        // y_j = sum_m f_m K(m - j) is the circular convolution of f with K(-e).
        let mut spectrum = vec![Complex::new(0.0, 0.0); size];
        for e in -(n as isize - 1)..=(n as isize - 1) {
            spectrum[e.rem_euclid(size as isize) as usize] = Complex::new(kernel.at(-e), 0.0);
        }
        forward.process(&mut spectrum);
        let scale = 1.0 / size as f64;
        for s in &mut spectrum {
            *s *= scale;
        }
        ToeplitzFft { n, forward, inverse, spectrum }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut buf = vec![Complex::new(0.0, 0.0); self.spectrum.len()];
        for (b, &x) in buf.iter_mut().zip(v) {
            b.re = x;
        }
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re).collect()
    }
}

type Cache<K, V> = OnceLock<Mutex<HashMap<K, Arc<V>>>>;

static TOEPLITZ: Cache<(usize, Kernel), ToeplitzFft> = OnceLock::new();
static TRIGAMMA: Cache<usize, Vec<f64>> = OnceLock::new();
static TAILS: Cache<(usize, Kernel, u64), Vec<f64>> = OnceLock::new();

fn cached<K, V>(cache: &Cache<K, V>, key: K, build: impl FnOnce() -> V) -> Arc<V>
where
    K: std::hash::Hash + Eq + Copy,
{
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("cache lock").get(&key) {
        return Arc::clone(v);
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    let v = Arc::new(build());
    Arc::clone(map.lock().expect("cache lock").entry(key).or_insert(v))
}

/// `psi_1(x)` (trigamma) for `x >= 9` by its asymptotic series.
fn trigamma_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

/// `A_k = sum_{q >= 1} 1 / (k + q)^2 = psi_1(k + 1)` for `k = 0..n`.
fn trigamma_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n];
    let mut acc = trigamma_asymptotic((n + 1) as f64);
    for k in (0..n).rev() {
        // psi_1(k + 1) = psi_1(k + 2) + 1 / (k + 1)^2
        acc += 1.0 / ((k + 1) as f64).powi(2);
        t[k] = acc;
    }
    t
}

/// `T_k = sum_{q >= 1} (1 + q/N)^{-p} / (k + q)^s` for `k = 0..n`, `N = (n - 1)/2`:
/// the weight of the algebraic far-field tail seen from node `k` cells inside the edge.
fn tail_table(n: usize, kernel: Kernel, p: f64) -> Vec<f64> {
    const DIRECT: usize = 256;
    let nr = (n - 1) as f64 / 2.0;
    let s = kernel.exponent();
    map_indexed(n, Execution::default(), |k| {
        let kf = k as f64;
        let g = |q: f64| (1.0 + q / nr).powf(-p) / (kf + q).powi(s);
        let head: f64 = (1..=DIRECT).map(|q| g(q as f64)).sum();
        // Remainder by the midpoint form of Euler–Maclaurin.
        let a = DIRECT as f64 + 0.5;
        let rest = integrate_to_infinity(g, a, 1e-18, 1e-14);
        let dg = g(a) * (-p / (nr + a) - s as f64 / (kf + a));
        head + rest + dg / 24.0
    })
}

fn tail_weights(n: usize, kernel: Kernel, p: f64) -> Arc<Vec<f64>> {
    cached(&TAILS, (n, kernel, p.to_bits()), || tail_table(n, kernel, p))
}

/// `y_j = sum_{m != j} v_m K(m - j)` over the grid nodes.
fn correlate(v: &[f64], kernel: Kernel, mode: Summation) -> Vec<f64> {
    let n = v.len();
    match mode {
        Summation::Direct(exec) => {
            let kv: Vec<f64> = (0..2 * n - 1).map(|i| kernel.at(i as isize - (n as isize - 1))).collect();
            map_indexed(n, exec, |j| {
                // kv[m + n - 1 - j] = K(m - j)
                let row = &kv[n - 1 - j..2 * n - 1 - j];
                row.iter().zip(v).map(|(k, x)| k * x).sum()
            })
        }
        Summation::Fft => cached(&TOEPLITZ, (n, kernel), || ToeplitzFft::new(n, kernel)).apply(v),
    }
}

/// Lattice `I1[f]` at every node.
pub fn half_laplacian(f: &ScalarField, mode: Summation) -> ScalarField {
    let n = f.grid.n;
    let h = f.grid.spacing();
    // Shift by a reference constant so that constants are annihilated exactly.
    let c = 0.5 * (f.left_limit + f.right_limit);
    let v: Vec<f64> = f.values.iter().map(|x| x - c).collect();
    let (l, r) = (f.left_limit - c, f.right_limit - c);
    let (el, er) = (v[0] - l, v[n - 1] - r);
    let ext = |m: isize| f.extended_node(m) - c;

    let grid_sum = correlate(&v, Kernel::InverseSquare, mode);
    let a = cached(&TRIGAMMA, n, || trigamma_table(n));
    let tail = f.tail_power.map(|p| tail_weights(n, Kernel::InverseSquare, p));
    let z = PI * PI / 3.0;

    let values = (0..n)
        .map(|j| {
            let jr = n - 1 - j;
            let mut s = grid_sum[j] + l * a[j] + r * a[jr];
            if let Some(t) = &tail {
                s += el * t[j] + er * t[jr];
            }
            let ji = j as isize;
            let second = ext(ji + 1) + ext(ji - 1) - 2.0 * v[j];
            (0.5 * second + s - v[j] * z) / (PI * h)
        })
        .collect();
    let tail_power = if f.left_limit != f.right_limit { Some(1.0) } else { Some(2.0) };
    ScalarField { grid: f.grid, values, left_limit: 0.0, right_limit: 0.0, tail_power }
}

/// Lattice `H[f]` at every node; `f` must vanish at infinity.
pub fn hilbert(f: &ScalarField, mode: Summation) -> Result<ScalarField> {
    if f.left_limit != 0.0 || f.right_limit != 0.0 {
        return Err(Error::NonDecaying { left: f.left_limit, right: f.right_limit });
    }
    let n = f.grid.n;
    let v = &f.values;
    let grid_sum = correlate(v, Kernel::Inverse, mode);
    let tail = f.tail_power.map(|p| tail_weights(n, Kernel::Inverse, p));
    let values = (0..n)
        .map(|j| {
            let mut s = grid_sum[j];
            if let Some(t) = &tail {
                // Left nodes sit at negative offsets: sum_q f_{-q} / (-(j + q)).
                s += v[n - 1] * t[n - 1 - j] - v[0] * t[j];
            }
            let ji = j as isize;
            let first = f.extended_node(ji + 1) - f.extended_node(ji - 1);
            (0.5 * first + s) / PI
        })
        .collect();
    Ok(ScalarField { grid: f.grid, values, left_limit: 0.0, right_limit: 0.0, tail_power: Some(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;

    #[test]
    fn trigamma_matches_known_values() {
        let t = trigamma_table(64);
        assert!((t[0] - PI * PI / 6.0).abs() < 1e-14);
        assert!((t[1] - (PI * PI / 6.0 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn tail_table_matches_brute_force() {
        let n = 64;
        let t = tail_table(n, Kernel::InverseSquare, 1.0);
        let nr = (n - 1) as f64 / 2.0;
        for &k in &[0usize, 5, 63] {
            // Smallest terms first to keep the rounding below the tolerance.
            let brute: f64 = (1..2_000_000)
                .rev()
                .map(|q| {
                    let q = q as f64;
                    1.0 / ((1.0 + q / nr) * (k as f64 + q).powi(2))
                })
                .sum();
            // Brute-force truncation error is about N / (2 Q^2).
            assert!((t[k] - brute).abs() < 1e-11, "{k}: {} vs {brute}", t[k]);
        }
    }

    #[test]
    fn strategies_agree() {
        let g = Grid1D::new(0.0, 10.0, 256).unwrap();
        let f = ScalarField::from_fn(g, |x| 0.5 + (x / 1.3).atan() / PI, 0.0, 1.0, Some(1.0)).unwrap();
        let a = half_laplacian(&f, Summation::Fft);
        let b = half_laplacian(&f, Summation::Direct(Execution::Sequential));
        let c = half_laplacian(&f, Summation::Direct(Execution::Parallel));
        for i in 0..g.n {
            assert!((a.values[i] - b.values[i]).abs() < 1e-12);
            assert_eq!(b.values[i], c.values[i]);
        }
    }

    #[test]
    fn constants_are_annihilated_exactly() {
        let g = Grid1D::new(0.0, 5.0, 128).unwrap();
        let f = ScalarField::constant(g, 0.35);
        assert!(half_laplacian(&f, Summation::Fft).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn arctan_layer_against_closed_form() {
        let g = Grid1D::new(0.0, 40.0, 4096).unwrap();
        let a = 1.0;
        let f = ScalarField::from_fn(g, |x| 0.5 + (x / a).atan() / PI, 0.0, 1.0, Some(1.0)).unwrap();
        let i1 = half_laplacian(&f, Summation::Fft);
        let worst = (0..g.n)
            .map(|i| {
                let x = g.x(i);
                (i1.values[i] + x / (PI * (x * x + a * a))).abs()
            })
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn hilbert_rejects_non_decaying() {
        let g = Grid1D::new(0.0, 5.0, 64).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!(matches!(hilbert(&f, Summation::Fft), Err(Error::NonDecaying { .. })));
    }
}
