//! Closed-form test profiles and their exact derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Grid1D, ScalarField};

/// Monotone initial profiles available to the studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `(1 + tanh(x / width)) / 2`.
    Logistic { width: f64 },
    /// `1/2 + atan(x / width) / pi`.
    Arctan { width: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Logistic { width: 1.0 }
    }
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Profile::Logistic { width } => logistic(x / width),
            Profile::Arctan { width } => 0.5 + (x / width).atan() / PI,
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            Profile::Logistic { width } => logistic_slope(x / width) / width,
            Profile::Arctan { width } => width / (PI * (x * x + width * width)),
        }
    }

    pub fn curvature(&self, x: f64) -> f64 {
        match *self {
            Profile::Logistic { width } => logistic_curvature(x / width) / (width * width),
            Profile::Arctan { width } => {
                let d = x * x + width * width;
                -2.0 * width * x / (PI * d * d)
            }
        }
    }

    /// Inverse of the profile on `(0, 1)`.
    pub fn inverse(&self, level: f64) -> f64 {
        match *self {
            Profile::Logistic { width } => width * (2.0 * level - 1.0).atanh(),
            Profile::Arctan { width } => width * (PI * (level - 0.5)).tan(),
        }
    }

    /// Sup of the slope (the Lipschitz constant).
    pub fn max_slope(&self) -> f64 {
        self.slope(0.0)
    }

    /// Sampled profile with limits 0 and 1.
    pub fn sample(&self, grid: Grid1D) -> Result<ScalarField> {
        let tail = match self {
            Profile::Logistic { .. } => None,
            Profile::Arctan { .. } => Some(1.0),
        };
        ScalarField::from_fn(grid, |x| self.value(x), 0.0, 1.0, tail)
    }
}

/// `(1 + tanh x) / 2`.
pub fn logistic(x: f64) -> f64 {
    0.5 * (1.0 + x.tanh())
}

pub fn logistic_slope(x: f64) -> f64 {
    let s = 1.0 / x.cosh();
    0.5 * s * s
}

pub fn logistic_curvature(x: f64) -> f64 {
    let s = 1.0 / x.cosh();
    -s * s * x.tanh()
}

/// Exact `I1` of the Poisson-kernel layer `1/2 + atan(x/a)/pi`.
pub fn arctan_layer_i1(x: f64, a: f64) -> f64 {
    -x / (PI * (x * x + a * a))
}

/// `exp(-x^2 / (2 s^2))`.
pub fn gaussian(x: f64, s: f64) -> f64 {
    (-0.5 * (x / s).powi(2)).exp()
}

pub fn gaussian_slope(x: f64, s: f64) -> f64 {
    -x / (s * s) * gaussian(x, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses_and_slopes() {
        for p in [Profile::Logistic { width: 0.7 }, Profile::Arctan { width: 2.0 }] {
            for &l in &[0.1, 0.5, 0.93] {
                assert!((p.value(p.inverse(l)) - l).abs() < 1e-13);
            }
            let h = 1e-5;
            for &x in &[-1.0, 0.2, 3.0] {
                let fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
                assert!((fd - p.slope(x)).abs() < 1e-9);
                let fd2 = (p.slope(x + h) - p.slope(x - h)) / (2.0 * h);
                assert!((fd2 - p.curvature(x)).abs() < 1e-8);
            }
        }
        assert!((Profile::Logistic { width: 1.0 }.inverse(0.25) + 0.549_306_144_334_054_9).abs() < 1e-12);
    }
}
