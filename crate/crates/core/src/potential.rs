//! Periodic multi-well potentials `W(u) = sum_k a_k (1 - cos 2 pi k u)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// How a potential is written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialConfig {
    Classical { d: f64 },
    Cosine { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `W(u) = (1 - cos 2 pi u) / (4 pi^2 d)`.
    ClassicalPn { d: f64 },
    /// `W(u) = sum_k a_k (1 - cos 2 pi k u)`, `k = 1, 2, ...`.
    CosineSeries { coefficients: Vec<f64> },
}

/// A periodic potential with exact derivatives and cached `alpha = W''(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub alpha: f64,
    coeffs: Vec<f64>,
}

pub fn make_classical_potential(d: f64) -> Result<PotentialSpec> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("lattice spacing must be positive, got {d}")));
    }
    let coeffs = vec![1.0 / (4.0 * PI * PI * d)];
    Ok(PotentialSpec { kind: PotentialKind::ClassicalPn { d }, alpha: 1.0 / d, coeffs })
}

/// Cosine-series potential. Any finite coefficients are accepted here;
/// [`validate_potential`] decides whether the result is a multi-well potential.
pub fn make_cosine_potential(coefficients: Vec<f64>) -> Result<PotentialSpec> {
    if coefficients.is_empty() {
        return Err(Error::InvalidArgument("cosine series needs at least one coefficient".into()));
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("cosine coefficients must be finite".into()));
    }
    let alpha = alpha_of(&coefficients);
    Ok(PotentialSpec {
        kind: PotentialKind::CosineSeries { coefficients: coefficients.clone() },
        alpha,
        coeffs: coefficients,
    })
}

fn alpha_of(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let w = 2.0 * PI * (i + 1) as f64;
            a * w * w
        })
        .sum()
}

impl PotentialSpec {
    pub fn from_config(cfg: &PotentialConfig) -> Result<Self> {
        match cfg {
            PotentialConfig::Classical { d } => make_classical_potential(*d),
            PotentialConfig::Cosine { coeffs } => make_cosine_potential(coeffs.clone()),
        }
    }

    pub fn to_config(&self) -> PotentialConfig {
        match &self.kind {
            PotentialKind::ClassicalPn { d } => PotentialConfig::Classical { d: *d },
            PotentialKind::CosineSeries { coefficients } => {
                PotentialConfig::Cosine { coeffs: coefficients.clone() }
            }
        }
    }

    /// Coefficients `a_k` of the cosine series (`k` starts at 1).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn w(&self, u: f64) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            s += a * (1.0 - (2.0 * PI * (i + 1) as f64 * u).cos());
        }
        s
    }

    #[inline]
    pub fn dw(&self, u: f64) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            let w = 2.0 * PI * (i + 1) as f64;
            s += a * w * (w * u).sin();
        }
        s
    }

    #[inline]
    pub fn d2w(&self, u: f64) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            let w = 2.0 * PI * (i + 1) as f64;
            s += a * w * w * (w * u).cos();
        }
        s
    }

    /// Upper bound on `|W''|` (sum of the absolute Fourier weights).
    pub fn max_abs_d2w(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let w = 2.0 * PI * (i + 1) as f64;
                a.abs() * w * w
            })
            .sum()
    }
}

/// `W`, `W'` or `W''` at `u`.
pub fn eval_potential(p: &PotentialSpec, u: f64, order: u8) -> Result<f64> {
    match order {
        0 => Ok(p.w(u)),
        1 => Ok(p.dw(u)),
        2 => Ok(p.d2w(u)),
        _ => Err(Error::InvalidArgument(format!("derivative order must be 0, 1 or 2, got {order}"))),
    }
}

/// Sample-based check of periodicity, zero wells, positivity between wells
/// and non-degeneracy of the minima.
pub fn validate_potential(p: &PotentialSpec, n_samples: usize) -> Result<ValidationReport> {
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 samples, got {n_samples}")));
    }
    let us: Vec<f64> = (0..n_samples).map(|i| i as f64 / n_samples as f64).collect();

    let periodicity = us.iter().fold(0.0_f64, |m, &u| m.max((p.w(u + 1.0) - p.w(u)).abs()));
    let wells = (-2..=2).fold(0.0_f64, |m, k| m.max(p.w(k as f64).abs()));
    // Worst shortfall below zero strictly inside the period.
    let positivity = us[1..].iter().fold(f64::NEG_INFINITY, |m, &u| m.max(-p.w(u)));
    let alpha = p.d2w(0.0);

    let mut report = ValidationReport::new("potential");
    report.push("period-1", periodicity, 1e-12, periodicity <= 1e-12);
    report.push("zero-at-integers", wells, 1e-12, wells <= 1e-12);
    report.push("positive-between-wells", positivity, 0.0, positivity < 0.0);
    report.push("nondegenerate-minimum", alpha, 0.0, alpha > 0.0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        let p = make_classical_potential(1.0).unwrap();
        assert_eq!(p.w(0.0), 0.0);
        assert!((p.w(0.5) - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!((p.alpha - 1.0).abs() < 1e-15);
        assert!((p.dw(0.75) + 1.0 / (2.0 * PI)).abs() < 1e-15);
        let p2 = make_classical_potential(2.0).unwrap();
        assert!((eval_potential(&p2, 0.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(make_classical_potential(0.0).is_err());
        assert!(make_classical_potential(-1.0).is_err());
    }

    #[test]
    fn derivative_vanishes_on_integers() {
        let p = make_cosine_potential(vec![0.03, -0.004, 0.001]).unwrap();
        for k in -3..=3 {
            assert!(p.dw(k as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn order_out_of_range_is_rejected() {
        let p = make_classical_potential(1.0).unwrap();
        assert!(eval_potential(&p, 0.1, 3).is_err());
    }

    #[test]
    fn alpha_matches_finite_difference() {
        let p = make_classical_potential(1.0).unwrap();
        let h = 1e-4;
        let fd = (p.dw(h) - p.dw(-h)) / (2.0 * h);
        assert!((fd - p.alpha).abs() / p.alpha < 1e-6);
    }

    #[test]
    fn derivative_finite_difference_is_second_order() {
        let p = make_cosine_potential(vec![0.02, 0.005]).unwrap();
        let u = 0.37;
        let err = |h: f64| ((p.w(u + h) - p.w(u - h)) / (2.0 * h) - p.dw(u)).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn validation_reports() {
        let p = make_classical_potential(1.0).unwrap();
        let r = validate_potential(&p, 1024).unwrap();
        assert!(r.all_pass());

        let bad = make_cosine_potential(vec![-0.01]).unwrap();
        let r = validate_potential(&bad, 1024).unwrap();
        assert!(!r.row("nondegenerate-minimum").unwrap().pass);

        let same = make_cosine_potential(vec![1.0 / (4.0 * PI * PI)]).unwrap();
        assert_eq!(validate_potential(&same, 1024).unwrap(), r_classical());

        fn r_classical() -> ValidationReport {
            validate_potential(&make_classical_potential(1.0).unwrap(), 1024).unwrap()
        }
        assert!(validate_potential(&p, 8).is_err());
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"kind":"classical","d":2.0}"#;
        let cfg: PotentialConfig = serde_json::from_str(json).unwrap();
        let p = PotentialSpec::from_config(&cfg).unwrap();
        assert_eq!(p.alpha, 0.5);
        let cos: PotentialConfig = serde_json::from_str(r#"{"kind":"cosine","coeffs":[0.1,0.2]}"#).unwrap();
        assert_eq!(cos, PotentialConfig::Cosine { coeffs: vec![0.1, 0.2] });
        assert_eq!(serde_json::to_string(&p.to_config()).unwrap(), json);
    }
}
