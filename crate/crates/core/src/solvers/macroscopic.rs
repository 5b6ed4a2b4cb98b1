//! The macroscopic equation `u_t = c0 u_x I1[u]`, advanced on the density
//! `f = u_x` in conservative form `f_t = c0 (f H[f])_x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::nonlocal::lattice::{hilbert, Summation};
use crate::numerics::{central_derivative, cumulative_integral};

use super::{snapshot_targets, steps_to};

/// Macroscopic state: `u` is rebuilt from the density `f` after every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub u: ScalarField,
    pub f: ScalarField,
    pub t: f64,
    pub c0: f64,
    /// `inf u0`, the left limit `u` is rebuilt from.
    pub base: f64,
}

impl MacroState {
    /// Build from a density and the far-left level.
    pub fn from_density(f: ScalarField, base: f64, c0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::InvalidArgument(format!("c0 = {c0} must be positive")));
        }
        if f.left_limit != 0.0 || f.right_limit != 0.0 {
            return Err(Error::NonDecaying { left: f.left_limit, right: f.right_limit });
        }
        if let Some(i) = f.values.iter().position(|&v| v < 0.0) {
            return Err(Error::NonMonotone { index: i, drop: -f.values[i] });
        }
        let u = cumulative_integral(&f, base);
        Ok(MacroState { u, f, t: 0.0, c0, base })
    }
}

/// Start from a non-decreasing profile; its density is the central difference.
pub fn macro_init(u0: &ScalarField, c0: f64) -> Result<MacroState> {
    u0.check_monotone(1e-12 * u0.max_abs().max(1.0))?;
    let mut f = central_derivative(u0);
    // One-sided edge stencils may undershoot on flat tails.
    for v in &mut f.values {
        *v = v.max(0.0);
    }
    MacroState::from_density(f, u0.left_limit, c0)
}

/// Pressure `H[f]` at the nodes.
fn pressure(f: &ScalarField) -> Result<Vec<f64>> {
    Ok(hilbert(f, Summation::Fft)?.values)
}

/// `0.5 h / (c0 max|H[f]|)`.
pub fn macro_dt_bound(s: &MacroState) -> Result<f64> {
    let hf = pressure(&s.f)?;
    Ok(bound_from(&s.f, &hf, s.c0))
}

fn bound_from(f: &ScalarField, hf: &[f64], c0: f64) -> f64 {
    let m = hf.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        f64::INFINITY
    } else {
        0.5 * f.grid.spacing() / (c0 * m)
    }
}

/// `-d/dx` of the upwind flux `-c0 f H[f]`; zero flux through the grid edges.
fn rate(f: &[f64], hf: &[f64], c0: f64, h: f64) -> Vec<f64> {
    let n = f.len();
    // Face j sits between nodes j and j + 1; velocity is -c0 H[f].
    let flux: Vec<f64> = (0..n - 1)
        .map(|j| {
            let a = -0.5 * c0 * (hf[j] + hf[j + 1]);
            if a > 0.0 {
                a * f[j]
            } else {
                a * f[j + 1]
            }
        })
        .collect();
    (0..n)
        .map(|j| {
            let right = if j + 1 < n { flux[j] } else { 0.0 };
            let left = if j > 0 { flux[j - 1] } else { 0.0 };
            -(right - left) / h
        })
        .collect()
}

/// Clip negative densities and rescale the positive part to keep the sum.
fn clip_preserving_mass(f: &mut [f64]) {
    let total: f64 = f.iter().sum();
    if f.iter().all(|&v| v >= 0.0) {
        return;
    }
    for v in f.iter_mut() {
        *v = v.max(0.0);
    }
    let positive: f64 = f.iter().sum();
    if positive > 0.0 && total > 0.0 {
        let k = total / positive;
        for v in f.iter_mut() {
            *v *= k;
        }
    }
}

/// One Heun (explicit RK2) step.
pub fn macro_step(s: &MacroState, dt: f64) -> Result<MacroState> {
    let hf = pressure(&s.f)?;
    let bound = bound_from(&s.f, &hf, s.c0);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    advance(s, dt, &hf)
}

fn advance(s: &MacroState, dt: f64, hf: &[f64]) -> Result<MacroState> {
    let h = s.f.grid.spacing();
    let f0 = &s.f.values;
    let k1 = rate(f0, hf, s.c0, h);
    let stage: Vec<f64> = f0.iter().zip(&k1).map(|(f, k)| f + dt * k).collect();
    let stage_field = s.f.with_values(stage);
    let k2 = rate(&stage_field.values, &pressure(&stage_field)?, s.c0, h);
    let mut next: Vec<f64> = (0..f0.len()).map(|j| f0[j] + 0.5 * dt * (k1[j] + k2[j])).collect();
    clip_preserving_mass(&mut next);
    let f = s.f.with_values(next);
    let u = cumulative_integral(&f, s.base);
    Ok(MacroState { u, f, t: s.t + dt, c0: s.c0, base: s.base })
}

/// Output of [`macro_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRun {
    pub state: MacroState,
    /// The initial state followed by one state per requested time (and `T`).
    pub snapshots: Vec<MacroState>,
    /// Largest step taken and the smallest bound seen.
    pub dt: f64,
    pub dt_bound: f64,
    pub steps: usize,
}

/// Step to `t_end`; each step uses the current CFL bound, shortened to land on
/// the snapshot times.
pub fn macro_run(s: &MacroState, t_end: f64, snapshot_times: &[f64]) -> Result<MacroRun> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time {t_end} must be non-negative")));
    }
    let mut state = s.clone();
    let mut run = MacroRun { state: s.clone(), snapshots: vec![s.clone()], dt: 0.0, dt_bound: f64::INFINITY, steps: 0 };
    let t0 = s.t;
    for target in snapshot_targets(t_end, snapshot_times) {
        let target = t0 + target;
        while state.t < target {
            let hf = pressure(&state.f)?;
            let bound = bound_from(&state.f, &hf, state.c0);
            run.dt_bound = run.dt_bound.min(bound);
            let (_, dt) = steps_to(state.t, target, bound);
            let last = steps_to(state.t, target, bound).0 == 1;
            state = advance(&state, dt, &hf)?;
            if last {
                state.t = target;
            }
            run.dt = run.dt.max(dt);
            run.steps += 1;
        }
        run.snapshots.push(state.clone());
    }
    run.state = state;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;
    use crate::numerics::trapezoid_integral;

    fn bump(g: Grid1D) -> ScalarField {
        ScalarField::from_fn(g, |x| 0.5 / x.cosh().powi(2), 0.0, 0.0, None).unwrap()
    }

    #[test]
    fn zero_density_is_unchanged() {
        let g = Grid1D::new(0.0, 4.0, 128).unwrap();
        let s = MacroState::from_density(ScalarField::constant(g, 0.0), 0.0, 1.0).unwrap();
        let run = macro_run(&s, 1.0, &[]).unwrap();
        assert!(run.state.f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_bump_keeps_center_and_mass() {
        let g = Grid1D::new(0.0, 8.0, 512).unwrap();
        let s = MacroState::from_density(bump(g), 0.0, 1.0).unwrap();
        let m0 = trapezoid_integral(&s.f).unwrap();
        let run = macro_run(&s, 0.5, &[0.25]).unwrap();
        let f = &run.state.f;
        let m1 = trapezoid_integral(f).unwrap();
        let com: f64 = f.values.iter().enumerate().map(|(i, v)| g.x(i) * v).sum::<f64>() / f.values.iter().sum::<f64>();
        assert!(com.abs() < 1e-10, "{com}");
        assert!(((m1 - m0) / m0).abs() < 1e-3);
        assert!(run.state.f.max() < s.f.max());
        assert_eq!(run.snapshots.len(), 3);
        assert_eq!(run.state.t, 0.5);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = Grid1D::new(0.0, 8.0, 256).unwrap();
        let s = MacroState::from_density(bump(g), 0.0, 1.0).unwrap();
        let b = macro_dt_bound(&s).unwrap();
        assert!(macro_step(&s, 0.9 * b).is_ok());
        assert!(matches!(macro_step(&s, 2.0 * b), Err(Error::CflViolation { .. })));
    }
}
