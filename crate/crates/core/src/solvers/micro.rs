//! Explicit stepping of `delta u_t = I1[u] - W'(u / eps) / delta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid1D, ScalarField};
use crate::layer::LayerProfile;
use crate::nonlocal::lattice::{half_laplacian, Summation};
use crate::particles::{reconstruct, ParticleSystem};
use crate::potential::PotentialSpec;

use super::{snapshot_targets, steps_to};

/// Solution of the microscopic equation at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroState {
    pub u: ScalarField,
    pub epsilon: f64,
    pub delta: f64,
    pub t: f64,
}

fn check_scales(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps}, delta = {delta} must be positive")));
    }
    Ok(())
}

/// Start from sampled data; `u0` must be non-decreasing.
pub fn micro_init(u0: &ScalarField, eps: f64, delta: f64) -> Result<MicroState> {
    check_scales(eps, delta)?;
    u0.check_monotone(1e-12 * u0.max_abs().max(1.0))?;
    Ok(MicroState { u: u0.clone(), epsilon: eps, delta, t: 0.0 })
}

/// Start from the layered superposition `sum eps phi((x - x_i)/(eps delta)) + eps M`.
pub fn micro_init_layered(ps: &ParticleSystem, layer: &LayerProfile, grid: Grid1D) -> Result<MicroState> {
    let u = reconstruct(ps, layer, grid)?;
    micro_init(&u, ps.epsilon, ps.delta)
}

/// `(0.2 eps delta^2 / max|W''|, 0.5 delta h / pi)`: reaction and transport limits.
pub fn micro_dt_bounds(s: &MicroState, p: &PotentialSpec) -> (f64, f64) {
    let reaction = 0.2 * s.epsilon * s.delta * s.delta / p.max_abs_d2w();
    let transport = 0.5 * s.delta * s.u.grid.spacing() / PI;
    (reaction, transport)
}

fn dt_bound(s: &MicroState, p: &PotentialSpec) -> f64 {
    let (a, b) = micro_dt_bounds(s, p);
    a.min(b)
}

/// One forward-Euler step. The two edge nodes and the far-field limits are held.
pub fn micro_step(s: &MicroState, p: &PotentialSpec, dt: f64) -> Result<MicroState> {
    let bound = dt_bound(s, p);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    Ok(advance(s, p, dt))
}

fn advance(s: &MicroState, p: &PotentialSpec, dt: f64) -> MicroState {
    let i1 = half_laplacian(&s.u, Summation::Fft);
    let (eps, delta) = (s.epsilon, s.delta);
    let n = s.u.grid.n;
    let mut values = s.u.values.clone();
    let k = dt / delta;
    for j in 1..n - 1 {
        let u = s.u.values[j];
        values[j] = u + k * (i1.values[j] - p.dw(u / eps) / delta);
    }
    MicroState { u: s.u.with_values(values), epsilon: eps, delta, t: s.t + dt }
}

/// Output of [`micro_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroRun {
    pub state: MicroState,
    /// The initial state followed by one state per requested time (and `T`).
    pub snapshots: Vec<MicroState>,
    /// Largest step taken and the bound it was taken under.
    pub dt: f64,
    pub dt_bound: f64,
    pub steps: usize,
    /// Largest decrease between neighbouring nodes over every accepted step.
    pub worst_monotonicity_violation: f64,
    /// Range of `u` over every accepted step.
    pub min_value: f64,
    pub max_value: f64,
}

/// Step to `t_end` with the largest admissible `dt`, recording snapshots.
pub fn micro_run(s: &MicroState, p: &PotentialSpec, t_end: f64, snapshot_times: &[f64]) -> Result<MicroRun> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("final time {t_end} must be non-negative")));
    }
    let bound = dt_bound(s, p);
    let mut state = s.clone();
    let mut run = MicroRun {
        state: s.clone(),
        snapshots: vec![s.clone()],
        dt: 0.0,
        dt_bound: bound,
        steps: 0,
        worst_monotonicity_violation: s.u.worst_monotonicity_violation(),
        min_value: s.u.min(),
        max_value: s.u.max(),
    };
    let t0 = s.t;
    for target in snapshot_targets(t_end, snapshot_times) {
        let (n, dt) = steps_to(state.t - t0, target, bound);
        for _ in 0..n {
            state = advance(&state, p, dt);
            run.steps += 1;
            run.worst_monotonicity_violation =
                run.worst_monotonicity_violation.max(state.u.worst_monotonicity_violation());
            run.min_value = run.min_value.min(state.u.min());
            run.max_value = run.max_value.max(state.u.max());
        }
        run.dt = run.dt.max(dt);
        state.t = t0 + target;
        run.snapshots.push(state.clone());
    }
    run.state = state;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_classical_potential;

    #[test]
    fn integer_levels_are_stationary() {
        let p = make_classical_potential(1.0).unwrap();
        let g = Grid1D::new(0.0, 2.0, 256).unwrap();
        let eps = 0.1;
        let s = micro_init(&ScalarField::constant(g, 3.0 * eps), eps, 0.1).unwrap();
        let dt = dt_bound(&s, &p);
        let next = micro_step(&s, &p, dt).unwrap();
        let change = next.u.values.iter().zip(&s.u.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(change <= 1e-14, "{change}");
        assert!(matches!(micro_step(&s, &p, 2.0 * dt), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let p = make_classical_potential(1.0).unwrap();
        let g = Grid1D::new(0.0, 2.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |x| 0.5 * (1.0 + x.tanh()), 0.0, 1.0, None).unwrap();
        let s = micro_init(&u, 0.1, 0.1).unwrap();
        let run = micro_run(&s, &p, 0.0, &[]).unwrap();
        assert_eq!(run.state, s);
        assert_eq!(run.steps, 0);
    }

    #[test]
    fn decreasing_data_is_rejected() {
        let g = Grid1D::new(0.0, 2.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |x| -x, 2.0, -2.0, None).unwrap();
        assert!(matches!(micro_init(&u, 0.1, 0.1), Err(Error::NonMonotone { .. })));
    }
}
