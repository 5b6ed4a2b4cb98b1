//! Time integrators for the microscopic phase-field equation and the
//! macroscopic density equation.

pub mod macroscopic;
pub mod micro;

pub use macroscopic::{macro_dt_bound, macro_init, macro_run, macro_step, MacroRun, MacroState};
pub use micro::{micro_dt_bounds, micro_init, micro_init_layered, micro_run, micro_step, MicroRun, MicroState};

/// Step sizes that land exactly on `target` from `t` with steps no longer than `dt`.
pub(crate) fn steps_to(t: f64, target: f64, dt: f64) -> (usize, f64) {
    let span = target - t;
    if span <= 0.0 {
        return (0, 0.0);
    }
    let n = (span / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

/// Sorted snapshot targets in `(0, t_end]`, always ending with `t_end`.
pub(crate) fn snapshot_targets(t_end: f64, times: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    if t_end > 0.0 {
        out.push(t_end);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
