//! Level points of monotone profiles, layered reconstruction and the discrete
//! dislocation dynamics `y_i' = (c0/pi) sum_{j != i} 1/(y_i - y_j)`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::field::{Grid1D, ScalarField};
use crate::layer::LayerProfile;
use crate::nonlocal::inverse_square_sum;
use crate::report::ValidationReport;

/// Level points `x_i = inf { x : v(x) = eps i }`, `i = M..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSystem {
    pub epsilon: f64,
    pub delta: f64,
    pub positions: Vec<f64>,
    /// `M_eps`, the index of the first particle.
    pub m_index: i64,
    /// `eps * M_eps`.
    pub base_level: f64,
}

/// Guard against `0.95 / 0.05 = 18.999...` in the index bounds.
const INDEX_SLACK: f64 = 1e-9;

/// `(M_eps, N_eps) = (ceil((inf v + eps)/eps), floor((sup v - eps)/eps))`.
pub fn index_range(inf: f64, sup: f64, eps: f64) -> (i64, i64) {
    let m = ((inf + eps) / eps - INDEX_SLACK).ceil() as i64;
    let n = ((sup - eps) / eps + INDEX_SLACK).floor() as i64;
    (m, n)
}

impl ParticleSystem {
    pub fn from_positions(positions: Vec<f64>, epsilon: f64, delta: f64, m_index: i64) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("eps = {epsilon}, delta = {delta} must be positive")));
        }
        check_increasing(&positions)?;
        Ok(ParticleSystem { epsilon, delta, positions, m_index, base_level: epsilon * m_index as f64 })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `N_eps`.
    pub fn n_index(&self) -> i64 {
        self.m_index + self.positions.len() as i64 - 1
    }

    /// Level `eps i` of particle `k` (0-based).
    pub fn level(&self, k: usize) -> f64 {
        self.epsilon * (self.m_index + k as i64) as f64
    }

    pub fn min_gap(&self) -> f64 {
        self.positions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

fn check_increasing(y: &[f64]) -> Result<()> {
    for (i, w) in y.windows(2).enumerate() {
        if w[1] == w[0] {
            return Err(Error::CoincidentPositions(i));
        }
        if w[1] < w[0] {
            return Err(Error::InvalidArgument(format!("positions decrease at index {i}")));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite position".into()));
    }
    Ok(())
}

/// Leftmost point where the piecewise-linear interpolant of `v` reaches `level`,
/// with the algebraic far-field tail inverted outside the grid.
fn locate_level(v: &ScalarField, level: f64, start: usize) -> Result<(f64, usize)> {
    let vals = &v.values;
    let n = vals.len();
    let g = &v.grid;
    let Some(off) = vals[start..].iter().position(|&y| y >= level) else {
        return far_field_level(v, level, false).map(|x| (x, n - 1));
    };
    let i = start + off;
    if i == 0 {
        if vals[0] == level {
            return Ok((g.x(0), 0));
        }
        return far_field_level(v, level, true).map(|x| (x, 0));
    }
    let t = (level - vals[i - 1]) / (vals[i] - vals[i - 1]);
    Ok((g.x(i - 1) + t * g.spacing(), i - 1))
}

fn far_field_level(v: &ScalarField, level: f64, left: bool) -> Result<f64> {
    let g = &v.grid;
    let (limit, edge) = if left { (v.left_limit, v.values[0]) } else { (v.right_limit, v.values[g.n - 1]) };
    let ratio = (level - limit) / (edge - limit);
    match v.tail_power {
        Some(p) if ratio > 0.0 && ratio < 1.0 => {
            let dist = g.half_width * ratio.powf(-1.0 / p);
            Ok(if left { g.center - dist } else { g.center + dist })
        }
        _ => Err(Error::InvalidArgument(format!(
            "level {level} is not attained on the grid or its far-field tail"
        ))),
    }
}

/// Extract the level points of a non-decreasing field.
pub fn level_points(v: &ScalarField, eps: f64, delta: f64) -> Result<ParticleSystem> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps}, delta = {delta} must be positive")));
    }
    let scale = v.max_abs().max(1.0);
    v.check_monotone(1e-12 * scale)?;
    let inf = v.left_limit.min(v.min());
    let sup = v.right_limit.max(v.max());
    if sup - inf <= 0.0 {
        return Err(Error::EmptyParticleSystem("profile is constant".into()));
    }
    let (m, n) = index_range(inf, sup, eps);
    if m > n {
        return Err(Error::EmptyParticleSystem(format!(
            "eps = {eps} too large for the range [{inf}, {sup}] (M = {m} > N = {n})"
        )));
    }
    let mut positions = Vec::with_capacity((n - m + 1) as usize);
    let mut cursor = 0;
    for i in m..=n {
        let (x, at) = locate_level(v, eps * i as f64, cursor)?;
        cursor = at;
        positions.push(x);
    }
    // Levels are distinct, so positions only coincide if v jumps.
    ParticleSystem::from_positions(positions, eps, delta, m)
}

/// Centres of the layers of a layered field: the points where `u` crosses
/// `left_limit + eps (k + 1/2)`, `k = 0, 1, ...` below `right_limit`.
///
/// In `sum eps phi((x - x_i)/(eps delta)) + eps M` the layer of `x_i` carries
/// `u` through `eps i + eps/2`, so these points recover the `x_i` to `O(eps delta)`.
pub fn layer_centers(u: &ScalarField, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    let count = ((u.right_limit - u.left_limit) / eps + INDEX_SLACK).floor();
    if !(count >= 1.0) {
        return Err(Error::EmptyParticleSystem(format!(
            "limits {} / {} span less than one level of {eps}",
            u.left_limit, u.right_limit
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cursor = 0;
    for k in 0..count as usize {
        let (x, at) = locate_level(u, u.left_limit + eps * (k as f64 + 0.5), cursor)?;
        cursor = at;
        out.push(x);
    }
    Ok(out)
}

/// Gap bounds `eps/L <= x_{i+1} - x_i <= eps/a` for pairs inside `window`.
pub fn spacing_bounds_check(ps: &ParticleSystem, lip: f64, a: f64, window: (f64, f64)) -> ValidationReport {
    let eps = ps.epsilon;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for w in ps.positions.windows(2) {
        if w[0] >= window.0 && w[1] <= window.1 {
            let gap = w[1] - w[0];
            lo = lo.min(gap);
            hi = hi.max(gap);
        }
    }
    let mut report = ValidationReport::new("particle-spacing");
    if lo.is_infinite() {
        report.warn("no particle pair inside the window");
        return report;
    }
    let slack = 1e-9;
    report.push("min-gap-vs-eps/L", lo, eps / lip, lo >= eps / lip * (1.0 - slack));
    report.push("max-gap-vs-eps/a", hi, eps / a, hi <= eps / a * (1.0 + slack));
    report
}

/// `sum_{i != i0} eps^2 / (x_i - x)^2 <= (4 pi^2 / 3) L^2` at each probe.
pub fn inverse_square_check(ps: &ParticleSystem, lip: f64, probes: &[f64]) -> Result<ValidationReport> {
    let bound = 4.0 * PI * PI / 3.0 * lip * lip;
    let mut worst = 0.0_f64;
    for &x in probes {
        worst = worst.max(inverse_square_sum(ps, x)?);
    }
    let mut report = ValidationReport::new("inverse-square-sum");
    report.push("max-sum-vs-4pi^2L^2/3", worst, bound, worst <= bound);
    Ok(report)
}

/// `sum_i eps phi((x - x_i)/(eps delta)) + eps M` at a point.
pub fn reconstruct_at(ps: &ParticleSystem, layer: &LayerProfile, x: f64) -> f64 {
    let w = ps.epsilon * ps.delta;
    let s: f64 = ps.positions.iter().map(|&xi| layer.value((x - xi) / w)).sum();
    ps.epsilon * s + ps.base_level
}

/// Layered reconstruction on `grid`; limits `eps M` and `eps (N + 1)`.
pub fn reconstruct(ps: &ParticleSystem, layer: &LayerProfile, grid: Grid1D) -> Result<ScalarField> {
    if ps.is_empty() {
        return Err(Error::EmptyParticleSystem("nothing to reconstruct".into()));
    }
    let values = map_indexed(grid.n, Execution::default(), |i| reconstruct_at(ps, layer, grid.x(i)));
    let right = ps.epsilon * (ps.n_index() + 1) as f64;
    ScalarField::new(grid, values, ps.base_level, right, Some(1.0))
}

/// `y_i' = (c0/pi) sum_{j != i} 1/(y_i - y_j)`.
pub fn ddd_rhs(positions: &[f64], c0: f64) -> Result<Vec<f64>> {
    check_increasing(positions)?;
    Ok(ddd_velocity(positions, c0, Execution::default()))
}

fn ddd_velocity(y: &[f64], c0: f64, exec: Execution) -> Vec<f64> {
    let k = c0 / PI;
    map_indexed(y.len(), exec, |i| {
        let yi = y[i];
        let s: f64 = y.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &yj)| 1.0 / (yi - yj)).sum();
        k * s
    })
}

/// Sampled DDD trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub dt: f64,
    pub dt_bound: f64,
}

impl Trajectory {
    pub fn final_positions(&self) -> &[f64] {
        self.positions.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// CSV with header `t,y_1,...,y_N`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n = self.positions.first().map_or(0, |p| p.len());
        let header: Vec<String> = std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("y_{i}"))).collect();
        writeln!(out, "{}", header.join(","))?;
        for (t, row) in self.times.iter().zip(&self.positions) {
            let cells: Vec<String> = std::iter::once(format!("{t:e}")).chain(row.iter().map(|y| format!("{y:e}"))).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Repulsion stability bound `0.1 (min gap)^2 pi / c0`.
pub fn ddd_dt_bound(positions: &[f64], c0: f64) -> f64 {
    let gap = positions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    0.1 * gap * gap * PI / c0
}

fn rk4_step(y: &[f64], c0: f64, dt: f64, exec: Execution) -> Vec<f64> {
    let axpy = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, k)| x + s * k).collect() };
    let k1 = ddd_velocity(y, c0, exec);
    let k2 = ddd_velocity(&axpy(y, &k1, 0.5 * dt), c0, exec);
    let k3 = ddd_velocity(&axpy(y, &k2, 0.5 * dt), c0, exec);
    let k4 = ddd_velocity(&axpy(y, &k3, dt), c0, exec);
    (0..y.len()).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Classical RK4 up to `t_end`, sampled at `sample_times` (plus `0` and `t_end`).
///
/// Steps are shortened to land exactly on the sample times. Ordering is
/// checked after every step.
pub fn ddd_integrate(
    positions0: &[f64],
    c0: f64,
    dt: f64,
    t_end: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    check_increasing(positions0)?;
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt}, T = {t_end}")));
    }
    let bound = if positions0.len() > 1 { ddd_dt_bound(positions0, c0) } else { f64::INFINITY };
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let mut targets: Vec<f64> = sample_times.iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let exec = Execution::Sequential;
    let mut y = positions0.to_vec();
    let mut t = 0.0;
    let mut step = 0;
    let mut traj = Trajectory { times: vec![0.0], positions: vec![y.clone()], dt, dt_bound: bound };
    for &target in &targets {
        if target <= 0.0 {
            continue;
        }
        let n_steps = ((target - t) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = (target - t) / n_steps as f64;
        for _ in 0..n_steps {
            y = rk4_step(&y, c0, h, exec);
            step += 1;
            for (i, w) in y.windows(2).enumerate() {
                if !(w[1] > w[0]) {
                    return Err(Error::OrderingViolation { step, index: i, gap: w[1] - w[0] });
                }
            }
        }
        t = target;
        traj.times.push(t);
        traj.positions.push(y.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Profile;

    #[test]
    fn index_range_guards_rounding() {
        assert_eq!(index_range(0.0, 1.0, 0.05), (1, 19));
        assert_eq!(index_range(0.0, 1.0, 0.5), (1, 1));
        assert_eq!(index_range(0.0, 1.0, 0.25), (1, 3));
    }

    #[test]
    fn logistic_level_points() {
        let g = Grid1D::new(0.0, 20.0, 1 << 16).unwrap();
        let v = Profile::Logistic { width: 1.0 }.sample(g).unwrap();
        let ps = level_points(&v, 0.5, 1.0).unwrap();
        assert_eq!((ps.m_index, ps.n_index()), (1, 1));
        assert!(ps.positions[0].abs() < 1e-9);
        let ps = level_points(&v, 0.25, 1.0).unwrap();
        let expect = [-0.549_306_144_334_054_9, 0.0, 0.549_306_144_334_054_9];
        for (x, e) in ps.positions.iter().zip(expect) {
            assert!((x - e).abs() < 1e-6, "{x} vs {e}");
        }
        let c = ScalarField::constant(g, 0.3);
        assert!(matches!(level_points(&c, 0.1, 1.0), Err(Error::EmptyParticleSystem(_))));
    }

    #[test]
    fn decreasing_profile_is_rejected() {
        let g = Grid1D::new(0.0, 5.0, 64).unwrap();
        let v = ScalarField::from_fn(g, |x| -x.tanh(), 1.0, -1.0, None).unwrap();
        assert!(matches!(level_points(&v, 0.1, 1.0), Err(Error::NonMonotone { .. })));
    }

    #[test]
    fn ddd_rhs_examples() {
        let c0 = 2.0;
        let v = ddd_rhs(&[-0.5, 0.5], c0).unwrap();
        assert!((v[0] + c0 / PI).abs() < 1e-15 && (v[1] - c0 / PI).abs() < 1e-15);
        let a = 0.7;
        let v = ddd_rhs(&[-a, 0.0, a], c0).unwrap();
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 3.0 * c0 / (2.0 * PI * a)).abs() < 1e-14);
        assert!(matches!(ddd_rhs(&[0.0, 0.0], 1.0), Err(Error::CoincidentPositions(0))));
    }

    #[test]
    fn two_body_closed_form() {
        let traj = ddd_integrate(&[-0.5, 0.5], PI, 1e-3, 1.0, &[]).unwrap();
        let y = traj.final_positions();
        let s = y[1] - y[0];
        assert!((s - 5f64.sqrt()).abs() / 5f64.sqrt() < 1e-6, "{s}");
        assert!((y[0] + y[1]).abs() < 1e-10);
    }

    #[test]
    fn single_body_is_stationary_and_cfl_is_enforced() {
        let traj = ddd_integrate(&[0.3], 1.0, 0.1, 1.0, &[0.5]).unwrap();
        assert_eq!(traj.final_positions(), &[0.3]);
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0]);
        assert!(matches!(ddd_integrate(&[0.0, 0.1], PI, 1e-2, 1.0, &[]), Err(Error::CflViolation { .. })));
    }
}
