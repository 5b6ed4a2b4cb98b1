//! Study drivers. Each `run_*` function computes a study from a configuration
//! and returns its data; [`run_study`] additionally writes CSV tables and a
//! JSON manifest into an output directory.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::field::{Grid1D, ScalarField};
use crate::io::{read_positions, write_columns};
use crate::layer::{
    classical_layer_exact, compute_c0, nabarro_closed_form, solve_corrector_with, solve_layer_profile_with,
    verify_layer_tails, CorrectorProfile, LayerProfile, RelaxationOptions,
};
use crate::nonlocal::{
    i1_apply, particle_sum_full, particle_sum_truncated, short_window_sum, spectral, OperatorBackend,
};
use crate::numerics::{sup_distance, trapezoid_integral};
use crate::particles::{
    ddd_dt_bound, ddd_integrate, layer_centers, level_points, reconstruct, reconstruct_at, ParticleSystem, Trajectory,
};
use crate::potential::{make_classical_potential, PotentialKind, PotentialSpec};
use crate::profiles::Profile;
use crate::quadrature::reference_half_laplacian;
use crate::report::{write_report, ConvergenceReport, ConvergenceRow, ValidationReport};
use crate::solvers::{macro_run, micro_dt_bounds, micro_init_layered, micro_run, MacroRun, MacroState, MicroRun};

use super::config::SimulationConfig;

/// The studies reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Layer,
    C0,
    Micro,
    Macro,
    Ddd,
    Approx,
    Reconstruct,
    Converge,
    Orowan,
}

impl StudyKind {
    pub const ALL: [StudyKind; 9] = [
        StudyKind::Layer,
        StudyKind::C0,
        StudyKind::Micro,
        StudyKind::Macro,
        StudyKind::Ddd,
        StudyKind::Approx,
        StudyKind::Reconstruct,
        StudyKind::Converge,
        StudyKind::Orowan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Layer => "layer",
            StudyKind::C0 => "c0",
            StudyKind::Micro => "micro",
            StudyKind::Macro => "macro",
            StudyKind::Ddd => "ddd",
            StudyKind::Approx => "approx",
            StudyKind::Reconstruct => "reconstruct",
            StudyKind::Converge => "converge",
            StudyKind::Orowan => "orowan",
        }
    }
}

// ---------------------------------------------------------------------------
// Shared pieces

fn relaxation(cfg: &SimulationConfig) -> RelaxationOptions {
    RelaxationOptions { tolerance: cfg.layer.tolerance, max_sweeps: cfg.layer.max_sweeps, ..Default::default() }
}

/// Solve the transition layer of the configured potential.
pub fn solve_configured_layer(cfg: &SimulationConfig) -> Result<(PotentialSpec, LayerProfile)> {
    let p = cfg.potential_spec()?;
    let layer = solve_layer_profile_with(&p, cfg.layer.grid()?, relaxation(cfg))?;
    Ok((p, layer))
}

/// Sampled profile on a grid wide and fine enough for level-point extraction.
fn fine_profile(profile: &Profile) -> Result<ScalarField> {
    profile.sample(Grid1D::new(0.0, 12.0, (1 << 17) + 1)?)
}

/// Layer classification for the closed-form oracles.
fn classical_d(p: &PotentialSpec) -> Option<f64> {
    match p.kind {
        PotentialKind::ClassicalPn { d } => Some(d),
        PotentialKind::CosineSeries { .. } => None,
    }
}

fn max_abs_diff_on(grid: &Grid1D, values: &[f64], f: impl Fn(f64) -> f64, window: (f64, f64)) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = grid.x(*i);
            x >= window.0 && x <= window.1
        })
        .fold(0.0_f64, |m, (i, v)| m.max((v - f(grid.x(i))).abs()))
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------------------
// Layer and mobility

#[derive(Debug, Clone)]
pub struct LayerStudy {
    pub layer: LayerProfile,
    pub corrector: Option<CorrectorProfile>,
    pub gates: ValidationReport,
    pub diagnostics: ValidationReport,
}

/// Solve the layer, compare with the closed form and check the tails.
pub fn run_layer_study(cfg: &SimulationConfig) -> Result<LayerStudy> {
    let (p, layer) = solve_configured_layer(cfg)?;
    let g = layer.field.grid;
    let window = (-20.0, 20.0);
    let mut gates = ValidationReport::new("layer");
    let mut diagnostics = ValidationReport::new("layer-diagnostics");
    if let Some(d) = classical_d(&p) {
        let stated = max_abs_diff_on(&g, &layer.field.values, |x| nabarro_closed_form(d, x), window);
        gates.push("sup-error-vs-nabarro-closed-form", stated, 1e-3, stated <= 1e-3);
        let exact = max_abs_diff_on(&g, &layer.field.values, |x| classical_layer_exact(d, x), window);
        diagnostics.push("sup-error-vs-arctan(x/d)", exact, 1e-3, exact <= 1e-3);
    }
    gates.extend(verify_layer_tails(&layer)?);
    diagnostics.push("relaxation-residual", layer.residual, cfg.layer.tolerance, layer.residual < cfg.layer.tolerance);
    diagnostics.push("c0", layer.c0, f64::NAN, true);
    let corrector = match cfg.layer.corrector_stress {
        Some(l) => {
            let c = solve_corrector_with(&p, &layer, l, relaxation(cfg))?;
            diagnostics.push("corrector-K2", c.k2, f64::NAN, true);
            diagnostics.push("corrector-K3", c.k3, f64::NAN, true);
            diagnostics.push("corrector-c0-effective", c.c0_effective, f64::NAN, true);
            Some(c)
        }
        None => None,
    };
    Ok(LayerStudy { layer, corrector, gates, diagnostics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityRow {
    pub d: f64,
    pub c0: f64,
    /// `pi d`.
    pub stated_oracle: f64,
    /// `2 pi d`, the reciprocal of `int phi'^2` for `1/2 + atan(x/d)/pi`.
    pub exact_layer_oracle: f64,
}

#[derive(Debug, Clone)]
pub struct MobilityStudy {
    pub rows: Vec<MobilityRow>,
    pub gates: ValidationReport,
    pub diagnostics: ValidationReport,
}

/// `c0` of the classical potential for each configured `d`.
pub fn run_c0_study(cfg: &SimulationConfig) -> Result<MobilityStudy> {
    let grid = cfg.layer.grid()?;
    let opts = relaxation(cfg);
    let solved: Vec<Result<MobilityRow>> = map_slice(&cfg.layer.d_values, Execution::default(), |&d| {
        let p = make_classical_potential(d)?;
        let layer = solve_layer_profile_with(&p, grid, opts)?;
        Ok(MobilityRow { d, c0: compute_c0(&layer)?, stated_oracle: PI * d, exact_layer_oracle: 2.0 * PI * d })
    });
    let rows = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let mut gates = ValidationReport::new("c0");
    let mut diagnostics = ValidationReport::new("c0-diagnostics");
    for r in &rows {
        let e = (r.c0 - r.stated_oracle).abs() / r.stated_oracle;
        gates.push(format!("c0-rel-error-vs-pi-d(d={})", r.d), e, 1e-3, e <= 1e-3);
        let e = (r.c0 - r.exact_layer_oracle).abs() / r.exact_layer_oracle;
        diagnostics.push(format!("c0-rel-error-vs-2pi-d(d={})", r.d), e, 1e-3, e <= 1e-3);
    }
    Ok(MobilityStudy { rows, gates, diagnostics })
}

// ---------------------------------------------------------------------------
// Micro

fn check_step_budget(cfg: &SimulationConfig, t_end: f64, bound: f64, eps: f64, delta: f64) -> Result<()> {
    let steps = (t_end / bound).ceil();
    if steps > cfg.micro.max_steps as f64 {
        return Err(Error::Config(format!(
            "eps = {eps}, delta = {delta}: dt bound {bound:e} needs {steps:e} steps to reach T = {t_end}, \
             budget is {} steps (feasible T = {:e})",
            cfg.micro.max_steps,
            bound * cfg.micro.max_steps as f64
        )));
    }
    Ok(())
}

/// Layered micro run from the level points of the configured profile.
pub fn micro_from_profile(
    cfg: &SimulationConfig,
    p: &PotentialSpec,
    layer: &LayerProfile,
    eps: f64,
    delta: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<(ParticleSystem, MicroRun)> {
    let grid = cfg.micro.grid(eps, delta)?;
    let ps = level_points(&cfg.profile.sample(grid)?, eps, delta)?;
    let s0 = micro_init_layered(&ps, layer, grid)?;
    let (a, b) = micro_dt_bounds(&s0, p);
    check_step_budget(cfg, t_end, a.min(b), eps, delta)?;
    let run = micro_run(&s0, p, t_end, snapshot_times)?;
    Ok((ps, run))
}

#[derive(Debug, Clone)]
pub struct MicroStudy {
    pub epsilon: f64,
    pub delta: f64,
    pub c0: f64,
    pub run: MicroRun,
    pub gates: ValidationReport,
}

/// Bracket `eps k1 <= u <= eps k2` taken from the initial state.
fn micro_gates(run: &MicroRun, eps: f64) -> ValidationReport {
    let u0 = &run.snapshots[0].u;
    let lo = eps * (u0.min().min(u0.left_limit) / eps + 1e-9).floor();
    let hi = eps * (u0.max().max(u0.right_limit) / eps - 1e-9).ceil();
    let tol = 1e-12;
    let mut gates = ValidationReport::new("micro");
    let v = run.worst_monotonicity_violation;
    gates.push("monotonicity-violation", v, tol, v <= tol);
    gates.push("lower-bracket-eps-k1", run.min_value, lo, run.min_value >= lo - tol);
    gates.push("upper-bracket-eps-k2", run.max_value, hi, run.max_value <= hi + tol);
    gates
}

pub fn run_micro_study(cfg: &SimulationConfig) -> Result<MicroStudy> {
    let (p, layer) = solve_configured_layer(cfg)?;
    let eps = cfg.epsilons[0];
    let delta = cfg.delta_rule.delta(eps);
    let (_, run) = micro_from_profile(cfg, &p, &layer, eps, delta, cfg.final_time, &cfg.snapshot_times)?;
    let gates = micro_gates(&run, eps);
    Ok(MicroStudy { epsilon: eps, delta, c0: layer.c0, run, gates })
}

// ---------------------------------------------------------------------------
// Macro

/// Macroscopic state from the exact slope of the configured profile.
pub fn macro_from_profile(profile: &Profile, grid: Grid1D, c0: f64) -> Result<MacroState> {
    let tail = match profile {
        Profile::Logistic { .. } => None,
        Profile::Arctan { .. } => Some(2.0),
    };
    let f = ScalarField::from_fn(grid, |x| profile.slope(x), 0.0, 0.0, tail)?;
    MacroState::from_density(f, profile.value(grid.left()), c0)
}

fn configured_c0(cfg: &SimulationConfig, override_c0: Option<f64>) -> Result<f64> {
    match override_c0 {
        Some(c) => Ok(c),
        None => Ok(solve_configured_layer(cfg)?.1.c0),
    }
}

#[derive(Debug, Clone)]
pub struct MacroStudy {
    pub c0: f64,
    pub run: MacroRun,
    pub gates: ValidationReport,
}

/// Mass drift and far-field checks over every snapshot.
pub fn macro_gates(run: &MacroRun, inf_u0: f64, sup_u0: f64, eps: f64) -> Result<ValidationReport> {
    let m0 = trapezoid_integral(&run.snapshots[0].f)?;
    let mut drift = 0.0_f64;
    let mut edge = 0.0_f64;
    let mut negative = 0.0_f64;
    for s in &run.snapshots {
        let m = trapezoid_integral(&s.f)?;
        drift = drift.max(((m - m0) / m0).abs());
        let n = s.u.grid.n;
        edge = edge.max((s.u.values[0] - inf_u0).abs()).max((s.u.values[n - 1] - sup_u0).abs());
        negative = negative.max(-s.f.min());
    }
    let mut gates = ValidationReport::new("macro");
    gates.push("relative-mass-drift", drift, 1e-3, drift <= 1e-3);
    gates.push("edge-limit-deviation", edge, 2.0 * eps, edge <= 2.0 * eps);
    gates.push("negative-density", negative, 0.0, negative <= 0.0);
    Ok(gates)
}

pub fn run_macro_study(cfg: &SimulationConfig) -> Result<MacroStudy> {
    let c0 = configured_c0(cfg, cfg.macro_.c0)?;
    let s0 = macro_from_profile(&cfg.profile, cfg.macro_.grid()?, c0)?;
    let run = macro_run(&s0, cfg.final_time, &cfg.snapshot_times)?;
    let eps = cfg.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let gates = macro_gates(&run, 0.0, 1.0, eps)?;
    Ok(MacroStudy { c0, run, gates })
}

// ---------------------------------------------------------------------------
// DDD

fn ddd_positions(cfg: &SimulationConfig) -> Result<Vec<f64>> {
    match &cfg.ddd.positions_file {
        Some(path) => read_positions(path),
        None => Ok(cfg.ddd.positions.clone()),
    }
}

#[derive(Debug, Clone)]
pub struct DddStudy {
    pub c0: f64,
    pub trajectory: Trajectory,
    pub gates: ValidationReport,
    pub diagnostics: ValidationReport,
}

pub fn run_ddd_study(cfg: &SimulationConfig) -> Result<DddStudy> {
    let y0 = ddd_positions(cfg)?;
    let c0 = configured_c0(cfg, cfg.ddd.c0)?;
    let traj = ddd_integrate(&y0, c0, cfg.ddd.dt, cfg.ddd.final_time, &cfg.ddd.sample_times)?;
    let mean = |y: &[f64]| y.iter().sum::<f64>() / y.len().max(1) as f64;
    let m0 = mean(&y0);
    let drift = traj.positions.iter().fold(0.0_f64, |m, y| m.max((mean(y) - m0).abs()));
    let mut gates = ValidationReport::new("ddd");
    gates.push("center-of-mass-drift", drift, 1e-10, drift <= 1e-10);
    let ordered = traj.positions.iter().all(|y| y.windows(2).all(|w| w[1] > w[0]));
    gates.push("ordering-preserved", if ordered { 1.0 } else { 0.0 }, 1.0, ordered);
    let mut diagnostics = ValidationReport::new("ddd-diagnostics");
    if y0.len() == 2 {
        let s0 = y0[1] - y0[0];
        let y = traj.final_positions();
        let exact = (s0 * s0 + 4.0 * c0 * cfg.ddd.final_time / PI).sqrt();
        let e = ((y[1] - y[0]) - exact).abs() / exact;
        diagnostics.push("two-body-separation-rel-error", e, 1e-6, e <= 1e-6);
    }
    Ok(DddStudy { c0, trajectory: traj, gates, diagnostics })
}

// ---------------------------------------------------------------------------
// Particle approximation of I1

#[derive(Debug, Clone)]
pub struct ApproxStudy {
    pub report: ConvergenceReport,
    /// Largest `|truncated + window - full|` over all probes.
    pub identity_defect: f64,
}

/// Probe points: uniform in `window`, pushed to at least `eps/4` from the
/// nearest particle.
pub fn approx_probes(ps: &ParticleSystem, window: (f64, f64), count: usize) -> Vec<f64> {
    let guard = 0.25 * ps.epsilon;
    (0..count)
        .map(|k| {
            let x = window.0 + (window.1 - window.0) * (k as f64 + 0.5) / count as f64;
            let Some(i) = crate::nonlocal::nearest_particle(ps, x) else { return x };
            let d = x - ps.positions[i];
            if d.abs() >= guard {
                x
            } else if d >= 0.0 {
                ps.positions[i] + guard
            } else {
                ps.positions[i] - guard
            }
        })
        .collect()
}

/// Truncated particle sums at `r = sqrt(eps)` against the principal-value oracle.
pub fn run_particle_approx_study(
    profile: &Profile,
    epsilons: &[f64],
    probes: usize,
    window: (f64, f64),
) -> Result<ApproxStudy> {
    let v = fine_profile(profile)?;
    let mut report = ConvergenceReport::new("particle-approximation");
    let mut defect = 0.0_f64;
    for &eps in epsilons {
        let ps = level_points(&v, eps, 1.0)?;
        let r = eps.sqrt();
        let xs = approx_probes(&ps, window, probes);
        let per_probe: Vec<Result<(f64, f64)>> = map_slice(&xs, Execution::default(), |&x| {
            let oracle = reference_half_laplacian(|y| profile.value(y), x);
            let trunc = particle_sum_truncated(&ps, x, r);
            let full = particle_sum_full(&ps, x)?;
            let window_sum = short_window_sum(&ps, x, r);
            let near = crate::nonlocal::nearest_particle(&ps, x).map(|i| (ps.positions[i] - x).abs() < r);
            let identity = if near == Some(true) { (trunc + window_sum - full).abs() } else { 0.0 };
            Ok(((trunc - oracle).abs(), identity))
        });
        let mut err = 0.0_f64;
        for pr in per_probe {
            let (e, id) = pr?;
            err = err.max(e);
            defect = defect.max(id);
        }
        report.rows.push(ConvergenceRow { epsilon: eps, delta: 1.0, sup_error: err, dt: 0.0, dt_bound: 0.0 });
    }
    let dec = report.strictly_decreasing();
    report.checks.push("strictly-decreasing", if dec { 1.0 } else { 0.0 }, 1.0, dec);
    for (k, q) in report.ratios().into_iter().enumerate() {
        report.checks.push(format!("error-ratio-{k}"), q, 2.0, (1.6..=2.6).contains(&q));
    }
    report.checks.push("truncated-plus-window-equals-full", defect, 1e-12, defect <= 1e-12);
    Ok(ApproxStudy { report, identity_defect: defect })
}

// ---------------------------------------------------------------------------
// Reconstruction

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRow {
    pub epsilon: f64,
    pub delta: f64,
    pub grid_sup_error: f64,
    pub fine_sup_error: f64,
    pub particles: usize,
}

#[derive(Debug, Clone)]
pub struct ReconstructionStudy {
    pub report: ConvergenceReport,
    pub rows: Vec<ReconstructionRow>,
}

/// Sup error of `sum eps phi((x - x_i)/(eps delta)) + eps M` against the profile.
pub fn run_reconstruction_study(
    profile: &Profile,
    pairs: &[(f64, f64)],
    layer: &LayerProfile,
    window: (f64, f64),
    points_per_layer: f64,
) -> Result<ReconstructionStudy> {
    let v = fine_profile(profile)?;
    let center = 0.5 * (window.0 + window.1);
    let half = 0.5 * (window.1 - window.0);
    let mut report = ConvergenceReport::new("reconstruction");
    let mut rows = Vec::new();
    for &(eps, delta) in pairs {
        let ps = level_points(&v, eps, delta)?;
        let grid = Grid1D::with_max_spacing(center, half, eps * delta / points_per_layer)?;
        let u = reconstruct(&ps, layer, grid)?;
        let grid_err = max_abs_diff_on(&grid, &u.values, |x| profile.value(x), window);
        let fine = grid.refined(10)?;
        let nodes = fine.nodes();
        let errs = map_slice(&nodes, Execution::default(), |&x| (reconstruct_at(&ps, layer, x) - profile.value(x)).abs());
        let fine_err = errs.into_iter().fold(0.0_f64, f64::max);
        report.rows.push(ConvergenceRow { epsilon: eps, delta, sup_error: grid_err, dt: 0.0, dt_bound: 0.0 });
        let ratio = fine_err.max(grid_err) / fine_err.min(grid_err);
        report.checks.push(format!("grid-vs-fine-ratio(eps={eps},delta={delta})"), ratio, 2.0, ratio <= 2.0);
        rows.push(ReconstructionRow { epsilon: eps, delta, grid_sup_error: grid_err, fine_sup_error: fine_err, particles: ps.len() });
    }
    let dec = report.strictly_decreasing();
    report.checks.push("strictly-decreasing", if dec { 1.0 } else { 0.0 }, 1.0, dec);
    Ok(ReconstructionStudy { report, rows })
}

// ---------------------------------------------------------------------------
// Multiscale convergence

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub report: ConvergenceReport,
    pub c0: f64,
    pub reference: MacroState,
    /// Final micro state per epsilon, with the reference resampled onto its grid.
    pub finals: Vec<(ScalarField, ScalarField)>,
}

/// Micro solutions for each `eps` against one macroscopic reference at `T`.
pub fn run_multiscale_convergence(cfg: &SimulationConfig) -> Result<ConvergenceStudy> {
    let (p, layer) = solve_configured_layer(cfg)?;
    let c0 = cfg.macro_.c0.unwrap_or(layer.c0);
    let t_end = cfg.final_time;
    let g = cfg.macro_.grid()?;
    let reference_grid = Grid1D::new(g.center, g.half_width, g.n * cfg.macro_.reference_refinement)?;
    let reference = macro_run(&macro_from_profile(&cfg.profile, reference_grid, c0)?, t_end, &[])?.state;

    // Fail fast on infeasible members before any long run starts.
    for &eps in &cfg.epsilons {
        let delta = cfg.delta_rule.delta(eps);
        let grid = cfg.micro.grid(eps, delta)?;
        level_points(&cfg.profile.sample(grid)?, eps, delta)?;
        let bound = (0.2 * eps * delta * delta / p.max_abs_d2w()).min(0.5 * delta * grid.spacing() / PI);
        check_step_budget(cfg, t_end, bound, eps, delta)?;
    }
    let runs: Vec<Result<(f64, MicroRun)>> = map_slice(&cfg.epsilons, Execution::default(), |&eps| {
        let delta = cfg.delta_rule.delta(eps);
        let (_, run) = micro_from_profile(cfg, &p, &layer, eps, delta, t_end, &[])?;
        Ok((delta, run))
    });
    let mut report = ConvergenceReport::new("multiscale-convergence");
    let mut finals = Vec::new();
    for (&eps, r) in cfg.epsilons.iter().zip(runs) {
        let (delta, run) = r?;
        let u = run.state.u;
        let ubar = reference.u.resample(u.grid);
        let err = sup_distance(&u, &ubar, cfg.window)?;
        report.rows.push(ConvergenceRow { epsilon: eps, delta, sup_error: err, dt: run.dt, dt_bound: run.dt_bound });
        finals.push((u, ubar));
    }
    let dec = report.strictly_decreasing();
    report.checks.push("strictly-decreasing", if dec { 1.0 } else { 0.0 }, 1.0, dec);
    Ok(ConvergenceStudy { report, c0, reference, finals })
}

// ---------------------------------------------------------------------------
// DDD against the micro level points

#[derive(Debug, Clone)]
pub struct DddVsMicroStudy {
    pub epsilon: f64,
    pub delta: f64,
    pub c0: f64,
    /// Rescaled times `tau`.
    pub times: Vec<f64>,
    /// Rescaled micro layer centres `x_i(eps tau) / eps`.
    pub micro: Vec<Vec<f64>>,
    pub ddd: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub gates: ValidationReport,
    pub diagnostics: ValidationReport,
}

/// Micro run from layers at `eps y0_i`, tracked in the rescaled variables
/// `y = x / eps`, `tau = t / eps`, against the DDD trajectory.
pub fn run_ddd_vs_micro(
    cfg: &SimulationConfig,
    y0: &[f64],
    eps: f64,
    delta: f64,
    tau_end: f64,
) -> Result<DddVsMicroStudy> {
    let (p, layer) = solve_configured_layer(cfg)?;
    let c0 = cfg.ddd.c0.unwrap_or(layer.c0);
    let grid = Grid1D::with_max_spacing(0.0, cfg.ddd.micro_half_width, eps * delta / cfg.micro.points_per_layer)?;
    let ps = ParticleSystem::from_positions(y0.iter().map(|y| eps * y).collect(), eps, delta, 0)?;
    let s0 = micro_init_layered(&ps, &layer, grid)?;
    let taus: Vec<f64> = cfg.ddd.sample_times.iter().copied().filter(|&t| t > 0.0 && t < tau_end).collect();
    let t_micro: Vec<f64> = taus.iter().map(|t| eps * t).collect();
    let (a, b) = micro_dt_bounds(&s0, &p);
    check_step_budget(cfg, eps * tau_end, a.min(b), eps, delta)?;
    let run = micro_run(&s0, &p, eps * tau_end, &t_micro)?;

    let dt = if y0.len() > 1 { cfg.ddd.dt.min(ddd_dt_bound(y0, c0)) } else { cfg.ddd.dt };
    let traj = ddd_integrate(y0, c0, dt, tau_end, &taus)?;

    let mut micro = Vec::new();
    for s in &run.snapshots {
        let xs = layer_centers(&s.u, eps)?;
        micro.push(xs.into_iter().map(|x| x / eps).collect::<Vec<_>>());
    }
    let mut max_dev = 0.0_f64;
    let mut max_disp = 0.0_f64;
    for (ym, yd) in micro.iter().zip(&traj.positions) {
        if ym.len() != yd.len() {
            return Err(Error::InvalidArgument(format!("tracked {} layers for {} particles", ym.len(), yd.len())));
        }
        for i in 0..ym.len() {
            max_dev = max_dev.max((ym[i] - yd[i]).abs());
            max_disp = max_disp.max((yd[i] - y0[i]).abs());
        }
    }
    let resolution = grid.spacing() / eps;
    let tol = 0.1 * max_disp + resolution;
    let mut gates = ValidationReport::new("ddd-vs-micro");
    gates.push("max-trajectory-deviation", max_dev, tol, max_dev <= tol);
    let mut diagnostics = ValidationReport::new("ddd-vs-micro-diagnostics");
    if y0.len() == 2 {
        let s0 = y0[1] - y0[0];
        let exact = (s0 * s0 + 4.0 * c0 * tau_end / PI).sqrt();
        let last = micro.last().expect("final snapshot");
        let e = ((last[1] - last[0]) - exact).abs() / exact;
        gates.push("two-body-separation-rel-error", e, 0.1, e <= 0.1);
        diagnostics.push("separation-closed-form", exact, f64::NAN, true);
    }
    let times = std::iter::once(0.0).chain(taus.iter().copied()).chain(std::iter::once(tau_end)).collect();
    Ok(DddVsMicroStudy {
        epsilon: eps,
        delta,
        c0,
        times,
        micro,
        ddd: traj.positions,
        max_deviation: max_dev,
        gates,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Orowan identity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrowanRow {
    pub level: f64,
    pub x: f64,
    pub velocity: f64,
    pub predicted: f64,
    pub relative_deviation: f64,
    /// Velocity of the same level in the run with doubled `c0`, at half the time.
    pub velocity_doubled_c0: f64,
}

#[derive(Debug, Clone)]
pub struct OrowanStudy {
    pub c0: f64,
    pub rows: Vec<OrowanRow>,
    pub median_relative_deviation: f64,
    pub max_doubling_deviation: f64,
    pub gates: ValidationReport,
}

/// Level-point velocities by centred differences of macro snapshots.
fn level_velocities(run: &MacroRun, spacing: f64, half_span: f64) -> Result<(ParticleSystem, Vec<f64>)> {
    let before = level_points(&run.snapshots[1].u, spacing, 1.0)?;
    let mid = level_points(&run.snapshots[2].u, spacing, 1.0)?;
    let after = level_points(&run.snapshots[3].u, spacing, 1.0)?;
    if before.len() != after.len() || before.m_index != after.m_index || mid.len() != before.len() {
        return Err(Error::InvalidArgument("tracked level set changed between snapshots".into()));
    }
    let v = before.positions.iter().zip(&after.positions).map(|(a, b)| (b - a) / (2.0 * half_span)).collect();
    Ok((mid, v))
}

fn effective_stress(u: &ScalarField, backend: OperatorBackend) -> Result<ScalarField> {
    match backend {
        OperatorBackend::PvQuadrature => i1_apply(u, backend),
        OperatorBackend::Spectral => spectral::half_laplacian_with_ramp(u, 1.0),
    }
}

/// Compare tracked level-point velocities with `-c0 I1[u]` at the level points.
pub fn run_orowan_check(cfg: &SimulationConfig, c0: f64, state: &MacroState) -> Result<OrowanStudy> {
    let o = &cfg.orowan;
    let t = [o.mid_time - o.half_span, o.mid_time, o.mid_time + o.half_span];
    let base = MacroState { c0, ..state.clone() };
    let run = macro_run(&base, t[2], &t)?;
    let (mid, v) = level_velocities(&run, o.level_spacing, o.half_span)?;
    let stress = effective_stress(&run.snapshots[2].u, cfg.backend)?;

    let doubled = MacroState { c0: 2.0 * c0, ..state.clone() };
    let half: Vec<f64> = t.iter().map(|x| 0.5 * x).collect();
    let run2 = macro_run(&doubled, half[2], &half)?;
    let (_, v2) = level_velocities(&run2, o.level_spacing, 0.5 * o.half_span)?;

    let mut rows = Vec::new();
    for (k, &x) in mid.positions.iter().enumerate() {
        let predicted = -c0 * stress.eval(x);
        rows.push(OrowanRow {
            level: mid.level(k),
            x,
            velocity: v[k],
            predicted,
            relative_deviation: (v[k] - predicted).abs() / predicted.abs(),
            velocity_doubled_c0: v2[k],
        });
    }
    let med = median(rows.iter().map(|r| r.relative_deviation).collect());
    let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let doubling = rows
        .iter()
        .filter(|r| r.velocity.abs() > 1e-3 * vmax)
        .fold(0.0_f64, |m, r| m.max((r.velocity_doubled_c0 / (2.0 * r.velocity) - 1.0).abs()));
    let mut gates = ValidationReport::new("orowan");
    gates.push("median-relative-deviation", med, 0.1, med <= 0.1);
    gates.push("doubled-c0-velocity-deviation", doubling, 0.02, doubling <= 0.02);
    Ok(OrowanStudy { c0, rows, median_relative_deviation: med, max_doubling_deviation: doubling, gates })
}

// ---------------------------------------------------------------------------
// Output

/// What a study produced; serialized as the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct StudyOutcome {
    pub study: StudyKind,
    pub passed: bool,
    pub gates: ValidationReport,
    pub diagnostics: Option<ValidationReport>,
    pub files: Vec<String>,
    /// Study-specific metadata (scales, mobility, snapshot times).
    pub metadata: serde_json::Value,
    pub wall_time_s: f64,
    pub config: SimulationConfig,
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}

/// Run a study, write its tables and `manifest.json` into `out_dir`.
pub fn run_study(kind: StudyKind, cfg: &SimulationConfig, out_dir: &Path) -> Result<StudyOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut out = Outputs { dir: out_dir, files: Vec::new() };
    let (gates, diagnostics, metadata) = match kind {
        StudyKind::Layer => {
            let s = run_layer_study(cfg)?;
            let d = s.layer.derivative();
            write_columns(&out.path("layer.csv"), &s.layer.field.grid, &[("phi", &s.layer.field.values), ("phi_x", &d.values)])?;
            if let Some(c) = &s.corrector {
                write_columns(&out.path("corrector.csv"), &c.field.grid, &[("psi", &c.field.values)])?;
            }
            write_report(&s.gates, &out.path("layer_checks.csv"))?;
            let meta = serde_json::json!({
                "alpha": s.layer.alpha, "c0": s.layer.c0, "sweeps": s.layer.sweeps,
                "tail_constant_k0": s.layer.tail_constant_k0, "tail_constant_k1": s.layer.tail_constant_k1,
            });
            (s.gates, Some(s.diagnostics), meta)
        }
        StudyKind::C0 => {
            let s = run_c0_study(cfg)?;
            let rows: Vec<Vec<f64>> = s.rows.iter().map(|r| vec![r.d, r.c0, r.stated_oracle, r.exact_layer_oracle]).collect();
            write_table(&out.path("c0.csv"), &["d", "c0", "pi_d", "two_pi_d"], &rows)?;
            (s.gates, Some(s.diagnostics), serde_json::json!({ "rows": s.rows }))
        }
        StudyKind::Micro => {
            let s = run_micro_study(cfg)?;
            let mut times = Vec::new();
            for (k, snap) in s.run.snapshots.iter().enumerate() {
                write_columns(&out.path(&format!("micro_{k:03}.csv")), &snap.u.grid, &[("u", &snap.u.values)])?;
                times.push(snap.t);
            }
            let meta = serde_json::json!({
                "epsilon": s.epsilon, "delta": s.delta, "c0": s.c0, "times": times,
                "dt": s.run.dt, "dt_bound": s.run.dt_bound, "steps": s.run.steps,
            });
            (s.gates, None, meta)
        }
        StudyKind::Macro => {
            let s = run_macro_study(cfg)?;
            let mut times = Vec::new();
            for (k, snap) in s.run.snapshots.iter().enumerate() {
                write_columns(
                    &out.path(&format!("macro_{k:03}.csv")),
                    &snap.u.grid,
                    &[("u", &snap.u.values), ("f", &snap.f.values)],
                )?;
                times.push(snap.t);
            }
            let eps = cfg.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
            let meta = serde_json::json!({
                "epsilon": eps, "c0": s.c0, "times": times,
                "dt": s.run.dt, "dt_bound": s.run.dt_bound, "steps": s.run.steps,
            });
            (s.gates, None, meta)
        }
        StudyKind::Ddd => {
            let s = run_ddd_study(cfg)?;
            s.trajectory.write_csv(&out.path("trajectory.csv"))?;
            let meta = serde_json::json!({
                "c0": s.c0, "dt": s.trajectory.dt, "dt_bound": s.trajectory.dt_bound, "times": s.trajectory.times,
            });
            (s.gates, Some(s.diagnostics), meta)
        }
        StudyKind::Approx => {
            let s = run_particle_approx_study(&cfg.profile, &cfg.approx.epsilons, cfg.approx.probes, cfg.approx.probe_window)?;
            write_report(&s.report, &out.path("approx.csv"))?;
            (s.report.checks.clone(), None, serde_json::json!({ "errors": s.report.errors(), "ratios": s.report.ratios() }))
        }
        StudyKind::Reconstruct => {
            let (_, layer) = solve_configured_layer(cfg)?;
            let s = run_reconstruction_study(&cfg.profile, &cfg.reconstruct.pairs, &layer, cfg.window, cfg.reconstruct.points_per_layer)?;
            write_report(&s.report, &out.path("reconstruct.csv"))?;
            (s.report.checks.clone(), None, serde_json::json!({ "rows": s.rows }))
        }
        StudyKind::Converge => {
            let s = run_multiscale_convergence(cfg)?;
            write_report(&s.report, &out.path("converge.csv"))?;
            for (k, (u, ubar)) in s.finals.iter().enumerate() {
                write_columns(&out.path(&format!("converge_eps_{k}.csv")), &u.grid, &[("u_eps", &u.values), ("u_bar", &ubar.values)])?;
            }
            let meta = serde_json::json!({ "c0": s.c0, "final_time": cfg.final_time, "window": cfg.window });
            (s.report.checks.clone(), None, meta)
        }
        StudyKind::Orowan => {
            let c0 = configured_c0(cfg, cfg.macro_.c0)?;
            let s0 = macro_from_profile(&cfg.profile, cfg.macro_.grid()?, c0)?;
            let s = run_orowan_check(cfg, c0, &s0)?;
            let rows: Vec<Vec<f64>> = s
                .rows
                .iter()
                .map(|r| vec![r.level, r.x, r.velocity, r.predicted, r.relative_deviation, r.velocity_doubled_c0])
                .collect();
            write_table(
                &out.path("orowan.csv"),
                &["level", "x", "velocity", "predicted", "relative_deviation", "velocity_doubled_c0"],
                &rows,
            )?;
            let meta = serde_json::json!({ "c0": s.c0, "mid_time": cfg.orowan.mid_time });
            (s.gates, None, meta)
        }
    };
    let outcome = StudyOutcome {
        study: kind,
        passed: gates.all_pass(),
        gates,
        diagnostics,
        files: out.files,
        metadata,
        wall_time_s: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&outcome)?)?;
    Ok(outcome)
}
