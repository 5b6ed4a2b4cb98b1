//! JSON configuration shared by every study.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid1D;
use crate::nonlocal::OperatorBackend;
use crate::potential::{PotentialConfig, PotentialSpec};
use crate::profiles::Profile;

/// How `delta` follows `eps` in the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `delta = eps`.
    Equal,
    /// `delta = sqrt(eps)`.
    Sqrt,
    /// `delta` fixed.
    Fixed(f64),
}

impl DeltaRule {
    pub fn delta(self, eps: f64) -> f64 {
        match self {
            DeltaRule::Equal => eps,
            DeltaRule::Sqrt => eps.sqrt(),
            DeltaRule::Fixed(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerConfig {
    pub half_width: f64,
    pub n: usize,
    /// Lattice spacings `d` for the mobility sweep.
    pub d_values: Vec<f64>,
    /// Applied stress for the corrector; `None` skips it.
    pub corrector_stress: Option<f64>,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LayerConfig {
    fn default() -> Self {
        LayerConfig {
            half_width: 20.0,
            n: 4096,
            d_values: vec![0.5, 1.0, 2.0],
            corrector_stress: None,
            tolerance: 1e-6,
            max_sweeps: 100_000,
        }
    }
}

impl LayerConfig {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(0.0, self.half_width, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroConfig {
    pub half_width: f64,
    /// Grid nodes per layer width `eps delta`.
    pub points_per_layer: f64,
    /// Step budget; runs needing more are rejected up front.
    pub max_steps: usize,
}

impl Default for MicroConfig {
    fn default() -> Self {
        MicroConfig { half_width: 4.0, points_per_layer: 4.0, max_steps: 2_000_000 }
    }
}

impl MicroConfig {
    pub fn grid(&self, eps: f64, delta: f64) -> Result<Grid1D> {
        Grid1D::with_max_spacing(0.0, self.half_width, eps * delta / self.points_per_layer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroConfig {
    pub half_width: f64,
    pub n: usize,
    /// Resolution factor of the reference run in the convergence study.
    pub reference_refinement: usize,
    /// Overrides the mobility computed from the layer.
    pub c0: Option<f64>,
}

impl Default for MacroConfig {
    fn default() -> Self {
        MacroConfig { half_width: 8.0, n: 1024, reference_refinement: 4, c0: None }
    }
}

impl MacroConfig {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(0.0, self.half_width, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DddConfig {
    /// Initial positions; ignored when `positions_file` is set.
    pub positions: Vec<f64>,
    /// CSV with one position per row (optional header).
    pub positions_file: Option<PathBuf>,
    /// Overrides the mobility computed from the layer.
    pub c0: Option<f64>,
    pub dt: f64,
    pub final_time: f64,
    pub sample_times: Vec<f64>,
    /// Scales of the micro run in the DDD-vs-micro comparison; `delta`
    /// defaults to the sweep's delta rule.
    pub epsilon: f64,
    pub delta: Option<f64>,
    /// Half-width of the micro grid in the DDD-vs-micro comparison.
    pub micro_half_width: f64,
}

impl Default for DddConfig {
    fn default() -> Self {
        DddConfig {
            positions: vec![-0.5, 0.5],
            positions_file: None,
            c0: None,
            dt: 1e-3,
            final_time: 1.0,
            sample_times: vec![0.25, 0.5, 0.75],
            epsilon: 0.05,
            delta: None,
            micro_half_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxConfig {
    pub epsilons: Vec<f64>,
    pub probes: usize,
    pub probe_window: (f64, f64),
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { epsilons: vec![4e-2, 1e-2, 2.5e-3], probes: 200, probe_window: (-1.0, 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructConfig {
    pub pairs: Vec<(f64, f64)>,
    pub points_per_layer: f64,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig { pairs: vec![(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)], points_per_layer: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrowanConfig {
    /// Level spacing of the tracked points.
    pub level_spacing: f64,
    /// Time at which velocities are measured.
    pub mid_time: f64,
    /// Half-span of the centred difference.
    pub half_span: f64,
}

impl Default for OrowanConfig {
    fn default() -> Self {
        OrowanConfig { level_spacing: 0.1, mid_time: 0.5, half_span: 0.01 }
    }
}

/// Top-level study configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub potential: PotentialConfig,
    /// Initial macroscopic profile `u0`.
    pub profile: Profile,
    pub epsilons: Vec<f64>,
    pub delta_rule: DeltaRule,
    pub final_time: f64,
    pub snapshot_times: Vec<f64>,
    pub window: (f64, f64),
    pub backend: OperatorBackend,
    pub layer: LayerConfig,
    pub micro: MicroConfig,
    #[serde(rename = "macro")]
    pub macro_: MacroConfig,
    pub ddd: DddConfig,
    pub approx: ApproxConfig,
    pub reconstruct: ReconstructConfig,
    pub orowan: OrowanConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            potential: PotentialConfig::Classical { d: 1.0 },
            profile: Profile::default(),
            epsilons: vec![0.2, 0.1, 0.05],
            delta_rule: DeltaRule::Equal,
            final_time: 0.25,
            snapshot_times: vec![],
            window: (-2.0, 2.0),
            backend: OperatorBackend::default(),
            layer: LayerConfig::default(),
            micro: MicroConfig::default(),
            macro_: MacroConfig::default(),
            ddd: DddConfig::default(),
            approx: ApproxConfig::default(),
            reconstruct: ReconstructConfig::default(),
            orowan: OrowanConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonempty_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    v.iter().try_for_each(|&x| positive(name, x))
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        PotentialSpec::from_config(&self.potential)?;
        nonempty_positive("epsilons", &self.epsilons)?;
        if let DeltaRule::Fixed(d) = self.delta_rule {
            positive("delta_rule.fixed", d)?;
        }
        if !(self.final_time >= 0.0) {
            return Err(Error::Config(format!("final_time must be non-negative, got {}", self.final_time)));
        }
        if !(self.window.0 < self.window.1) {
            return Err(Error::Config(format!("window {:?} is empty", self.window)));
        }
        positive("layer.half_width", self.layer.half_width)?;
        nonempty_positive("layer.d_values", &self.layer.d_values)?;
        positive("micro.half_width", self.micro.half_width)?;
        positive("micro.points_per_layer", self.micro.points_per_layer)?;
        positive("macro.half_width", self.macro_.half_width)?;
        if self.macro_.reference_refinement == 0 {
            return Err(Error::Config("macro.reference_refinement must be at least 1".into()));
        }
        if let Some(c0) = self.macro_.c0 {
            positive("macro.c0", c0)?;
        }
        positive("ddd.dt", self.ddd.dt)?;
        positive("ddd.micro_half_width", self.ddd.micro_half_width)?;
        positive("ddd.epsilon", self.ddd.epsilon)?;
        if let Some(d) = self.ddd.delta {
            positive("ddd.delta", d)?;
        }
        nonempty_positive("approx.epsilons", &self.approx.epsilons)?;
        if self.approx.probes == 0 {
            return Err(Error::Config("approx.probes must be positive".into()));
        }
        if self.reconstruct.pairs.is_empty() {
            return Err(Error::Config("reconstruct.pairs must not be empty".into()));
        }
        for &(e, d) in &self.reconstruct.pairs {
            positive("reconstruct.pairs", e)?;
            positive("reconstruct.pairs", d)?;
        }
        positive("orowan.level_spacing", self.orowan.level_spacing)?;
        positive("orowan.half_span", self.orowan.half_span)?;
        if self.orowan.mid_time <= self.orowan.half_span {
            return Err(Error::Config("orowan.mid_time must exceed orowan.half_span".into()));
        }
        self.layer.grid()?;
        self.macro_.grid()?;
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::from_config(&self.potential)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimulationConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Read and validate a JSON configuration.
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = SimulationConfig::from_json(&text)?;
    // Relative position files resolve against the config's directory.
    if let (Some(file), Some(dir)) = (&cfg.ddd.positions_file, path.parent()) {
        if file.is_relative() {
            cfg.ddd.positions_file = Some(dir.join(file));
        }
    }
    Ok(cfg)
}
