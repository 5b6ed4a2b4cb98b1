use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::{info, warn};

use orowan_core::harness::{load_config, run_study, SimulationConfig, StudyKind};

/// Experiments for nonlocal dislocation dynamics: micro, particle and macro scales.
#[derive(Debug, Parser)]
#[command(name = "orowan-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    study: Study,

    /// JSON configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV tables and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Study {
    /// Transition layer against its closed form, plus tail checks.
    Layer,
    /// Mobility constant for each configured d.
    C0,
    /// One micro run with monotonicity and bracket checks.
    Micro,
    /// One macro run with mass and far-field checks.
    Macro,
    /// Discrete dislocation dynamics.
    Ddd,
    /// Particle sums against the principal-value integral.
    Approx,
    /// Layered reconstruction of a profile from its level points.
    Reconstruct,
    /// Micro solutions against the macro reference over the epsilon list.
    Converge,
    /// Level-point velocities against the Orowan law.
    Orowan,
}

impl From<Study> for StudyKind {
    fn from(s: Study) -> Self {
        match s {
            Study::Layer => StudyKind::Layer,
            Study::C0 => StudyKind::C0,
            Study::Micro => StudyKind::Micro,
            Study::Macro => StudyKind::Macro,
            Study::Ddd => StudyKind::Ddd,
            Study::Approx => StudyKind::Approx,
            Study::Reconstruct => StudyKind::Reconstruct,
            Study::Converge => StudyKind::Converge,
            Study::Orowan => StudyKind::Orowan,
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => load_config(path).with_context(|| format!("loading {}", path.display()))?,
        None => SimulationConfig::default(),
    };
    let kind = StudyKind::from(cli.study);
    info!("running {} into {}", kind.name(), cli.out.display());
    let outcome = run_study(kind, &cfg, &cli.out).with_context(|| format!("study {}", kind.name()))?;
    for row in &outcome.gates.rows {
        let tag = if row.pass { "pass" } else { "FAIL" };
        println!("{tag}  {:<40} {:>12.4e}  (threshold {:.4e})", row.label, row.measured, row.threshold);
    }
    for w in &outcome.gates.warnings {
        warn!("{w}");
    }
    println!(
        "{}: {} in {:.2}s, manifest at {}",
        kind.name(),
        if outcome.passed { "passed" } else { "failed" },
        outcome.wall_time_s,
        cli.out.join("manifest.json").display()
    );
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
