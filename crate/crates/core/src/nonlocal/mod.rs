//! Nonlocal operators: the half-Laplacian `I1`, its short/long split, the
//! Hilbert transform and the particle-sum estimators of `I1`.

pub mod lattice;
pub mod particle_sums;
pub mod spectral;
pub mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

pub use lattice::Summation;
pub use particle_sums::{
    inverse_square_sum, nearest_particle, particle_sum_full, particle_sum_truncated, short_window_sum,
    window_radius_admissible,
};
pub use split::i1_split;

/// Evaluation route for `I1` and `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorBackend {
    /// Lattice principal-value sums with far-field corrections.
    #[default]
    PvQuadrature,
    /// Fourier multiplier on the periodic extension.
    Spectral,
}

/// Reject fields whose edge samples disagree with their declared limits while
/// no tail model says how the gap closes.
fn check_far_field(f: &ScalarField) -> Result<()> {
    if f.tail_power.is_some() {
        return Ok(());
    }
    let (el, er) = f.edge_excess();
    let tol = 1e-6 * f.max_abs().max(1.0);
    if el.abs() > tol || er.abs() > tol {
        return Err(Error::MissingFarField(format!(
            "edge values differ from the limits by {el:e} / {er:e} and no tail power is declared"
        )));
    }
    Ok(())
}

/// `I1[f]` at every grid node.
pub fn i1_apply(f: &ScalarField, backend: OperatorBackend) -> Result<ScalarField> {
    i1_apply_with(f, backend, Summation::default())
}

/// [`i1_apply`] with an explicit summation strategy for the quadrature path.
pub fn i1_apply_with(f: &ScalarField, backend: OperatorBackend, summation: Summation) -> Result<ScalarField> {
    match backend {
        OperatorBackend::PvQuadrature => {
            check_far_field(f)?;
            Ok(lattice::half_laplacian(f, summation))
        }
        OperatorBackend::Spectral => spectral::half_laplacian(f),
    }
}

/// `H[f]` at every grid node.
pub fn hilbert_apply(f: &ScalarField, backend: OperatorBackend) -> Result<ScalarField> {
    match backend {
        OperatorBackend::PvQuadrature => {
            check_far_field(f)?;
            lattice::hilbert(f, Summation::default())
        }
        OperatorBackend::Spectral => spectral::hilbert(f),
    }
}
