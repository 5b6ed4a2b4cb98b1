//! Multiscale dislocation dynamics on the line.
//!
//! The crate couples three levels of description of a one-dimensional
//! dislocation population:
//!
//! - the rescaled Peierls–Nabarro phase-field equation
//!   `delta u_t = I1[u] - W'(u / eps) / delta` ([`solvers::micro`]);
//! - the discrete dislocation dynamics of the level points ([`particles`]);
//! - the macroscopic Orowan-law equation `u_t = c0 u_x I1[u]`, solved on the
//!   density `f = u_x` ([`solvers::macroscopic`]);
//!
//! together with the nonlocal operators they share ([`nonlocal`]), the
//! transition layer and its mobility constant ([`layer`]) and the scripted
//! convergence studies ([`harness`]).
//!
//! Sign conventions: `I1 = -(-Laplacian)^{1/2}` with symbol `-|xi|`, and
//! `H[v](x) = (1/pi) PV int v(y) / (y - x) dy` with symbol `i sgn(xi)`, so that
//! `I1[u] = H[u_x]`.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Stencil loops read clearer with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod field;
pub mod harness;
pub mod io;
pub mod layer;
pub mod nonlocal;
pub mod numerics;
pub mod particles;
pub mod potential;
pub mod profiles;
pub mod quadrature;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{Grid1D, ScalarField};
pub use layer::{CorrectorProfile, LayerProfile};
pub use nonlocal::OperatorBackend;
pub use particles::ParticleSystem;
pub use potential::PotentialSpec;
pub use report::{ConvergenceReport, ValidationReport};
pub use solvers::{MacroState, MicroState};
