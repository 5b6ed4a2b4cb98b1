//! Scripted studies: approximation laws, reconstruction, multiscale
//! convergence, DDD-versus-micro agreement and the Orowan identity.

pub mod config;
pub mod studies;

pub use config::{load_config, DeltaRule, SimulationConfig};
pub use studies::*;
