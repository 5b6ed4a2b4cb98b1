//! Discrete estimators of `I1[v]` built from the level points of `v`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::particles::ParticleSystem;

/// Index of the particle nearest to `x`; ties go to the left particle.
pub fn nearest_particle(ps: &ParticleSystem, x: f64) -> Option<usize> {
    let p = &ps.positions;
    if p.is_empty() {
        return None;
    }
    let right = p.partition_point(|&y| y < x);
    if right == 0 {
        return Some(0);
    }
    if right == p.len() {
        return Some(p.len() - 1);
    }
    let (dl, dr) = (x - p[right - 1], p[right] - x);
    Some(if dl <= dr { right - 1 } else { right })
}

/// `(1/pi) sum_{i != i0} eps / (x_i - x)` with `i0` the nearest particle.
pub fn particle_sum_full(ps: &ParticleSystem, x: f64) -> Result<f64> {
    let i0 = nearest_particle(ps, x)
        .ok_or_else(|| Error::EmptyParticleSystem("no particles to sum over".into()))?;
    let eps = ps.epsilon;
    let s: f64 = ps
        .positions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != i0)
        .map(|(_, &y)| eps / (y - x))
        .sum();
    Ok(s / PI)
}

/// `(1/pi) sum_{|x_i - x| >= r} eps / (x_i - x)`.
pub fn particle_sum_truncated(ps: &ParticleSystem, x: f64, r: f64) -> f64 {
    let eps = ps.epsilon;
    let s: f64 = ps
        .positions
        .iter()
        .filter(|&&y| (y - x).abs() >= r)
        .map(|&y| eps / (y - x))
        .sum();
    s / PI
}

/// Whether `r` lies in the admissible window band `[eps^{5/8}, eps^{1/2}]`.
pub fn window_radius_admissible(eps: f64, r: f64) -> bool {
    r >= eps.powf(0.625) && r <= eps.sqrt()
}

/// `(1/pi) sum_{i != i0, |x_i - x| < r} eps / (x_i - x)`.
///
/// Together with [`particle_sum_truncated`] this reproduces
/// [`particle_sum_full`] whenever the nearest particle lies within `r` of `x`.
/// Radii outside `[eps^{5/8}, eps^{1/2}]` are evaluated but logged.
pub fn short_window_sum(ps: &ParticleSystem, x: f64, r: f64) -> f64 {
    if !window_radius_admissible(ps.epsilon, r) {
        log::warn!("window radius {r:e} outside [eps^5/8, eps^1/2] for eps = {:e}", ps.epsilon);
    }
    let Some(i0) = nearest_particle(ps, x) else { return 0.0 };
    let eps = ps.epsilon;
    let s: f64 = ps
        .positions
        .iter()
        .enumerate()
        .filter(|&(i, &y)| i != i0 && (y - x).abs() < r)
        .map(|(_, &y)| eps / (y - x))
        .sum();
    s / PI
}

/// `sum_{i != i0} eps^2 / (x_i - x)^2`, bounded by `(4 pi^2 / 3) L^2` for a
/// profile with Lipschitz constant `L`.
pub fn inverse_square_sum(ps: &ParticleSystem, x: f64) -> Result<f64> {
    let i0 = nearest_particle(ps, x)
        .ok_or_else(|| Error::EmptyParticleSystem("no particles to sum over".into()))?;
    let eps2 = ps.epsilon * ps.epsilon;
    Ok(ps
        .positions
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != i0)
        .map(|(_, &y)| eps2 / ((y - x) * (y - x)))
        .sum())
}
