//! Uniform one-dimensional grids and sampled fields with far-field metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `center - half_width ..= center + half_width` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(center: f64, half_width: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 nodes, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidGrid("center must be finite".into()));
        }
        if !n.is_power_of_two() {
            log::debug!("grid with {n} nodes is not a power of two");
        }
        Ok(Grid1D { center, half_width, n })
    }

    /// The desk-scale default: `[-40, 40]` with 4096 nodes.
    pub fn default_desk() -> Self {
        Grid1D { center: 0.0, half_width: 40.0, n: 4096 }
    }

    /// Smallest power-of-two grid on `[center - half_width, center + half_width]`
    /// whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(center: f64, half_width: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing bound must be positive, got {max_spacing}")));
        }
        let needed = (2.0 * half_width / max_spacing).ceil() as usize + 1;
        let n = needed.max(8).next_power_of_two();
        Grid1D::new(center, half_width, n)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    #[inline]
    pub fn left(&self) -> f64 {
        self.center - self.half_width
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.center + self.half_width
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.right()
        } else {
            self.left() + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Fractional node coordinate of `x` (may lie outside `0..n-1`).
    #[inline]
    pub fn position(&self, x: f64) -> f64 {
        (x - self.left()) / self.spacing()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let p = self.position(x).round();
        p.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left() && x <= self.right()
    }

    /// Same grid refined by an integer factor in the number of intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid1D::new(self.center, self.half_width, (self.n - 1) * factor + 1)
    }
}

/// A function sampled on a [`Grid1D`] together with its behaviour at infinity.
///
/// Outside the grid the field is continued as
/// `limit + (edge_value - limit) * (half_width / |x - center|)^p`
/// when `tail_power = Some(p)`, and as the constant limit otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub left_limit: f64,
    pub right_limit: f64,
    pub tail_power: Option<f64>,
}

impl ScalarField {
    pub fn new(
        grid: Grid1D,
        values: Vec<f64>,
        left_limit: f64,
        right_limit: f64,
        tail_power: Option<f64>,
    ) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        if !left_limit.is_finite() || !right_limit.is_finite() {
            return Err(Error::InvalidArgument("far-field limits must be finite".into()));
        }
        if let Some(p) = tail_power {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!("tail power must be positive, got {p}")));
            }
        }
        Ok(ScalarField { grid, values, left_limit, right_limit, tail_power })
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(
        grid: Grid1D,
        f: impl Fn(f64) -> f64,
        left_limit: f64,
        right_limit: f64,
        tail_power: Option<f64>,
    ) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        ScalarField::new(grid, values, left_limit, right_limit, tail_power)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.n], left_limit: c, right_limit: c, tail_power: None }
    }

    /// Copy of `self` with new values and the same metadata.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n);
        ScalarField { values, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Deviation of the two edge samples from their declared limits.
    pub fn edge_excess(&self) -> (f64, f64) {
        (
            self.values[0] - self.left_limit,
            self.values[self.grid.n - 1] - self.right_limit,
        )
    }

    /// Value of the far-field continuation at a point outside the grid.
    pub fn far_field_value(&self, x: f64) -> f64 {
        let g = &self.grid;
        let (limit, edge) = if x < g.center {
            (self.left_limit, self.values[0])
        } else {
            (self.right_limit, self.values[g.n - 1])
        };
        match self.tail_power {
            Some(p) => {
                let dist = (x - g.center).abs().max(g.half_width);
                limit + (edge - limit) * (g.half_width / dist).powf(p)
            }
            None => limit,
        }
    }

    /// Value at node index `m`, which may lie outside `0..n` (far-field continuation).
    pub fn extended_node(&self, m: isize) -> f64 {
        if m >= 0 && (m as usize) < self.grid.n {
            self.values[m as usize]
        } else {
            self.far_field_value(self.grid.left() + m as f64 * self.grid.spacing())
        }
    }

    /// Cubic Lagrange interpolation inside the grid, far-field continuation outside.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g.left() || x > g.right() {
            return self.far_field_value(x);
        }
        let p = g.position(x);
        let n = g.n;
        let base = (p.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = p - base as f64;
        if (t - t.round()).abs() < 1e-12 {
            let k = base + t.round() as usize;
            if k < n {
                return self.values[k];
            }
        }
        let v = &self.values[base..base + 4];
        // Lagrange basis on nodes 0, 1, 2, 3.
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3]
    }

    /// Piecewise-linear interpolation inside the grid, far-field continuation outside.
    pub fn eval_linear(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g.left() || x > g.right() {
            return self.far_field_value(x);
        }
        let p = g.position(x);
        let i = (p.floor() as usize).min(g.n - 2);
        let t = p - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// `Ok(())` when the samples are non-decreasing up to `tol`.
    pub fn check_monotone(&self, tol: f64) -> Result<()> {
        for (i, w) in self.values.windows(2).enumerate() {
            let drop = w[0] - w[1];
            if drop > tol {
                return Err(Error::NonMonotone { index: i, drop });
            }
        }
        Ok(())
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.check_monotone(tol).is_ok()
    }

    /// Largest decrease between consecutive samples (zero for monotone fields).
    pub fn worst_monotonicity_violation(&self) -> f64 {
        self.values.windows(2).fold(0.0_f64, |m, w| m.max(w[0] - w[1]))
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.grid == other.grid
    }

    /// Resample onto another grid with [`ScalarField::eval`]; metadata is kept.
    pub fn resample(&self, grid: Grid1D) -> ScalarField {
        let values = grid.nodes().into_iter().map(|x| self.eval(x)).collect();
        ScalarField { grid, values, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid1D::new(0.0, 1.0, 4).is_err());
        assert!(Grid1D::new(0.0, -1.0, 16).is_err());
        let g = Grid1D::new(1.0, 2.0, 9).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(8), 3.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn spacing_bound_picks_power_of_two() {
        let g = Grid1D::with_max_spacing(0.0, 4.0, 6.25e-4).unwrap();
        assert_eq!(g.n, 16384);
        assert!(g.spacing() <= 6.25e-4);
    }

    #[test]
    fn cubic_eval_is_exact_for_cubics() {
        let g = Grid1D::new(0.0, 2.0, 33).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x * x - x, 0.0, 0.0, None).unwrap();
        for &x in &[-1.97, -0.33, 0.0, 0.71, 1.999] {
            assert!((f.eval(x) - (x * x * x - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn far_field_is_continuous_at_edges() {
        let g = Grid1D::new(0.0, 10.0, 65).unwrap();
        let f = ScalarField::from_fn(g, |x| 1.0 / (1.0 + x * x), 0.0, 0.0, Some(2.0)).unwrap();
        assert!((f.far_field_value(10.0) - f.values[64]).abs() < 1e-15);
        // Quadratic tail: doubling the distance divides the excess by four.
        assert!((f.far_field_value(20.0) - f.values[64] / 4.0).abs() < 1e-15);
        assert_eq!(f.extended_node(-1), f.far_field_value(g.left() - g.spacing()));
    }

    #[test]
    fn monotone_check_reports_first_drop() {
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let mut v: Vec<f64> = (0..8).map(|i| i as f64).collect();
        v[5] = 3.5;
        let f = ScalarField::new(g, v, 0.0, 7.0, None).unwrap();
        match f.check_monotone(1e-12) {
            Err(Error::NonMonotone { index, .. }) => assert_eq!(index, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
