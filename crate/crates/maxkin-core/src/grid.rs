//! Logarithmic grids and sampled functions of x ≥ 0.
//!
//! A [`GridFunction`] holds samples of a bounded function on a log-spaced
//! grid of positive nodes plus the exact node x = 0 and a tail rule for
//! x beyond the last node. Evaluation between nodes is linear in
//! (ln x, value); between 0 and the first node it blends the value at zero
//! toward the first sample linearly in x, which is first-order accurate for
//! characteristic-type functions (small-x expansion 1 − c·x in the working
//! variable).

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{require, Error, Result};

#[allow(unused_imports)]
use num_traits::Float as _;

/// Default grid: covers the x → 0 Taylor regime and the far tail needed by
/// negative-μ rescaling. The node count keeps the linear-interpolation error
/// of smooth characteristic functions below ~1e-9 in sup norm.
pub const DEFAULT_X_MIN: f64 = 1e-8;
pub const DEFAULT_X_MAX: f64 = 1e6;
pub const DEFAULT_GRID_SIZE: usize = 262_144;

/// Strictly increasing positive abscissas, usually uniform in ln x.
#[derive(Debug)]
pub struct Grid {
    pub nodes: Vec<f64>,
    ln_nodes: Vec<f64>,
    /// Set when the nodes are uniform in ln x (enables O(1) lookup and the
    /// shift-based operator application).
    uniform_step: Option<f64>,
}

impl Grid {
    /// `n` log-spaced nodes covering [x_min, x_max].
    pub fn log_spaced(x_min: f64, x_max: f64, n: usize) -> Result<Arc<Self>> {
        require(x_min > 0.0, "x_min", x_min, "> 0")?;
        require(x_max > x_min, "x_max", x_max, "> x_min")?;
        if n < 2 {
            return Err(Error::GridTooSmall { needed: 2, got: n });
        }
        let ln_min = x_min.ln();
        let ln_max = x_max.ln();
        let h = (ln_max - ln_min) / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut ln_nodes = Vec::with_capacity(n);
        for i in 0..n {
            let ln_x = if i == n - 1 { ln_max } else { ln_min + h * i as f64 };
            ln_nodes.push(ln_x);
            nodes.push(if i == 0 {
                x_min
            } else if i == n - 1 {
                x_max
            } else {
                ln_x.exp()
            });
        }
        Ok(Arc::new(Grid { nodes, ln_nodes, uniform_step: Some(h) }))
    }

    /// Default production grid (see [`DEFAULT_GRID_SIZE`]).
    pub fn default_grid() -> Arc<Self> {
        Self::log_spaced(DEFAULT_X_MIN, DEFAULT_X_MAX, DEFAULT_GRID_SIZE).expect("default grid is valid")
    }

    /// Wrap explicit nodes (must be positive, strictly increasing).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Arc<Self>> {
        if nodes.len() < 2 {
            return Err(Error::GridTooSmall { needed: 2, got: nodes.len() });
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid);
        }
        let ln_nodes: Vec<f64> = nodes.iter().map(|x| x.ln()).collect();
        let h = (ln_nodes[nodes.len() - 1] - ln_nodes[0]) / (nodes.len() - 1) as f64;
        let uniform = ln_nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs().max(1e-300));
        Ok(Arc::new(Grid {
            nodes,
            ln_nodes,
            uniform_step: uniform.then_some(h),
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn ln_nodes(&self) -> &[f64] {
        &self.ln_nodes
    }

    /// ln-spacing when the grid is uniform in ln x.
    pub fn uniform_log_step(&self) -> Option<f64> {
        self.uniform_step
    }

    /// Index i with nodes[i] ≤ x < nodes[i+1], clamped to [0, len-2].
    fn bracket_index(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|n| *n <= x);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.len() == b.len() && a.nodes[0] == b.nodes[0] && a.x_max() == b.x_max())
}

/// A bounded function of x ≥ 0 sampled on a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub value_at_zero: f64,
    /// Value as x → ∞ (0 for profiles and decaying characteristic functions).
    pub tail_limit: f64,
    /// Optional algebraic extrapolation order q: beyond the last node the
    /// function follows tail_limit + (u(x_max) − tail_limit)·(x/x_max)^−q.
    pub tail_exponent: Option<f64>,
    /// Marks unit-ball characteristic-type functions (value_at_zero = 1).
    pub characteristic: bool,
}

impl GridFunction {
    /// Sample `f` on the grid with explicit boundary data.
    pub fn sample<F: Fn(f64) -> f64>(grid: &Arc<Grid>, f: F, value_at_zero: f64, tail_limit: f64) -> Self {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        GridFunction {
            grid: Arc::clone(grid),
            values,
            value_at_zero,
            tail_limit,
            tail_exponent: None,
            characteristic: false,
        }
    }

    /// Sample a characteristic-type function: value 1 at x = 0, decaying tail.
    pub fn characteristic<F: Fn(f64) -> f64>(grid: &Arc<Grid>, f: F) -> Self {
        let mut gf = Self::sample(grid, f, 1.0, 0.0);
        gf.characteristic = true;
        gf
    }

    /// The canonical initial datum e^{−x}.
    pub fn exponential(grid: &Arc<Grid>) -> Self {
        Self::characteristic(grid, |x| (-x).exp())
    }

    /// e^{−x^p} for 0 < p ≤ 1 (infinitely divisible for those p).
    pub fn stretched_exponential(grid: &Arc<Grid>, p: f64) -> Self {
        Self::characteristic(grid, |x| (-x.powf(p)).exp())
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        let mut gf = Self::sample(grid, |_| c, c, c);
        gf.characteristic = c == 1.0;
        gf
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// sup over the sampled representation: nodes, x = 0 and the tail.
    pub fn norm(&self) -> f64 {
        let mut m = self.value_at_zero.abs().max(self.tail_limit.abs());
        for v in &self.values {
            m = m.max(v.abs());
        }
        m
    }

    /// Evaluate at x ≥ 0 per the grid rules; errors on negative x.
    pub fn eval(&self, x: f64) -> Result<f64> {
        require(x >= 0.0, "x", x, ">= 0")?;
        Ok(self.eval_nonneg(x))
    }

    /// Evaluation rules: exact at x = 0, linear blend on (0, x_min), linear
    /// in (ln x, value) inside the grid, tail rule beyond.
    pub(crate) fn eval_nonneg(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        let nodes = &self.grid.nodes;
        if x == 0.0 {
            return self.value_at_zero;
        }
        let x_min = nodes[0];
        if x < x_min {
            let t = x / x_min;
            return self.value_at_zero + (self.values[0] - self.value_at_zero) * t;
        }
        let x_max = *nodes.last().unwrap();
        if x > x_max {
            return self.tail_value(x);
        }
        let i = self.grid.bracket_index(x);
        // exact at nodes (the cached ln-abscissas differ from ln(x) by an ulp)
        if x == nodes[i] {
            return self.values[i];
        }
        if x == nodes[i + 1] {
            return self.values[i + 1];
        }
        let ln = &self.grid.ln_nodes;
        let t = (x.ln() - ln[i]) / (ln[i + 1] - ln[i]);
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    pub(crate) fn tail_value(&self, x: f64) -> f64 {
        let last = *self.values.last().unwrap();
        match self.tail_exponent {
            Some(q) => {
                let factor = (x / self.grid.x_max()).powf(-q);
                self.tail_limit + (last - self.tail_limit) * factor
            }
            None => self.tail_limit,
        }
    }

    /// Pointwise damping by e^{−c·x}; preserves characteristic type.
    pub fn gaussian_damp(&self, c: f64) -> Result<GridFunction> {
        require(c > 0.0, "c", c, "> 0")?;
        let mut out = self.clone();
        for (v, &x) in out.values.iter_mut().zip(&self.grid.nodes) {
            *v *= (-c * x).exp();
        }
        out.tail_limit = 0.0;
        out.tail_exponent = None;
        Ok(out)
    }

    /// Dilation u(x·e^τ) resampled on the same grid.
    pub fn dilate(&self, tau: f64) -> GridFunction {
        let factor = tau.exp();
        let values = self.grid.nodes.iter().map(|&x| self.eval_nonneg(x * factor)).collect();
        GridFunction {
            grid: Arc::clone(&self.grid),
            values,
            value_at_zero: self.value_at_zero,
            tail_limit: self.tail_limit,
            tail_exponent: None,
            characteristic: self.characteristic,
        }
    }

    /// α·u + β·v on a shared grid. The result is flagged characteristic only
    /// for convex combinations of characteristic functions.
    pub fn lin_comb(alpha: f64, u: &GridFunction, beta: f64, v: &GridFunction) -> GridFunction {
        assert!(same_grid(&u.grid, &v.grid), "lin_comb requires a shared grid");
        let values = u
            .values
            .iter()
            .zip(&v.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        GridFunction {
            grid: Arc::clone(&u.grid),
            values,
            value_at_zero: alpha * u.value_at_zero + beta * v.value_at_zero,
            tail_limit: alpha * u.tail_limit + beta * v.tail_limit,
            tail_exponent: None,
            characteristic: u.characteristic
                && v.characteristic
                && alpha >= 0.0
                && beta >= 0.0
                && (alpha + beta - 1.0).abs() < 1e-12,
        }
    }

    /// max over nodes of |self − other| (shared grid).
    pub fn sup_diff(&self, other: &GridFunction) -> f64 {
        assert!(same_grid(&self.grid, &other.grid), "sup_diff requires a shared grid");
        let mut m = (self.value_at_zero - other.value_at_zero).abs();
        for (a, b) in self.values.iter().zip(&other.values) {
            m = m.max((a - b).abs());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn small_grid() -> Arc<Grid> {
        Grid::log_spaced(1e-8, 1e6, 4097).unwrap()
    }

    #[test]
    fn eval_is_exact_at_nodes_and_zero() {
        let grid = small_grid();
        let u = GridFunction::exponential(&grid);
        assert_eq!(u.eval(0.0).unwrap(), 1.0);
        for &i in &[0usize, 1, 77, 4096] {
            let x = grid.nodes[i];
            assert_eq!(u.eval(x).unwrap(), u.values[i]);
        }
    }

    #[test]
    fn eval_clamps_to_tail_limit_without_exponent() {
        let grid = small_grid();
        let u = GridFunction::exponential(&grid);
        assert_eq!(u.eval(2.0 * grid.x_max()).unwrap(), 0.0);
        let mut v = u.clone();
        v.tail_limit = 0.25;
        assert_eq!(v.eval(2.0 * grid.x_max()).unwrap(), 0.25);
    }

    #[test]
    fn eval_algebraic_tail() {
        let grid = small_grid();
        let mut u = GridFunction::sample(&grid, |x| x.powf(-2.0), 0.0, 0.0);
        u.tail_exponent = Some(2.0);
        let x = 4.0 * grid.x_max();
        assert_relative_eq!(u.eval(x).unwrap(), x.powf(-2.0), max_relative = 1e-12);
    }

    #[test]
    fn eval_blends_linearly_below_first_node() {
        let grid = small_grid();
        let u = GridFunction::exponential(&grid);
        let x = 0.5 * grid.x_min();
        let expect = 1.0 + (u.values[0] - 1.0) * 0.5;
        assert_abs_diff_eq!(u.eval(x).unwrap(), expect, epsilon = 1e-16);
        // first-order accurate for 1 - x + ...
        assert_abs_diff_eq!(u.eval(x).unwrap(), (-x).exp(), epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_negative() {
        let grid = small_grid();
        let u = GridFunction::exponential(&grid);
        assert!(u.eval(-1.0).is_err());
    }

    #[test]
    fn interpolation_error_is_small_on_smooth_functions() {
        let grid = Grid::default_grid();
        let u = GridFunction::exponential(&grid);
        // worst region for e^{-x} in ln x is around x ≈ 2.6
        let mut worst: f64 = 0.0;
        let mut x = 1.0;
        while x < 8.0 {
            worst = worst.max((u.eval(x).unwrap() - (-x).exp()).abs());
            x *= 1.000_037;
        }
        assert!(worst < 1.0e-9, "interpolation error {worst} too large");
    }

    #[test]
    fn dilation_matches_closed_form() {
        let grid = small_grid();
        let u = GridFunction::exponential(&grid);
        let d = u.dilate(0.3);
        let factor = 0.3f64.exp();
        for &i in &[100usize, 2000, 3000] {
            let x = grid.nodes[i];
            assert_relative_eq!(d.values[i], (-(x * factor)).exp(), epsilon = 1e-8, max_relative = 1e-6);
        }
    }

    #[test]
    fn gaussian_damp_preserves_zero_value() {
        let grid = small_grid();
        let one = GridFunction::constant(&grid, 1.0);
        let damped = one.gaussian_damp(1.0).unwrap();
        assert_eq!(damped.value_at_zero, 1.0);
        let i = 2048;
        assert_relative_eq!(damped.values[i], (-grid.nodes[i]).exp(), max_relative = 1e-14);
        let twice = damped.gaussian_damp(1.0).unwrap();
        assert_relative_eq!(twice.values[i], (-2.0 * grid.nodes[i]).exp(), max_relative = 1e-13);
        assert!(one.gaussian_damp(0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn eval_stays_between_neighboring_samples(x in 1e-8f64..1e6) {
            // linear interpolation cannot overshoot the bracketing samples
            let grid = small_grid();
            let u = GridFunction::exponential(&grid);
            let i = grid.nodes.partition_point(|n| *n <= x).saturating_sub(1).min(grid.len() - 2);
            let lo = u.values[i].min(u.values[i + 1]);
            let hi = u.values[i].max(u.values[i + 1]);
            let v = u.eval(x).unwrap();
            proptest::prop_assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
        }

        #[test]
        fn characteristic_mixtures_stay_in_the_unit_ball(
            c1 in 0.01f64..10.0,
            c2 in 0.01f64..10.0,
            a in 0.0f64..1.0,
            tau in -0.5f64..0.5,
        ) {
            let grid = small_grid();
            let u = GridFunction::characteristic(&grid, |x| {
                a * (-c1 * x).exp() + (1.0 - a) * (-c2 * x).exp()
            });
            proptest::prop_assert!(u.norm() <= 1.0 + 1e-12);
            proptest::prop_assert!(u.dilate(tau).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn from_nodes_detects_uniform_log_spacing() {
        let grid = small_grid();
        let rebuilt = Grid::from_nodes(grid.nodes.clone()).unwrap();
        assert!(rebuilt.uniform_log_step().is_some());
        let irregular = Grid::from_nodes(alloc::vec![0.1, 1.0, 2.0, 100.0]).unwrap();
        assert!(irregular.uniform_log_step().is_none());
        assert!(Grid::from_nodes(alloc::vec![1.0, 1.0]).is_err());
        assert!(Grid::from_nodes(alloc::vec![-1.0, 1.0]).is_err());
    }
}
