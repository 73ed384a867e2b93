//! Discrete fractional operators on uniform grids.
//!
//! All operators use the product-trapezoidal rule: the weakly singular
//! kernel is integrated exactly against the piecewise-linear interpolant of
//! the sampled function. On a uniform grid the resulting weights depend
//! only on the node offset, so one weight table serves every node.

mod gamma;
mod quadrature;

use std::f64::consts::PI;

pub use gamma::{euler_gamma, GAMMA_MAX_ARG};
pub(crate) use gamma::gamma_unchecked;
pub(crate) use quadrature::{graded_rule, TrigMoments};

use crate::{Error, Result};

/// Smallest admissible number of intervals.
pub const MIN_INTERVALS: usize = 16;

/// Orders closer to 1/2 than this (in `|cos(πα)|`) are rejected.
pub const MIN_ABS_COS: f64 = 1e-6;

/// Uniform partition `t_i = i·T/n` of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t_end: f64,
    n: usize,
}

impl Grid {
    pub fn new(t_end: f64, n: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::validation(format!("interval length T = {t_end} must be positive")));
        }
        if n < MIN_INTERVALS {
            return Err(Error::validation(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {n}"
            )));
        }
        Ok(Grid { t_end, n })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of intervals `n`; there are `n + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_end
        } else {
            i as f64 * self.t_end / self.n as f64
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n + 1).map(|i| self.node(i))
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.len()];
        w[0] = 0.5 * h;
        w[self.n] = 0.5 * h;
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let inner: f64 = values[1..self.n].iter().sum();
        self.step() * (inner + 0.5 * (values[0] + values[self.n]))
    }

    /// Running trapezoid integral `∫_0^{t_i} g`, zero at `t_0`.
    pub fn cumulative_integral(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        let h = self.step();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(values.len());
        out.push(0.0);
        for pair in values.windows(2) {
            acc += 0.5 * h * (pair[0] + pair[1]);
            out.push(acc);
        }
        out
    }
}

/// Samples of a function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::validation(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite sample at node {i}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        GridFunction {
            grid: self.grid,
            values,
        }
    }
}

/// Order `γ > 0` of a Riemann–Liouville integral.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct IntegralOrder(f64);

impl IntegralOrder {
    pub fn new(gamma: f64) -> Result<Self> {
        // Γ(γ + 2) must stay finite for the weight scale.
        if !(gamma > 0.0 && gamma + 2.0 <= GAMMA_MAX_ARG) {
            return Err(Error::domain(format!("integration order {gamma} must be positive")));
        }
        Ok(IntegralOrder(gamma))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Order `α ∈ (1/2, 1]` of a Caputo derivative, bounded away from 1/2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DerivativeOrder(f64);

impl DerivativeOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::domain(format!(
                "differentiation order {alpha} outside (1/2, 1]"
            )));
        }
        if (PI * alpha).cos().abs() < MIN_ABS_COS {
            return Err(Error::domain(format!(
                "differentiation order {alpha} too close to 1/2 (|cos(πα)| < {MIN_ABS_COS})"
            )));
        }
        Ok(DerivativeOrder(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn abs_cos(self) -> f64 {
        (PI * self.0).cos().abs()
    }

    /// Order `1 − α` of the integral inside the Caputo derivative; `None` at α = 1.
    pub fn complement(self) -> Option<IntegralOrder> {
        if self.0 < 1.0 {
            Some(IntegralOrder(1.0 - self.0))
        } else {
            None
        }
    }
}

/// Product-trapezoid weight table for one (n, γ) pair.
///
/// `I(t_j) = h^γ/Γ(γ+2) · ( start[j]·u_0 + Σ_{i=1..j} conv[j−i]·u_i )`.
#[derive(Debug, Clone)]
pub struct RlOperator {
    grid: Grid,
    scale: f64,
    conv: Vec<f64>,
    start: Vec<f64>,
}

// Beyond this offset the closed-form differences lose digits; use the series.
const SERIES_THRESHOLD: usize = 32;

impl RlOperator {
    pub fn new(grid: Grid, order: IntegralOrder) -> Self {
        let gamma = order.value();
        let p = gamma + 1.0;
        let n = grid.intervals();
        let conv = (0..=n).map(|m| interior_weight(m, p)).collect();
        let start = (0..=n).map(|j| start_weight(j, gamma)).collect();
        let scale = grid.step().powf(gamma) / gamma_unchecked(gamma + 2.0);
        RlOperator {
            grid,
            scale,
            conv,
            start,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Left integral `(1/Γ(γ)) ∫_0^t (t−s)^{γ−1} u(s) ds` at every node.
    pub fn apply_left(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.grid.len(), "sample count does not match grid");
        let mut out = vec![0.0; u.len()];
        for (j, slot) in out.iter_mut().enumerate().skip(1) {
            let mut acc = self.start[j] * u[0];
            for (w, ui) in self.conv[..j].iter().rev().zip(&u[1..=j]) {
                acc += w * ui;
            }
            *slot = self.scale * acc;
        }
        out
    }

    /// Right integral `(1/Γ(γ)) ∫_t^T (s−t)^{γ−1} u(s) ds`: the left rule on the reflected grid.
    pub fn apply_right(&self, u: &[f64]) -> Vec<f64> {
        let reversed: Vec<f64> = u.iter().rev().copied().collect();
        let mut out = self.apply_left(&reversed);
        out.reverse();
        out
    }
}

/// `(m+1)^p − 2m^p + (m−1)^p` for m ≥ 1, and 1 at m = 0.
fn interior_weight(m: usize, p: f64) -> f64 {
    match m {
        0 => 1.0,
        m if m < SERIES_THRESHOLD => {
            let m = m as f64;
            (m + 1.0).powf(p) - 2.0 * m.powf(p) + (m - 1.0).powf(p)
        }
        m => {
            // m^p ((1+x)^p − 2 + (1−x)^p) = 2 m^p Σ_k C(p, 2k) x^{2k}, x = 1/m
            let x2 = (m as f64).recip().powi(2);
            let mut binom = 1.0;
            let mut pow = 1.0;
            let mut sum = 0.0;
            for k in 1..40 {
                let a = (2 * k - 1) as f64;
                let b = (2 * k) as f64;
                binom *= (p - a + 1.0) * (p - b + 1.0) / (a * b);
                pow *= x2;
                let term = binom * pow;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
            2.0 * (m as f64).powf(p) * sum
        }
    }
}

/// `(j−1)^{γ+1} − (j−1−γ) j^γ`, the weight of `u_0` at node j ≥ 1.
fn start_weight(j: usize, gamma: f64) -> f64 {
    match j {
        0 => 0.0,
        j if j < SERIES_THRESHOLD => {
            let j = j as f64;
            (j - 1.0).powf(gamma + 1.0) - (j - 1.0 - gamma) * j.powf(gamma)
        }
        j => {
            // j^γ Σ_{m≥1} (−1)^{m+1} C(γ+1, m+1) x^m, x = 1/j
            let p = gamma + 1.0;
            let x = (j as f64).recip();
            let mut binom = p; // C(p, 1)
            let mut pow = 1.0;
            let mut sum = 0.0;
            for m in 1..60 {
                let k = (m + 1) as f64;
                binom *= (p - k + 1.0) / k;
                pow *= x;
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                let term = sign * binom * pow;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
            (j as f64).powf(gamma) * sum
        }
    }
}

/// Left Riemann–Liouville integral of order γ; zero at `t_0`.
pub fn rl_left_integral(u: &GridFunction, gamma: IntegralOrder) -> GridFunction {
    let op = RlOperator::new(u.grid(), gamma);
    u.with_values(op.apply_left(u.values()))
}

/// Right Riemann–Liouville integral of order γ; zero at `t_n`.
pub fn rl_right_integral(u: &GridFunction, gamma: IntegralOrder) -> GridFunction {
    let op = RlOperator::new(u.grid(), gamma);
    u.with_values(op.apply_right(u.values()))
}

/// Left Caputo derivative of order α from samples of the classical derivative `u′`.
pub fn caputo_left(u_prime: &GridFunction, alpha: DerivativeOrder) -> GridFunction {
    match alpha.complement() {
        None => u_prime.clone(),
        Some(order) => rl_left_integral(u_prime, order),
    }
}

/// Right Caputo derivative of order α from samples of `u′`; `−u′` at α = 1.
pub fn caputo_right(u_prime: &GridFunction, alpha: DerivativeOrder) -> GridFunction {
    let values = match alpha.complement() {
        None => u_prime.values().iter().map(|v| -v).collect(),
        Some(order) => {
            let op = RlOperator::new(u_prime.grid(), order);
            op.apply_right(u_prime.values()).into_iter().map(|v| -v).collect()
        }
    };
    u_prime.with_values(values)
}
