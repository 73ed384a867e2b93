//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use fracvar::nonlinearity::{Nonlinearity, NonlinearitySpec};
use fracvar::problem::Problem;
use fracvar::solver::SolverConfig;
use fracvar::space::SpaceConfig;
use rand::Rng;

pub fn power_sum() -> Nonlinearity {
    Nonlinearity::from_spec(&NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 }).unwrap()
}

pub fn problem(alpha: f64, t_end: f64, n: usize, k_max: usize, nl: Nonlinearity) -> Problem {
    Problem::new(SpaceConfig::new(alpha, t_end, n, k_max).unwrap(), nl, SolverConfig::default()).unwrap()
}

/// Solve the tridiagonal system with sub-, main and super-diagonals `a`, `b`, `c`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let m = b.len();
    let (mut cp, mut dp) = (vec![0.0; m], vec![0.0; m]);
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..m {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = dp[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Positive solution of `2u″ + μ f(u) = 0`, `u(0) = u(T) = 0`, by the second-order
/// three-point scheme: monotone Picard sweeps from a positive start (valid for
/// sublinear-at-zero data), then Newton polishing. Returns the `n + 1` node values.
pub fn classical_oracle(nl: &Nonlinearity, mu: f64, t_end: f64, n: usize) -> Vec<f64> {
    let h = t_end / n as f64;
    let m = n - 1;
    // −2u″ ≈ (2/h²)(−u_{i−1} + 2u_i − u_{i+1})
    let k = 2.0 / (h * h);
    let mut u: Vec<f64> = (1..n).map(|i| 1e-3 * (std::f64::consts::PI * i as f64 / n as f64).sin()).collect();
    for _ in 0..400 {
        let rhs: Vec<f64> = u.iter().map(|&v| mu * nl.f(v)).collect();
        let next = thomas(&vec![-k; m], &vec![2.0 * k; m], &vec![-k; m], &rhs);
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        u = next;
        if change <= 1e-15 * scale {
            break;
        }
    }
    for _ in 0..20 {
        // residual of −2u″ − μ f(u) and its Jacobian
        let res: Vec<f64> = (0..m)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { u[i - 1] };
                let right = if i + 1 == m { 0.0 } else { u[i + 1] };
                k * (2.0 * u[i] - left - right) - mu * nl.f(u[i])
            })
            .collect();
        let dfd = |v: f64| {
            let e = 1e-7 * v.abs().max(1e-12);
            (nl.f(v + e) - nl.f(v - e)) / (2.0 * e)
        };
        let diag: Vec<f64> = u.iter().map(|&v| 2.0 * k - mu * dfd(v)).collect();
        let delta = thomas(&vec![-k; m], &diag, &vec![-k; m], &res);
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui -= di;
        }
        let step = delta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if step <= 1e-16 * u.iter().fold(0.0f64, |a, b| a.max(b.abs())) {
            break;
        }
    }
    let mut out = vec![0.0];
    out.extend(u);
    out.push(0.0);
    out
}

/// Random trigonometric polynomial `Σ a_j sin(jπt/T + φ_j) + b t/T` and its derivative.
pub struct SmoothFn {
    terms: Vec<(f64, f64, f64)>,
    slope: f64,
    t_end: f64,
}

impl SmoothFn {
    pub fn random(rng: &mut impl Rng, t_end: f64) -> Self {
        let terms = (1..=4)
            .map(|j| {
                let freq = j as f64 * std::f64::consts::PI / t_end;
                (rng.random_range(-1.0..1.0) / j as f64, freq, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        SmoothFn { terms, slope: rng.random_range(-1.0..1.0), t_end }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum::<f64>() + self.slope * t / self.t_end
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.terms.iter().map(|(a, w, p)| a * w * (w * t + p).cos()).sum::<f64>() + self.slope / self.t_end
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
