//! Energy along rays `τ ↦ J_μ(τu)`, probing the lack of coercivity.

use serde::{Deserialize, Serialize};

use crate::problem::Problem;
use crate::space::SpectralElement;
use crate::{Error, Result};

/// Allowed shortfall of the fitted exponent below the dominant growth exponent of `F`.
pub const EXPONENT_TOL: f64 = 0.3;
/// Points at the end of the ray used by the log-log fit.
pub const FIT_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayPoint {
    pub tau: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayScan {
    pub mu: f64,
    pub points: Vec<RayPoint>,
    /// Slope of `ln|J|` against `ln τ` over the last points.
    pub fitted_exponent: f64,
    /// `J(τ_last) / τ_last^p`, carrying the sign of the dominant term.
    pub fitted_coefficient: f64,
    /// Growth exponent of `F` at infinity, when the datum has one.
    pub expected_exponent: Option<f64>,
    /// `J` is negative at the largest τ and falls at least like `τ^{p−ε}`.
    pub unbounded_below: bool,
}

impl RayScan {
    pub fn min_energy(&self) -> Option<RayPoint> {
        self.points.iter().copied().min_by(|a, b| a.energy.total_cmp(&b.energy))
    }
}

/// `count` geometrically spaced τ from `tau_min` to `tau_max` inclusive.
pub fn geometric_taus(tau_min: f64, tau_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(tau_min > 0.0 && tau_min < tau_max && tau_max.is_finite()) || count < FIT_POINTS {
        return Err(Error::validation(format!(
            "τ-range [{tau_min}, {tau_max}] with {count} points must be positive, increasing and hold at least {FIT_POINTS} points"
        )));
    }
    Ok(super::sweep::geometric_mus(tau_min, tau_max, count))
}

pub fn ray_scan(problem: &Problem, mu: f64, direction: &SpectralElement, tau_values: &[f64]) -> Result<RayScan> {
    if direction.is_zero() {
        return Err(Error::validation("ray direction must be non-zero"));
    }
    if tau_values.len() < FIT_POINTS
        || tau_values[0] <= 0.0
        || tau_values.windows(2).any(|w| w[1] <= w[0])
        || !tau_values.iter().all(|t| t.is_finite())
    {
        return Err(Error::validation(format!(
            "τ values must be positive, finite, strictly increasing and number at least {FIT_POINTS}"
        )));
    }
    let asm = problem.assembly();
    let nl = problem.nonlinearity();
    let points = tau_values
        .iter()
        .map(|&tau| Ok(RayPoint { tau, energy: asm.energy(&direction.scaled(tau), mu, nl)? }))
        .collect::<Result<Vec<_>>>()?;

    let tail = &points[points.len() - FIT_POINTS..];
    let xs: Vec<f64> = tail.iter().map(|p| p.tau.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.energy.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let fitted_exponent = slope(&xs, &ys);
    let last = tail[FIT_POINTS - 1];
    let fitted_coefficient = last.energy / last.tau.powf(fitted_exponent);
    let expected_exponent = nl.dominant_exponent().filter(|_| !nl.is_zero());
    let unbounded_below = last.energy < 0.0
        && tail.windows(2).all(|w| w[1].energy < w[0].energy)
        && expected_exponent.is_some_and(|p| fitted_exponent >= p - EXPONENT_TOL);
    Ok(RayScan {
        mu,
        points,
        fitted_exponent,
        fitted_coefficient,
        expected_exponent,
        unbounded_below,
    })
}

/// Least-squares slope.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
