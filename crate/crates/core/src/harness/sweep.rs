//! μ-sweeps over the guaranteed-existence interval and their verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::ConditionReport;
use crate::problem::Problem;
use crate::solver::{certify, minimize, CertificateSet, SolutionRecord};
use crate::{Error, Result};

/// Minimum number of sweep points.
pub const MIN_SWEEP_POINTS: usize = 4;
/// Consecutive energies must drop by more than this fraction of their size to count as strictly decreasing.
pub const STRICT_DECREASE_TOL: f64 = 1e-8;
/// Slack allowed when checking that `‖u_μ‖_α` does not grow as μ decreases.
pub const NORM_MONOTONE_TOL: f64 = 1e-12;
/// The norm at `μ_min` must be below this fraction of the norm at `μ_max`.
pub const NORM_DECAY_RATIO: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mu_values: Vec<f64>,
    pub records: Vec<SolutionRecord>,
    pub certificates: Vec<CertificateSet>,
    /// Energies strictly decreasing in μ.
    pub monotonicity_verdict: bool,
    /// Every energy negative.
    pub negativity_verdict: bool,
    /// `‖u_μ‖_α` shrinks monotonically toward 0 as μ decreases.
    pub norm_decay_verdict: bool,
    /// Every record is the zero function; the datum produces no solutions to compare.
    pub trivial_datum: bool,
    pub conditions: ConditionReport,
}

/// `count` geometrically spaced values from `mu_min` to `mu_max` inclusive.
pub fn geometric_mus(mu_min: f64, mu_max: f64, count: usize) -> Vec<f64> {
    let ratio = mu_max / mu_min;
    (0..count)
        .map(|i| match i {
            0 => mu_min,
            i if i + 1 == count => mu_max,
            i => mu_min * ratio.powf(i as f64 / (count - 1) as f64),
        })
        .collect()
}

/// Solve at geometrically spaced μ in `[mu_min, mu_max] ⊂ (0, μ*)` and grade the
/// energies and norms against the qualitative theory.
pub fn run_sweep(problem: &Problem, mu_min: f64, mu_max: f64, count: usize) -> Result<SweepReport> {
    if count < MIN_SWEEP_POINTS {
        return Err(Error::validation(format!(
            "a sweep needs at least {MIN_SWEEP_POINTS} points, got {count}"
        )));
    }
    if !(mu_min.is_finite() && mu_max.is_finite()) {
        return Err(Error::validation(format!("μ-range [{mu_min}, {mu_max}] must be finite")));
    }
    let mu_star = problem.mu_star();
    if !(mu_min > 0.0 && mu_min < mu_max && mu_max < mu_star) {
        return Err(Error::Hypothesis(format!(
            "requested μ-range [{mu_min}, {mu_max}] must satisfy 0 < μ_min < μ_max inside the admissible interval (0, {mu_star})"
        )));
    }
    let mu_values = geometric_mus(mu_min, mu_max, count);
    let cfg = problem.solver_config();
    let records = mu_values
        .par_iter()
        .map(|&mu| minimize(problem, mu, cfg))
        .collect::<Result<Vec<_>>>()?;
    let conditions = problem.conditions().clone();
    let certificates = records.iter().map(|r| certify(r, problem, &conditions)).collect();

    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let norms: Vec<f64> = records.iter().map(|r| r.norm_alpha).collect();
    let r = records[0].r_radius;
    let gamma_bar = records[0].gamma_bar;
    let norm_cap = 0.1 * gamma_bar * r.sqrt() / problem.space().embedding_c();

    Ok(SweepReport {
        monotonicity_verdict: energies.windows(2).all(|w| w[1] < w[0] - STRICT_DECREASE_TOL * w[0].abs().max(w[1].abs())),
        negativity_verdict: energies.iter().all(|&e| e < 0.0),
        norm_decay_verdict: norm_decay(&norms, norm_cap),
        trivial_datum: records.iter().all(|r| r.coeffs.is_zero()),
        mu_values,
        records,
        certificates,
        conditions,
    })
}

/// Norms ordered by increasing μ: they must not grow as μ decreases, and the
/// smallest-μ norm must be a small fraction of the largest-μ norm and of `cap`.
fn norm_decay(norms: &[f64], cap: f64) -> bool {
    let (Some(&first), Some(&last)) = (norms.first(), norms.last()) else {
        return false;
    };
    norms.windows(2).all(|w| w[0] <= w[1] + NORM_MONOTONE_TOL)
        && first < NORM_DECAY_RATIO * last
        && first < cap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
    use crate::solver::SolverConfig;
    use crate::space::SpaceConfig;

    fn problem(nl: Nonlinearity) -> Problem {
        Problem::new(SpaceConfig::new(0.75, 1.0, 256, 16).unwrap(), nl, SolverConfig::default()).unwrap()
    }

    fn example() -> Problem {
        problem(Nonlinearity::from_spec(&NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 }).unwrap())
    }

    #[test]
    fn geometric_spacing() {
        let mus = geometric_mus(0.05, 0.5, 8);
        assert_eq!(mus.len(), 8);
        assert_eq!((mus[0], mus[7]), (0.05, 0.5));
        let ratios: Vec<f64> = mus.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }

    #[test]
    fn example_sweep_verdicts_hold() {
        let report = run_sweep(&example(), 0.05, 0.5, 8).unwrap();
        assert_eq!(report.records.len(), 8);
        assert!(report.monotonicity_verdict && report.negativity_verdict && report.norm_decay_verdict);
        assert!(!report.trivial_datum);
        for (mu, rec) in report.mu_values.iter().zip(&report.records) {
            assert_eq!(*mu, rec.mu);
        }
    }

    #[test]
    fn rejects_ranges_outside_the_admissible_interval() {
        let p = example();
        let err = run_sweep(&p, 0.6, 0.9, 8).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
        assert!(err.to_string().contains("0.53091"), "{err}");
        assert!(matches!(run_sweep(&p, 0.0, 0.3, 8), Err(Error::Hypothesis(_))));
        assert!(matches!(run_sweep(&p, 0.3, 0.1, 8), Err(Error::Hypothesis(_))));
        assert!(matches!(run_sweep(&p, 0.1, 0.3, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn zero_datum_is_flagged_trivial() {
        let report = run_sweep(&problem(Nonlinearity::zero()), 0.1, 10.0, 4).unwrap();
        assert!(report.trivial_datum);
        assert!(!report.negativity_verdict && !report.monotonicity_verdict);
        assert!(report.records.iter().all(|r| r.energy == 0.0));
    }

    #[test]
    fn norm_decay_rules() {
        assert!(norm_decay(&[0.01, 0.02, 0.05], 1.0));
        assert!(!norm_decay(&[0.02, 0.01, 0.05], 1.0));
        assert!(!norm_decay(&[0.02, 0.03, 0.05], 1.0));
        assert!(!norm_decay(&[0.01, 0.02, 0.05], 0.005));
        assert!(!norm_decay(&[], 1.0));
    }
}
