//! Existence conditions and admissible parameter ranges.
//!
//! The central quantity is `sup_{γ>0} γ² / max_{|ξ|≤γ} F(ξ)`, compared with
//! `κ_α = T^{2α}/(Γ(α)²|cos(πα)|(2α−1))`. It is searched on a log grid of
//! `γ ∈ [1e-6, 1e6]` and refined by golden-section search around the best
//! probe. Limits are probed numerically and reported as tri-states.

use serde::{Deserialize, Serialize};

use crate::kernel::{gamma_unchecked, DerivativeOrder};
use crate::nonlinearity::Nonlinearity;
use crate::{Error, Result};

pub const PROBE_MIN: f64 = 1e-6;
pub const PROBE_MAX: f64 = 1e6;
pub const PROBE_COUNT: usize = 2001;
const SCAN_PER_DECADE: usize = 10_000;
const GOLDEN_REL_TOL: f64 = 1e-8;
/// Every this many probes is kept in the report.
const PROBE_STRIDE: usize = 20;

/// `κ_α = T^{2α} / (Γ(α)² |cos(πα)| (2α − 1))`.
pub fn kappa_alpha(alpha: DerivativeOrder, t_end: f64) -> f64 {
    let a = alpha.value();
    let g = gamma_unchecked(a);
    t_end.powf(2.0 * a) / (g * g * alpha.abs_cos() * (2.0 * a - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeBoundary {
    Lower,
    Upper,
}

/// Running maximum of `F` over `[−γ, γ]`, tabulated on a dense scan.
pub struct PotentialEnvelope<'a> {
    nl: &'a Nonlinearity,
    radii: Vec<f64>,
    running_max: Vec<f64>,
}

impl<'a> PotentialEnvelope<'a> {
    pub fn scan(nl: &'a Nonlinearity) -> Self {
        let decades = (PROBE_MAX / PROBE_MIN).log10().round() as usize;
        let linear = (1..=SCAN_PER_DECADE).map(|i| PROBE_MIN * i as f64 / SCAN_PER_DECADE as f64);
        let log = (1..=decades * SCAN_PER_DECADE)
            .map(|i| PROBE_MIN * 10f64.powf(i as f64 / SCAN_PER_DECADE as f64));
        let radii: Vec<f64> = linear.chain(log).collect();
        let mut running = 0.0f64; // F(0) = 0
        let running_max = radii
            .iter()
            .map(|&x| {
                running = running.max(nl.potential(x)).max(nl.potential(-x));
                running
            })
            .collect();
        PotentialEnvelope {
            nl,
            radii,
            running_max,
        }
    }

    /// `max_{|ξ|≤γ} F(ξ)` (scan resolution inside, exact at `±γ`).
    pub fn max_within(&self, gamma: f64) -> f64 {
        let idx = self.radii.partition_point(|&r| r <= gamma);
        let base = if idx == 0 { 0.0 } else { self.running_max[idx - 1] };
        base.max(self.nl.potential(gamma)).max(self.nl.potential(-gamma))
    }
}

/// Outcome of the supremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRatio {
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub gamma_bar: f64,
    pub at_boundary: Option<ProbeBoundary>,
    /// Thinned `(γ, ratio)` samples; infinite ratios are kept as `+inf`.
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub gamma: f64,
    #[serde(with = "crate::extended")]
    pub ratio: f64,
}

fn probe_gammas() -> impl Iterator<Item = f64> {
    let span = (PROBE_MAX / PROBE_MIN).log10();
    (0..PROBE_COUNT).map(move |p| {
        if p == PROBE_COUNT - 1 {
            PROBE_MAX
        } else {
            PROBE_MIN * 10f64.powf(span * p as f64 / (PROBE_COUNT - 1) as f64)
        }
    })
}

fn ratio(gamma: f64, denom: f64) -> f64 {
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        gamma * gamma / denom
    }
}

/// Maximize `γ² / denom(γ)` over the probe grid plus golden-section refinement.
fn maximize_ratio(denom: impl Fn(f64) -> f64) -> SupRatio {
    let gammas: Vec<f64> = probe_gammas().collect();
    let ratios: Vec<f64> = gammas.iter().map(|&g| ratio(g, denom(g))).collect();
    let probes = gammas
        .iter()
        .zip(&ratios)
        .enumerate()
        .filter(|(i, _)| i % PROBE_STRIDE == 0)
        .map(|(_, (&gamma, &ratio))| Probe { gamma, ratio })
        .collect();

    if let Some(p) = ratios.iter().position(|r| r.is_infinite()) {
        return SupRatio {
            value: f64::INFINITY,
            gamma_bar: gammas[p],
            at_boundary: None,
            probes,
        };
    }

    let mut best = 0;
    for (i, r) in ratios.iter().enumerate() {
        if *r > ratios[best] {
            best = i;
        }
    }
    let at_boundary = match best {
        0 => Some(ProbeBoundary::Lower),
        b if b == PROBE_COUNT - 1 => Some(ProbeBoundary::Upper),
        _ => None,
    };

    let mut value = ratios[best];
    let mut gamma_bar = gammas[best];
    if at_boundary.is_none() {
        let f = |log_g: f64| {
            let g = log_g.exp();
            ratio(g, denom(g))
        };
        let (lg, r) = golden_max(f, gammas[best - 1].ln(), gammas[best + 1].ln(), GOLDEN_REL_TOL);
        if r > value {
            value = r;
            gamma_bar = lg.exp();
        }
    }
    SupRatio {
        value,
        gamma_bar,
        at_boundary,
        probes,
    }
}

/// Golden-section maximization on `[a, b]` until the bracket is narrower than `tol`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `sup_{γ>0} γ² / max_{|ξ|≤γ} F(ξ)` with the `1/0 = +∞` convention.
pub fn sup_ratio(nl: &Nonlinearity) -> SupRatio {
    let env = PotentialEnvelope::scan(nl);
    maximize_ratio(|g| env.max_within(g))
}

/// `sup_{γ>0} γ² / F(γ)`: the simplified form valid for non-negative `f`.
pub fn sup_ratio_nonneg(nl: &Nonlinearity) -> SupRatio {
    maximize_ratio(|g| nl.potential(g))
}

/// `μ* = sup_ratio / κ_α`.
pub fn mu_star(nl: &Nonlinearity, alpha: DerivativeOrder, t_end: f64) -> f64 {
    sup_ratio(nl).value / kappa_alpha(alpha, t_end)
}

/// Admissible interval `(0, right_endpoint)` for non-negative data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaInterval {
    #[serde(with = "crate::extended")]
    pub right_endpoint: f64,
    /// The supremum sits on the upper probe edge with the ratio still growing.
    pub unbounded: bool,
}

pub fn lambda_interval(nl: &Nonlinearity, alpha: DerivativeOrder, t_end: f64) -> Result<LambdaInterval> {
    if !nl.is_nonnegative() {
        return Err(Error::Hypothesis(format!(
            "the admissible interval needs a non-negative datum, but {} takes negative values",
            nl.label()
        )));
    }
    let sup = sup_ratio_nonneg(nl);
    Ok(LambdaInterval {
        right_endpoint: sup.value / kappa_alpha(alpha, t_end),
        unbounded: sup.value.is_infinite() || sup.at_boundary == Some(ProbeBoundary::Upper),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitProbes {
    /// `lim_{t→0⁺} f(t)/t = +∞`
    pub s0: Verdict,
    /// `limsup_{ξ→+∞} ξ²/F(ξ) > κ_α`
    pub s_inf: Verdict,
    /// `lim_{t→0⁺} F(t)/t² = +∞`
    pub zero: Verdict,
}

/// Growth factor over the probe sequence that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;
const MONOTONE_SLACK: f64 = 1e-12;

pub fn limit_probes(nl: &Nonlinearity, kappa: f64) -> LimitProbes {
    let toward_zero: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
    let toward_inf: Vec<f64> = (1..=8).map(|k| 10f64.powi(k)).collect();
    let s0: Vec<f64> = toward_zero.iter().map(|&x| nl.f(x) / x).collect();
    let zero: Vec<f64> = toward_zero.iter().map(|&x| nl.potential(x) / (x * x)).collect();
    let s_inf: Vec<f64> = toward_inf.iter().map(|&x| ratio(x, nl.potential(x))).collect();
    LimitProbes {
        s0: divergence_verdict(&s0),
        s_inf: threshold_verdict(&s_inf, kappa),
        zero: divergence_verdict(&zero),
    }
}

/// Holds when the sequence grows strictly and by `DIVERGENCE_FACTOR`;
/// fails when it is non-increasing.
fn divergence_verdict(seq: &[f64]) -> Verdict {
    if seq.iter().any(|v| v.is_nan()) {
        return Verdict::Inconclusive;
    }
    let increasing = seq.windows(2).all(|w| w[1] > w[0]);
    let last = *seq.last().unwrap();
    if increasing && last >= DIVERGENCE_FACTOR * seq[0].max(1.0) {
        Verdict::Holds
    } else if seq.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK * w[0].abs()) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// Holds when non-decreasing and above `threshold` at the end; fails when
/// non-increasing and below it.
fn threshold_verdict(seq: &[f64], threshold: f64) -> Verdict {
    if seq.iter().any(|v| v.is_nan()) {
        return Verdict::Inconclusive;
    }
    let last = *seq.last().unwrap();
    let nondecreasing = seq.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK * w[0].abs());
    let nonincreasing = seq.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK * w[0].abs());
    if nondecreasing && last > threshold {
        Verdict::Holds
    } else if nonincreasing && last < threshold {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// Closed forms of the power-sum example `f = ξ^{r−1} + ξ^{s−1}`, `1 < r < 2 < s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleClosedForm {
    pub r: f64,
    pub s: f64,
    pub gamma_bar: f64,
}

pub fn example_closed_forms(r: f64, s: f64) -> Result<ExampleClosedForm> {
    if !(1.0 < r && r < 2.0 && 2.0 < s && s.is_finite()) {
        return Err(Error::domain(format!("closed forms need 1 < r < 2 < s, got r = {r}, s = {s}")));
    }
    let gamma_bar = (s * (2.0 - r) / (r * (s - 2.0))).powf(1.0 / (s - r));
    Ok(ExampleClosedForm { r, s, gamma_bar })
}

impl ExampleClosedForm {
    /// The ratio `γ̄²/F(γ̄) = rsγ̄^{2−r} / (s + rγ̄^{s−r})`.
    pub fn sup_ratio(&self) -> f64 {
        let (r, s, g) = (self.r, self.s, self.gamma_bar);
        r * s * g.powf(2.0 - r) / (s + r * g.powf(s - r))
    }

    /// Right end of the parameter range, `rsγ̄^{2−r} / (κ_α(s + rγ̄^{s−r}))`.
    pub fn mu_bound(&self, alpha: DerivativeOrder, t_end: f64) -> f64 {
        self.sup_ratio() / kappa_alpha(alpha, t_end)
    }
}

/// Upper bound `κ_α · max_{|ξ|≤γ̄} F(ξ) / γ̄²` on φ(r).
pub fn phi_r_upper_bound(gamma_bar: f64, nl: &Nonlinearity, alpha: DerivativeOrder, t_end: f64) -> Result<f64> {
    if !(gamma_bar > 0.0 && gamma_bar.is_finite()) {
        return Err(Error::domain(format!("γ̄ = {gamma_bar} must be positive")));
    }
    let env = PotentialEnvelope::scan(nl);
    Ok(kappa_alpha(alpha, t_end) * env.max_within(gamma_bar) / (gamma_bar * gamma_bar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub nonlinearity: String,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub kappa_alpha: f64,
    #[serde(with = "crate::extended")]
    pub sup_ratio: f64,
    pub gamma_bar: Option<f64>,
    pub sup_at_boundary: Option<ProbeBoundary>,
    #[serde(with = "crate::extended")]
    pub mu_star: f64,
    #[serde(with = "crate::extended::option")]
    pub lambda_right_endpoint: Option<f64>,
    pub lambda_unbounded: bool,
    pub nonnegative: bool,
    pub vanishes_at_zero: bool,
    pub sg_holds: Verdict,
    pub s0_holds: Verdict,
    pub sinf_holds: Verdict,
    pub zero_holds: Verdict,
    pub probes: Vec<Probe>,
}

pub fn evaluate_conditions(nl: &Nonlinearity, alpha: DerivativeOrder, t_end: f64) -> ConditionReport {
    let kappa = kappa_alpha(alpha, t_end);
    let sup = sup_ratio(nl);
    let lambda = lambda_interval(nl, alpha, t_end).ok();
    let limits = limit_probes(nl, kappa);
    let sg_holds = if sup.value > kappa {
        Verdict::Holds
    } else if sup.at_boundary.is_none() {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    ConditionReport {
        nonlinearity: nl.label().to_string(),
        alpha: alpha.value(),
        t_end,
        kappa_alpha: kappa,
        sup_ratio: sup.value,
        gamma_bar: Some(sup.gamma_bar),
        sup_at_boundary: sup.at_boundary,
        mu_star: sup.value / kappa,
        lambda_right_endpoint: lambda.map(|l| l.right_endpoint),
        lambda_unbounded: lambda.is_some_and(|l| l.unbounded),
        nonnegative: nl.is_nonnegative(),
        vanishes_at_zero: nl.vanishes_at_zero(),
        sg_holds,
        s0_holds: limits.s0,
        sinf_holds: limits.s_inf,
        zero_holds: limits.zero,
        probes: sup.probes,
    }
}

impl ConditionReport {
    /// Non-triviality is guaranteed below μ* when `f(0) ≠ 0` or the zero condition holds.
    pub fn nontriviality_expected(&self) -> bool {
        !self.vanishes_at_zero || self.zero_holds == Verdict::Holds
    }
}
