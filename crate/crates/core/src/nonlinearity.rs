//! The datum `f` of the boundary-value problem and its potential `F(ξ) = ∫_0^ξ f`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Config-addressable catalog of nonlinearities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    /// `f(ξ) = ξ^{r−1} + ξ^{s−1}` for `ξ ≥ 0`, zero otherwise.
    PowerSum { r: f64, s: f64 },
    /// `f(ξ) = 1 + |ξ|^{q−2} ξ`.
    AffinePower { q: f64 },
    /// `f(ξ) = √ξ` for `ξ ≥ 0`, zero otherwise.
    SqrtPlus,
    Zero,
    /// Piecewise-linear interpolation of `(xi, values)`, constant beyond the ends.
    Table { xi: Vec<f64>, values: Vec<f64> },
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    PowerSum { r: f64, s: f64 },
    AffinePower { q: f64 },
    SqrtPlus,
    Zero,
    Table(Arc<Table>),
    Custom { f: ScalarFn, potential: Option<ScalarFn> },
}

/// A continuous nonlinearity together with its potential and sign metadata.
#[derive(Clone)]
pub struct Nonlinearity {
    label: String,
    repr: Repr,
    nonnegative: bool,
    vanishes_at_zero: bool,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("label", &self.label)
            .field("kind", &self.kind_tag())
            .field("nonnegative", &self.nonnegative)
            .field("vanishes_at_zero", &self.vanishes_at_zero)
            .finish()
    }
}

/// Tolerance of the closed-form vs numeric potential check.
pub const POTENTIAL_TOL: f64 = 1e-8;

const SIMPSON_TOL: f64 = 1e-10;

impl Nonlinearity {
    pub fn from_spec(spec: &NonlinearitySpec) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be finite")))
            }
        };
        let (repr, nonnegative, vanishes) = match spec {
            NonlinearitySpec::PowerSum { r, s } => {
                finite("r", *r)?;
                finite("s", *s)?;
                if *r <= 1.0 || *s <= 1.0 {
                    return Err(Error::validation(format!(
                        "power_sum needs exponents above 1 for continuity, got r = {r}, s = {s}"
                    )));
                }
                (Repr::PowerSum { r: *r, s: *s }, true, true)
            }
            NonlinearitySpec::AffinePower { q } => {
                finite("q", *q)?;
                if *q <= 1.0 {
                    return Err(Error::validation(format!("affine_power needs q > 1, got {q}")));
                }
                (Repr::AffinePower { q: *q }, false, false)
            }
            NonlinearitySpec::SqrtPlus => (Repr::SqrtPlus, true, true),
            NonlinearitySpec::Zero => (Repr::Zero, true, true),
            NonlinearitySpec::Table { xi, values } => {
                let table = Table::new(xi.clone(), values.clone())?;
                let nonneg = table.values.iter().all(|&v| v >= 0.0);
                let vanishes = table.eval(0.0) == 0.0;
                (Repr::Table(Arc::new(table)), nonneg, vanishes)
            }
        };
        Ok(Nonlinearity {
            label: spec.tag().to_string(),
            repr,
            nonnegative,
            vanishes_at_zero: vanishes,
        })
    }

    /// Arbitrary continuous `f`; the potential is integrated numerically on demand.
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::build_custom(label.into(), Arc::new(f), None)
    }

    /// Arbitrary `f` with a closed-form potential, checked against quadrature.
    pub fn custom_with_potential(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build_custom(label.into(), Arc::new(f), Some(Arc::new(potential)))
    }

    fn build_custom(label: String, f: ScalarFn, potential: Option<ScalarFn>) -> Result<Self> {
        let samples = flag_probe_points();
        if samples.iter().any(|&x| !f(x).is_finite()) {
            return Err(Error::validation(format!("{label}: f is not finite on the probe grid")));
        }
        let nonnegative = samples.iter().all(|&x| f(x) >= 0.0);
        let vanishes_at_zero = f(0.0) == 0.0;
        let nl = Nonlinearity {
            label,
            repr: Repr::Custom { f, potential },
            nonnegative,
            vanishes_at_zero,
        };
        if let Some(worst) = nl.potential_mismatch() {
            return Err(Error::validation(format!(
                "{}: closed-form potential disagrees with ∫f at ξ = {worst}",
                nl.label
            )));
        }
        Ok(nl)
    }

    /// First probe point where the closed-form potential misses the numeric
    /// antiderivative by more than `1e-8 (1 + |F|)`.
    pub fn potential_mismatch(&self) -> Option<f64> {
        potential_check_points().into_iter().find(|&x| {
            let closed = self.potential(x);
            (closed - self.numeric_potential(x)).abs() > POTENTIAL_TOL * (1.0 + closed.abs())
        })
    }

    pub fn zero() -> Self {
        Self::from_spec(&NonlinearitySpec::Zero).expect("zero nonlinearity is valid")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.repr {
            Repr::PowerSum { .. } => "power_sum",
            Repr::AffinePower { .. } => "affine_power",
            Repr::SqrtPlus => "sqrt_plus",
            Repr::Zero => "zero",
            Repr::Table(_) => "table",
            Repr::Custom { .. } => "custom",
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.vanishes_at_zero
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// Growth exponent of `F` at +∞ when known in closed form.
    pub fn dominant_exponent(&self) -> Option<f64> {
        match self.repr {
            Repr::PowerSum { r, s } => Some(r.max(s)),
            Repr::AffinePower { q } => Some(q.max(1.0)),
            Repr::SqrtPlus => Some(1.5),
            Repr::Table(_) => Some(1.0),
            Repr::Zero | Repr::Custom { .. } => None,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::PowerSum { r, s } => {
                if x > 0.0 {
                    x.powf(r - 1.0) + x.powf(s - 1.0)
                } else {
                    0.0
                }
            }
            Repr::AffinePower { q } => 1.0 + x.abs().powf(q - 2.0) * x,
            Repr::SqrtPlus => {
                if x > 0.0 {
                    x.sqrt()
                } else {
                    0.0
                }
            }
            Repr::Zero => 0.0,
            Repr::Table(t) => t.eval(x),
            Repr::Custom { f, .. } => f(x),
        }
    }

    /// `F(ξ) = ∫_0^ξ f(s) ds`.
    pub fn potential(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::PowerSum { r, s } => {
                if x > 0.0 {
                    x.powf(*r) / r + x.powf(*s) / s
                } else {
                    0.0
                }
            }
            Repr::AffinePower { q } => x + x.abs().powf(*q) / q,
            Repr::SqrtPlus => {
                if x > 0.0 {
                    2.0 / 3.0 * x * x.sqrt()
                } else {
                    0.0
                }
            }
            Repr::Zero => 0.0,
            Repr::Table(t) => t.potential(x),
            Repr::Custom { potential: Some(p), .. } => p(x),
            Repr::Custom { potential: None, .. } => self.numeric_potential(x),
        }
    }

    /// Adaptive-Simpson antiderivative, independent of any closed form.
    pub fn numeric_potential(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let f = |s: f64| self.f(s);
        // split at every kink so each piece is smooth
        let (lo, hi) = if x > 0.0 { (0.0, x) } else { (x, 0.0) };
        let mut cuts = vec![lo];
        if let Repr::Table(t) = &self.repr {
            cuts.extend(t.xi.iter().copied().filter(|&k| lo < k && k < hi));
        }
        cuts.push(hi);
        let total: f64 = cuts.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], SIMPSON_TOL)).sum();
        if x > 0.0 { total } else { -total }
    }

    /// Config form of this nonlinearity, if it came from the catalog.
    pub fn spec(&self) -> Option<NonlinearitySpec> {
        Some(match &self.repr {
            Repr::PowerSum { r, s } => NonlinearitySpec::PowerSum { r: *r, s: *s },
            Repr::AffinePower { q } => NonlinearitySpec::AffinePower { q: *q },
            Repr::SqrtPlus => NonlinearitySpec::SqrtPlus,
            Repr::Zero => NonlinearitySpec::Zero,
            Repr::Table(t) => NonlinearitySpec::Table {
                xi: t.xi.clone(),
                values: t.values.clone(),
            },
            Repr::Custom { .. } => return None,
        })
    }
}

impl NonlinearitySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            NonlinearitySpec::PowerSum { .. } => "power_sum",
            NonlinearitySpec::AffinePower { .. } => "affine_power",
            NonlinearitySpec::SqrtPlus => "sqrt_plus",
            NonlinearitySpec::Zero => "zero",
            NonlinearitySpec::Table { .. } => "table",
        }
    }
}

fn flag_probe_points() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=2000).map(|i| -100.0 + 0.1 * i as f64).collect();
    for k in -6..=6 {
        let x = 10f64.powi(k);
        xs.push(x);
        xs.push(-x);
    }
    xs
}

fn potential_check_points() -> Vec<f64> {
    (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect()
}

#[derive(Debug)]
struct Table {
    xi: Vec<f64>,
    values: Vec<f64>,
    /// `∫_0^{xi[i]} f`
    anchors: Vec<f64>,
}

impl Table {
    fn new(xi: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xi.len() < 2 || xi.len() != values.len() {
            return Err(Error::validation(
                "table needs at least two points and matching xi/values lengths",
            ));
        }
        if xi.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::validation("table entries must be finite"));
        }
        if xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("table abscissae must be strictly increasing"));
        }
        let mut table = Table {
            xi,
            values,
            anchors: Vec::new(),
        };
        // ∫ over each segment, then shift so that the running integral vanishes at 0
        let eval = |x: f64| table.eval(x);
        let mut prefix = vec![0.0];
        for w in table.xi.windows(2) {
            let seg = adaptive_simpson(&eval, w[0], w[1], SIMPSON_TOL);
            prefix.push(prefix.last().unwrap() + seg);
        }
        let offset = {
            let k = table.segment(0.0);
            prefix[k] + adaptive_simpson(&eval, table.xi[k], 0.0, SIMPSON_TOL)
        };
        table.anchors = prefix.iter().map(|p| p - offset).collect();
        Ok(table)
    }

    /// Index k with xi[k] ≤ x < xi[k+1], clamped to the end segments.
    fn segment(&self, x: f64) -> usize {
        let last = self.xi.len() - 2;
        match self.xi.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(last),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xi.len();
        if x <= self.xi[0] {
            return self.values[0];
        }
        if x >= self.xi[n - 1] {
            return self.values[n - 1];
        }
        let k = self.segment(x);
        let w = (x - self.xi[k]) / (self.xi[k + 1] - self.xi[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    fn potential(&self, x: f64) -> f64 {
        let n = self.xi.len();
        if x <= self.xi[0] {
            return self.anchors[0] + (x - self.xi[0]) * self.values[0];
        }
        if x >= self.xi[n - 1] {
            return self.anchors[n - 1] + (x - self.xi[n - 1]) * self.values[n - 1];
        }
        let k = self.segment(x);
        self.anchors[k] + 0.5 * (x - self.xi[k]) * (self.values[k] + self.eval(x))
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = 1.0 + whole.abs();
    simpson_step(f, a, b, fa, fm, fb, whole, tol * scale, SIMPSON_MAX_DEPTH)
}

const SIMPSON_MAX_DEPTH: u32 = 50;
/// Levels that are always subdivided, so a lucky coarse estimate cannot stop early.
const SIMPSON_MIN_DEPTH: u32 = 4;

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || (depth <= SIMPSON_MAX_DEPTH - SIMPSON_MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<NonlinearitySpec> {
        vec![
            NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 },
            NonlinearitySpec::PowerSum { r: 1.2, s: 4.5 },
            NonlinearitySpec::AffinePower { q: 4.0 },
            NonlinearitySpec::AffinePower { q: 2.5 },
            NonlinearitySpec::SqrtPlus,
            NonlinearitySpec::Zero,
            NonlinearitySpec::Table {
                xi: vec![-2.0, -0.5, 0.0, 1.0, 3.0],
                values: vec![1.0, 0.2, 0.0, 2.0, 0.5],
            },
        ]
    }

    #[test]
    fn potentials_match_quadrature() {
        for spec in catalog() {
            let nl = Nonlinearity::from_spec(&spec).unwrap();
            assert_eq!(nl.potential(0.0), 0.0);
            assert_eq!(nl.potential_mismatch(), None, "{spec:?}");
        }
    }

    #[test]
    fn flags_agree_with_samples() {
        for spec in catalog() {
            let nl = Nonlinearity::from_spec(&spec).unwrap();
            let sampled_nonneg = flag_probe_points().iter().all(|&x| nl.f(x) >= 0.0);
            assert_eq!(nl.is_nonnegative(), sampled_nonneg, "{spec:?}");
            assert_eq!(nl.vanishes_at_zero(), nl.f(0.0) == 0.0, "{spec:?}");
        }
    }

    #[test]
    fn power_sum_at_one() {
        let nl = Nonlinearity::from_spec(&NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 }).unwrap();
        assert!((nl.potential(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(nl.f(-3.0), 0.0);
        assert_eq!(nl.potential(-3.0), 0.0);
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let nl = Nonlinearity::from_spec(&NonlinearitySpec::Table {
            xi: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 3.0, 3.0],
        })
        .unwrap();
        assert_eq!(nl.f(0.5), 2.0);
        assert_eq!(nl.f(-4.0), 1.0);
        assert_eq!(nl.f(10.0), 3.0);
        assert!((nl.potential(1.0) - 2.0).abs() < 1e-12);
        assert!((nl.potential(2.0) - 5.0).abs() < 1e-12);
        assert!((nl.potential(4.0) - 11.0).abs() < 1e-12);
        assert!((nl.potential(-1.0) + 1.0).abs() < 1e-12);
        assert!(!nl.vanishes_at_zero());
        assert!(nl.is_nonnegative());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            NonlinearitySpec::PowerSum { r: 1.0, s: 3.0 },
            NonlinearitySpec::PowerSum { r: 1.5, s: f64::NAN },
            NonlinearitySpec::AffinePower { q: 0.5 },
            NonlinearitySpec::Table { xi: vec![0.0], values: vec![1.0] },
            NonlinearitySpec::Table { xi: vec![0.0, 0.0], values: vec![1.0, 2.0] },
            NonlinearitySpec::Table { xi: vec![0.0, 1.0], values: vec![1.0] },
        ];
        for spec in bad {
            assert!(Nonlinearity::from_spec(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn custom_potential_is_checked() {
        assert!(Nonlinearity::custom_with_potential("linear", |x| x, |x| 0.5 * x * x).is_ok());
        assert!(Nonlinearity::custom_with_potential("wrong", |x| x, |x| x * x).is_err());
        let numeric = Nonlinearity::custom("cos", f64::cos).unwrap();
        assert!((numeric.potential(2.0) - 2f64.sin()).abs() < 1e-10);
        assert!(!numeric.is_nonnegative());
        assert!(!numeric.vanishes_at_zero());
    }

    #[test]
    fn config_round_trip() {
        for spec in catalog() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: NonlinearitySpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
            assert_eq!(Nonlinearity::from_spec(&spec).unwrap().spec(), Some(spec));
        }
        let parsed: NonlinearitySpec = serde_json::from_str(r#"{"kind": "power_sum", "r": 1.5, "s": 3}"#).unwrap();
        assert_eq!(parsed, NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 });
        assert!(serde_json::from_str::<NonlinearitySpec>(r#"{"kind": "exp"}"#).is_err());
    }
}
