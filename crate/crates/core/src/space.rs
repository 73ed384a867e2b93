//! Sine-spectral model of the energy space `E_0^α`.
//!
//! Elements are finite sums `u = Σ_k a_k sin(kπt/T)`, `k = 1..k_max`, which
//! vanish at both endpoints. The Caputo images of every basis function are
//! computed once from the analytic derivative and cached, so norms, energies
//! and gradients reduce to small dense linear algebra in coefficient space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyAssembly;
use crate::kernel::{graded_rule, gamma_unchecked, DerivativeOrder, Grid, GridFunction, TrigMoments};
use crate::{Error, Result};

pub const MIN_MODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceConfig {
    pub alpha: DerivativeOrder,
    pub t_end: f64,
    pub n: usize,
    pub k_max: usize,
}

impl SpaceConfig {
    pub fn new(alpha: f64, t_end: f64, n: usize, k_max: usize) -> Result<Self> {
        let config = SpaceConfig {
            alpha: DerivativeOrder::new(alpha)?,
            t_end,
            n,
            k_max,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.t_end, self.n)?;
        if self.k_max < MIN_MODES {
            return Err(Error::validation(format!(
                "k_max = {} below the minimum of {MIN_MODES} modes",
                self.k_max
            )));
        }
        // at least four intervals per mode index keeps the highest mode resolved
        if self.k_max > self.n / 4 {
            return Err(Error::validation(format!(
                "k_max = {} exceeds n/4 = {} for n = {}",
                self.k_max,
                self.n / 4,
                self.n
            )));
        }
        Ok(())
    }
}

/// `c = T^{α−1/2} / (Γ(α) √(2α−1))`, the constant of `‖u‖_∞ ≤ c‖u‖_α`.
pub fn embedding_constant(alpha: DerivativeOrder, t_end: f64) -> f64 {
    let a = alpha.value();
    t_end.powf(a - 0.5) / (gamma_unchecked(a) * (2.0 * a - 1.0).sqrt())
}

/// Constant `T^α / Γ(α+1)` of the L² embedding.
pub fn l2_embedding_constant(alpha: DerivativeOrder, t_end: f64) -> f64 {
    let a = alpha.value();
    t_end.powf(a) / gamma_unchecked(a + 1.0)
}

/// Precomputed discretization of `E_0^α`.
///
/// Matrices are stored nodes × modes, so column `k` holds mode `k + 1`.
#[derive(Debug, Clone)]
pub struct SpaceModel {
    config: SpaceConfig,
    grid: Grid,
    basis: DMatrix<f64>,
    basis_deriv: DMatrix<f64>,
    caputo_left: DMatrix<f64>,
    caputo_right: DMatrix<f64>,
    weights: DVector<f64>,
    fine: FineImages,
    alpha_gram: DMatrix<f64>,
    embedding_c: f64,
    kappa: f64,
}

/// Basis values and Caputo images at the nodes of a graded Gauss rule, used for
/// every integral whose integrand has endpoint singularities.
#[derive(Debug, Clone)]
pub(crate) struct FineImages {
    pub weights: DVector<f64>,
    pub values: DMatrix<f64>,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

pub fn build_space(config: SpaceConfig) -> Result<SpaceModel> {
    config.validate()?;
    let grid = Grid::new(config.t_end, config.n)?;
    let (t_end, k_max, nodes) = (config.t_end, config.k_max, grid.len());
    let last = grid.intervals();

    let node_points: Vec<f64> = grid.nodes().collect();
    // integrands are products of two modes
    let rule = graded_rule(t_end, 2.0 * k_max as f64 * PI / t_end);
    let fine_len = rule.nodes.len();
    let fractional = config.alpha.complement().map(|g| g.value());
    let node_moments = fractional.map(|g| TrigMoments::new(&node_points, g));
    let fine_moments = fractional.map(|g| TrigMoments::new(&rule.nodes, g));
    let gamma_scale = fractional.map_or(1.0, gamma_unchecked);

    let mut basis = DMatrix::zeros(nodes, k_max);
    let mut basis_deriv = DMatrix::zeros(nodes, k_max);
    let mut dl = DMatrix::zeros(nodes, k_max);
    let mut dr = DMatrix::zeros(nodes, k_max);
    let mut fine = FineImages {
        weights: DVector::from_vec(rule.weights.clone()),
        values: DMatrix::zeros(fine_len, k_max),
        left: DMatrix::zeros(fine_len, k_max),
        right: DMatrix::zeros(fine_len, k_max),
    };
    for k in 0..k_max {
        let freq = (k + 1) as f64 * PI / t_end;
        for (i, &t) in node_points.iter().enumerate() {
            // sin(kπ) is not exactly zero in floating point; the endpoints are pinned.
            basis[(i, k)] = if i == 0 || i == last { 0.0 } else { (freq * t).sin() };
            basis_deriv[(i, k)] = freq * (freq * t).cos();
        }
        let (l, r) = sine_images(&node_points, freq, node_moments.as_ref(), gamma_scale);
        dl.set_column(k, &DVector::from_vec(l));
        dr.set_column(k, &DVector::from_vec(r));
        let (l, r) = sine_images(&rule.nodes, freq, fine_moments.as_ref(), gamma_scale);
        fine.left.set_column(k, &DVector::from_vec(l));
        fine.right.set_column(k, &DVector::from_vec(r));
        for (q, &t) in rule.nodes.iter().enumerate() {
            fine.values[(q, k)] = (freq * t).sin();
        }
    }
    let alpha_gram = weighted_gram(&fine.left, &fine.left, &fine.weights);

    let embedding_c = embedding_constant(config.alpha, t_end);
    Ok(SpaceModel {
        config,
        grid,
        basis,
        basis_deriv,
        caputo_left: dl,
        caputo_right: dr,
        weights: DVector::from_vec(grid.trapezoid_weights()),
        fine,
        alpha_gram,
        embedding_c,
        kappa: embedding_c * embedding_c * t_end / config.alpha.abs_cos(),
    })
}

/// Caputo images of `sin(ωt)` at `points`, a set symmetric under `t ↦ T − t`
/// (so the mirror of `points[i]` is `points[len − 1 − i]`).
///
/// With `u' = ω cos(ωs)` and `cos(ω(t ∓ x)) = cos ωt cos ωx ± sin ωt sin ωx`, both
/// fractional integrals of `u'` reduce to the moments `C` and `S`.
fn sine_images(points: &[f64], freq: f64, moments: Option<&TrigMoments>, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let Some(m) = moments else {
        let d: Vec<f64> = points.iter().map(|t| freq * (freq * t).cos()).collect();
        let neg = d.iter().map(|v| -v).collect();
        return (d, neg);
    };
    let (c, s) = m.moments(freq);
    let last = points.len() - 1;
    let scale = freq / gamma;
    points
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (sn, cs) = (freq * t).sin_cos();
            let left = scale * (cs * c[i] + sn * s[i]);
            let right = -scale * (cs * c[last - i] - sn * s[last - i]);
            (left, right)
        })
        .unzip()
}

/// `Aᵀ diag(w) B`, symmetrized when `A = B`.
pub(crate) fn weighted_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut wb = b.clone();
    for mut col in wb.column_iter_mut() {
        col.component_mul_assign(w);
    }
    let g = a.transpose() * wb;
    if std::ptr::eq(a, b) {
        0.5 * (&g + g.transpose())
    } else {
        g
    }
}

impl SpaceModel {
    pub fn config(&self) -> &SpaceConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn alpha(&self) -> DerivativeOrder {
        self.config.alpha
    }

    pub fn k_max(&self) -> usize {
        self.config.k_max
    }

    pub fn embedding_c(&self) -> f64 {
        self.embedding_c
    }

    /// `κ_α = c²T/|cos(πα)|`.
    pub fn kappa_alpha(&self) -> f64 {
        self.kappa
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_deriv(&self) -> &DMatrix<f64> {
        &self.basis_deriv
    }

    pub fn caputo_left_images(&self) -> &DMatrix<f64> {
        &self.caputo_left
    }

    pub fn caputo_right_images(&self) -> &DMatrix<f64> {
        &self.caputo_right
    }

    /// Trapezoid weights of the grid.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `G[j][k] = ∫ DL_j · DL_k`, so that `‖u‖_α² = aᵀGa`.
    pub fn alpha_gram(&self) -> &DMatrix<f64> {
        &self.alpha_gram
    }

    pub(crate) fn fine(&self) -> &FineImages {
        &self.fine
    }

    pub(crate) fn check_len(&self, u: &SpectralElement) -> Result<()> {
        if u.len() != self.k_max() {
            return Err(Error::validation(format!(
                "element has {} coefficients, space has {} modes",
                u.len(),
                self.k_max()
            )));
        }
        Ok(())
    }

    /// Node values of `u`.
    pub(crate) fn values_of(&self, u: &SpectralElement) -> DVector<f64> {
        &self.basis * u.as_dvector()
    }

    pub(crate) fn caputo_left_of(&self, u: &SpectralElement) -> DVector<f64> {
        &self.caputo_left * u.as_dvector()
    }

    pub(crate) fn caputo_right_of(&self, u: &SpectralElement) -> DVector<f64> {
        &self.caputo_right * u.as_dvector()
    }

    /// Trapezoid quadrature `∫ a·b` of two node vectors.
    pub(crate) fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter().zip(b.iter()).zip(self.weights.iter()).map(|((x, y), w)| w * x * y).sum()
    }

    /// Discrete sine coefficients of node data vanishing at the endpoints.
    pub fn project(&self, values: &[f64]) -> Result<SpectralElement> {
        if values.len() != self.grid.len() {
            return Err(Error::validation("node data length does not match the grid"));
        }
        let v = DVector::from_column_slice(values);
        let scale = 2.0 / self.config.t_end;
        let coeffs = (0..self.k_max())
            .map(|k| scale * self.inner(&self.basis.column(k).into_owned(), &v))
            .collect();
        SpectralElement::new(coeffs)
    }
}

/// `u = Σ_k coeffs[k]·sin((k+1)πt/T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralElement {
    coeffs: Vec<f64>,
}

impl SpectralElement {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::validation(format!("coefficient {i} is not finite")));
        }
        Ok(SpectralElement { coeffs })
    }

    pub fn zeros(k_max: usize) -> Self {
        SpectralElement {
            coeffs: vec![0.0; k_max],
        }
    }

    /// Single mode `sin(mode·πt/T)`, `mode` counted from 1.
    pub fn mode(k_max: usize, mode: usize) -> Self {
        assert!((1..=k_max).contains(&mode), "mode {mode} outside 1..={k_max}");
        let mut coeffs = vec![0.0; k_max];
        coeffs[mode - 1] = 1.0;
        SpectralElement { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpectralElement {
            coeffs: self.coeffs.iter().map(|c| factor * c).collect(),
        }
    }

    /// `self + factor·other`.
    pub fn axpy(&self, factor: f64, other: &SpectralElement) -> Self {
        assert_eq!(self.len(), other.len());
        SpectralElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + factor * b).collect(),
        }
    }

    pub(crate) fn as_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub(crate) fn from_dvector(v: &DVector<f64>) -> Self {
        SpectralElement {
            coeffs: v.iter().copied().collect(),
        }
    }
}

pub fn synthesize(u: &SpectralElement, model: &SpaceModel) -> Result<GridFunction> {
    model.check_len(u)?;
    GridFunction::new(model.grid(), model.values_of(u).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    /// `‖u‖_α = ‖₀ᶜD_t^α u‖_{L²}`
    pub alpha: f64,
    pub l2: f64,
    pub inf: f64,
}

pub fn norms(u: &SpectralElement, model: &SpaceModel) -> Result<Norms> {
    model.check_len(u)?;
    let c = u.as_dvector();
    let fine = model.fine();
    let fine_values = &fine.values * &c;
    let l2: f64 = fine_values.iter().zip(fine.weights.iter()).map(|(v, w)| w * v * v).sum();
    Ok(Norms {
        alpha: c.dot(&(model.alpha_gram() * &c)).max(0.0).sqrt(),
        l2: l2.max(0.0).sqrt(),
        inf: model.values_of(u).amax(),
    })
}

/// Draw an element with uniform [−1, 1] coefficients scaled to `‖u‖_α = target`.
pub fn random_element<R: Rng>(rng: &mut R, model: &SpaceModel, target: f64) -> SpectralElement {
    loop {
        let coeffs: Vec<f64> = (0..model.k_max()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let u = SpectralElement { coeffs };
        let norm = norms(&u, model).map(|n| n.alpha).unwrap_or(0.0);
        if norm > 0.0 {
            return u.scaled(target / norm);
        }
    }
}

/// Scales of ‖u‖_α cycled through by the embedding audit.
pub const AUDIT_SCALES: [f64; 3] = [0.1, 1.0, 10.0];

/// Absolute audit tolerance, scaled by `1 + ‖u‖_α²`.
pub const AUDIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    /// `"a"`, `"b"`, `"c_lower"` or `"c_upper"`.
    pub check: String,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub violations_a: usize,
    pub violations_b: usize,
    pub violations_c: usize,
    /// Largest observed `‖u‖_{L²} / (T^α/Γ(α+1) ‖u‖_α)`.
    pub tightest_ratio_a: f64,
    /// Largest observed `‖u‖_∞ / (c ‖u‖_α)`.
    pub tightest_ratio_b: f64,
    /// Largest observed `|cos(πα)| ‖u‖_α² / Φ(u)`.
    pub tightest_ratio_c_lower: f64,
    /// Largest observed `|cos(πα)| Φ(u) / ‖u‖_α²`.
    pub tightest_ratio_c_upper: f64,
    pub trials: usize,
    pub seed: u64,
    pub offenders: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn total_violations(&self) -> usize {
        self.violations_a + self.violations_b + self.violations_c
    }
}

/// Check the L², sup-norm and two-sided Φ embeddings on `trials` random elements.
pub fn audit_embeddings(asm: &EnergyAssembly, trials: usize, seed: u64) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::validation("audit needs at least one trial"));
    }
    let model = asm.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport {
        violations_a: 0,
        violations_b: 0,
        violations_c: 0,
        tightest_ratio_a: 0.0,
        tightest_ratio_b: 0.0,
        tightest_ratio_c_lower: 0.0,
        tightest_ratio_c_upper: 0.0,
        trials,
        seed,
        offenders: Vec::new(),
    };
    for trial in 0..trials {
        let u = random_element(&mut rng, model, AUDIT_SCALES[trial % AUDIT_SCALES.len()]);
        audit_one(asm, &u, &mut report)?;
    }
    Ok(report)
}

pub(crate) fn audit_one(asm: &EnergyAssembly, u: &SpectralElement, report: &mut AuditReport) -> Result<()> {
    let model = asm.space();
    let alpha = model.alpha();
    let cos = alpha.abs_cos();
    let n = norms(u, model)?;
    let phi = asm.phi(u)?;
    let sq = n.alpha * n.alpha;
    let tol = AUDIT_TOL * (1.0 + sq);

    let bound_a = l2_embedding_constant(alpha, model.config().t_end) * n.alpha;
    let bound_b = model.embedding_c() * n.alpha;
    let mut flag = |check: &str, count: &mut usize| {
        *count += 1;
        report_offender(&mut report.offenders, check, u);
    };
    let mut va = 0;
    let mut vb = 0;
    let mut vc = 0;
    if n.l2 > bound_a + tol {
        flag("a", &mut va);
    }
    if n.inf > bound_b + tol {
        flag("b", &mut vb);
    }
    if cos * sq - tol > phi {
        flag("c_lower", &mut vc);
    }
    if phi > sq / cos + tol {
        flag("c_upper", &mut vc);
    }
    report.violations_a += va;
    report.violations_b += vb;
    report.violations_c += vc;
    if sq > 0.0 {
        report.tightest_ratio_a = report.tightest_ratio_a.max(n.l2 / bound_a);
        report.tightest_ratio_b = report.tightest_ratio_b.max(n.inf / bound_b);
        report.tightest_ratio_c_upper = report.tightest_ratio_c_upper.max(cos * phi / sq);
    }
    if phi > 0.0 {
        report.tightest_ratio_c_lower = report.tightest_ratio_c_lower.max(cos * sq / phi);
    }
    Ok(())
}

fn report_offender(list: &mut Vec<AuditViolation>, check: &str, u: &SpectralElement) {
    list.push(AuditViolation {
        check: check.to_string(),
        coeffs: u.coeffs().to_vec(),
    });
}
