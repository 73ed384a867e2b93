//! Energy functional `J_μ = Φ − μΨ` in coefficient space.
//!
//! `Φ(u) = −∫ ₀ᶜD_t^α u · ₜᶜD_T^α u` is the quadratic form of the matrix
//! `M[j][k] = −∫ DL_j · DR_k` (only its symmetric part matters) and
//! `Ψ(u) = ∫ F(u(t)) dt` is evaluated by the trapezoid rule on the grid.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nonlinearity::Nonlinearity;
use crate::space::{weighted_gram, SpaceModel, SpectralElement};
use crate::{Error, Result};

/// Random probes used to confirm `xᵀM_s x ≥ |cos(πα)| xᵀG x` at build time.
pub const DEFINITENESS_PROBES: usize = 100;
const DEFINITENESS_SEED: u64 = 0x00de_f1e1;
const DEFINITENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EnergyAssembly {
    space: SpaceModel,
    bilinear: DMatrix<f64>,
    symmetric: DMatrix<f64>,
    gram: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
}

/// Build `M`, `M_s` and the α-Gram matrix and check discrete coercivity.
pub fn assemble(space: SpaceModel) -> Result<EnergyAssembly> {
    let fine = space.fine();
    let bilinear = -weighted_gram(&fine.left, &fine.right, &fine.weights);
    let symmetric = 0.5 * (&bilinear + bilinear.transpose());
    let gram = space.alpha_gram().clone();

    let cos = space.alpha().abs_cos();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFINITENESS_SEED);
    for probe in 0..DEFINITENESS_PROBES {
        let x = DVector::from_fn(space.k_max(), |_, _| rng.random_range(-1.0..=1.0));
        let quad = x.dot(&(&symmetric * &x));
        let g = x.dot(&(&gram * &x));
        if quad < cos * g - DEFINITENESS_TOL * (1.0 + g) {
            return Err(Error::Resolution(format!(
                "Φ-form fails the coercivity bound on probe {probe}: xᵀM_s x = {quad:.6e} < |cos(πα)|·xᵀGx = {:.6e}; refine n",
                cos * g
            )));
        }
    }
    let cholesky = Cholesky::new(symmetric.clone())
        .ok_or_else(|| Error::Resolution("symmetrized Φ-matrix is not positive definite".into()))?;

    Ok(EnergyAssembly {
        space,
        bilinear,
        symmetric,
        gram,
        cholesky,
    })
}

impl EnergyAssembly {
    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    /// Unsymmetrized `M[j][k] = −∫ DL_j · DR_k`.
    pub fn bilinear(&self) -> &DMatrix<f64> {
        &self.bilinear
    }

    pub fn symmetric(&self) -> &DMatrix<f64> {
        &self.symmetric
    }

    /// `G[j][k] = ∫ DL_j · DL_k`, so `‖u‖_α² = aᵀGa`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn phi(&self, u: &SpectralElement) -> Result<f64> {
        self.space.check_len(u)?;
        Ok(self.phi_coeffs(&u.as_dvector()))
    }

    /// `−∫ DL(u)·DR(u)` by direct quadrature of the synthesized Caputo images.
    pub fn phi_direct(&self, u: &SpectralElement) -> Result<f64> {
        self.space.check_len(u)?;
        let fine = self.space.fine();
        let c = u.as_dvector();
        let dl = &fine.left * &c;
        let dr = &fine.right * &c;
        Ok(-dl.iter().zip(dr.iter()).zip(fine.weights.iter()).map(|((a, b), w)| w * a * b).sum::<f64>())
    }

    pub fn psi(&self, u: &SpectralElement, nl: &Nonlinearity) -> Result<f64> {
        self.space.check_len(u)?;
        Ok(self.psi_values(&self.space.values_of(u), nl))
    }

    pub fn energy(&self, u: &SpectralElement, mu: f64, nl: &Nonlinearity) -> Result<f64> {
        check_mu(mu)?;
        Ok(self.phi(u)? - mu * self.psi(u, nl)?)
    }

    /// Gâteaux derivative of `J_μ` along each basis mode.
    pub fn gradient(&self, u: &SpectralElement, mu: f64, nl: &Nonlinearity) -> Result<Vec<f64>> {
        check_mu(mu)?;
        self.space.check_len(u)?;
        Ok(self.gradient_coeffs(&u.as_dvector(), mu, nl).iter().copied().collect())
    }

    pub(crate) fn phi_coeffs(&self, c: &DVector<f64>) -> f64 {
        c.dot(&(&self.symmetric * c))
    }

    pub(crate) fn psi_values(&self, values: &DVector<f64>, nl: &Nonlinearity) -> f64 {
        values
            .iter()
            .zip(self.space.weights().iter())
            .map(|(&v, w)| w * nl.potential(v))
            .sum()
    }

    /// `(Φ, Ψ)` at coefficient vector `c`.
    pub(crate) fn phi_psi(&self, c: &DVector<f64>, nl: &Nonlinearity) -> (f64, f64) {
        let values = self.space.basis() * c;
        (self.phi_coeffs(c), self.psi_values(&values, nl))
    }

    pub(crate) fn gradient_coeffs(&self, c: &DVector<f64>, mu: f64, nl: &Nonlinearity) -> DVector<f64> {
        let mut g = 2.0 * (&self.symmetric * c);
        if mu != 0.0 {
            let values = self.space.basis() * c;
            let weighted = DVector::from_iterator(
                values.len(),
                values
                    .iter()
                    .zip(self.space.weights().iter())
                    .map(|(&v, w)| w * nl.f(v)),
            );
            g -= mu * self.space.basis().tr_mul(&weighted);
        }
        g
    }

    /// `M_s⁻¹ g`: the gradient expressed in the energy inner product.
    pub(crate) fn precondition(&self, g: &DVector<f64>) -> DVector<f64> {
        self.cholesky.solve(g)
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("μ = {mu} must be finite and non-negative")))
    }
}

pub fn eval_phi(u: &SpectralElement, asm: &EnergyAssembly) -> Result<f64> {
    asm.phi(u)
}

pub fn eval_psi(u: &SpectralElement, nl: &Nonlinearity, asm: &EnergyAssembly) -> Result<f64> {
    asm.psi(u, nl)
}

pub fn eval_j(u: &SpectralElement, mu: f64, nl: &Nonlinearity, asm: &EnergyAssembly) -> Result<f64> {
    asm.energy(u, mu, nl)
}

pub fn grad_j(u: &SpectralElement, mu: f64, nl: &Nonlinearity, asm: &EnergyAssembly) -> Result<Vec<f64>> {
    asm.gradient(u, mu, nl)
}
