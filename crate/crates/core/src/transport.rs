//! Temperature-dependent transport coefficients, Newtonian stress and
//! Fourier heat flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `D × D` matrix, row-major: `grad_u[i][j] = ∂u_i/∂x_j`.
pub type Tensor<const D: usize> = [[f64; D]; D];

/// Growth constants of the coefficient bounds
/// `lo·(1 + θ^k) <= coeff(θ) <= hi·(1 + θ^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBounds {
    pub lo: f64,
    pub hi: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportModel {
    alpha: f64,
    /// Prefactor `c` of the optional bulk viscosity `c·(1 + (1+θ²)^{α/2})`.
    #[serde(default)]
    bulk_coeff: f64,
}

impl TransportModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !((1.0 / 3.0 - 1e-15)..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [1/3, 1], got {alpha}")));
        }
        Ok(Self { alpha, bulk_coeff: 0.0 })
    }

    pub fn with_bulk_viscosity(mut self, coeff: f64) -> Result<Self> {
        if !(coeff >= 0.0 && coeff.is_finite()) {
            return Err(Error::InvalidParameter(format!("bulk coefficient must be non-negative, got {coeff}")));
        }
        self.bulk_coeff = coeff;
        Ok(self)
    }

    pub fn validated(self) -> Result<Self> {
        Self::new(self.alpha)?.with_bulk_viscosity(self.bulk_coeff)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bulk_coeff(&self) -> f64 {
        self.bulk_coeff
    }

    /// `μ̃(θ) = 1 + (1 + θ²)^{α/2}`.
    #[inline]
    pub fn shear_viscosity(&self, theta: f64) -> f64 {
        let w = 1.0 + theta * theta;
        if self.alpha == 1.0 {
            1.0 + w.sqrt()
        } else {
            1.0 + w.powf(0.5 * self.alpha)
        }
    }

    /// `μ̃'(θ) = α θ (1 + θ²)^{α/2 − 1}`.
    pub fn shear_viscosity_derivative(&self, theta: f64) -> f64 {
        self.alpha * theta * (1.0 + theta * theta).powf(0.5 * self.alpha - 1.0)
    }

    #[inline]
    pub fn bulk_viscosity(&self, theta: f64) -> f64 {
        if self.bulk_coeff == 0.0 {
            0.0
        } else {
            self.bulk_coeff * self.shear_viscosity(theta)
        }
    }

    /// `κ̃(θ) = 1 + θ³`.
    #[inline]
    pub fn heat_conductivity(&self, theta: f64) -> f64 {
        1.0 + theta * theta * theta
    }

    pub fn shear_bounds(&self) -> GrowthBounds {
        GrowthBounds { lo: 0.5, hi: 2.0, exponent: self.alpha }
    }

    /// Upper bound on `|μ̃'|` over `θ >= 0`.
    pub fn shear_derivative_bound(&self) -> f64 {
        1.0
    }

    pub fn bulk_bounds(&self) -> GrowthBounds {
        GrowthBounds { lo: 0.0, hi: 2.0 * self.bulk_coeff, exponent: self.alpha }
    }

    pub fn conductivity_bounds(&self) -> GrowthBounds {
        GrowthBounds { lo: 1.0, hi: 1.0, exponent: 3.0 }
    }

    /// Newton's law `S = 2μ̃ (D u − (1/d) div u I) + η̃ div u I`.
    pub fn viscous_stress<const D: usize>(&self, theta: f64, grad_u: &Tensor<D>) -> Tensor<D> {
        let mu = self.shear_viscosity(theta);
        let eta = self.bulk_viscosity(theta);
        stress_with(mu, eta, grad_u)
    }

    /// Fourier's law `q = −κ̃(θ) ∇θ`.
    pub fn heat_flux<const D: usize>(&self, theta: f64, grad_theta: &[f64; D]) -> [f64; D] {
        let k = self.heat_conductivity(theta);
        grad_theta.map(|g| -k * g)
    }

    /// `(1/θ)(μ_n S:D u − κ_n q·∇θ/θ)`.
    pub fn entropy_production<const D: usize>(
        &self,
        theta: f64,
        grad_u: &Tensor<D>,
        grad_theta: &[f64; D],
        mu_n: f64,
        kappa_n: f64,
    ) -> f64 {
        let s = self.viscous_stress(theta, grad_u);
        let q = self.heat_flux(theta, grad_theta);
        let mut sd = 0.0;
        for i in 0..D {
            for j in 0..D {
                sd += s[i][j] * 0.5 * (grad_u[i][j] + grad_u[j][i]);
            }
        }
        let qg: f64 = q.iter().zip(grad_theta).map(|(a, b)| a * b).sum();
        (mu_n * sd - kappa_n * qg / theta) / theta
    }
}

/// Stress for given shear and bulk viscosities.
#[inline]
pub fn stress_with<const D: usize>(mu: f64, eta: f64, grad_u: &Tensor<D>) -> Tensor<D> {
    let div: f64 = (0..D).map(|i| grad_u[i][i]).sum();
    let mut s = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            s[i][j] = mu * (grad_u[i][j] + grad_u[j][i]);
        }
        s[i][i] += (eta - 2.0 * mu / D as f64) * div;
    }
    s
}

/// `∇u + ∇uᵀ − (2/d) div u I`, the tensor whose square enters the dissipation.
pub fn deviatoric_strain<const D: usize>(grad_u: &Tensor<D>) -> Tensor<D> {
    stress_with(1.0, 0.0, grad_u)
}

/// Frobenius contraction `A : B`.
pub fn contract<const D: usize>(a: &Tensor<D>, b: &Tensor<D>) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        for j in 0..D {
            acc += a[i][j] * b[i][j];
        }
    }
    acc
}
