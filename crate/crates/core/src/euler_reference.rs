//! Closed-form isobaric Euler solutions on the channel, the temperature
//! assignment `θ_E = (γ−1) e_E`, and discrete residual checks.
//!
//! Both families share `ρ_E = 1 + A cos(2πk(x − vt)) cos²(πy)`, a constant
//! velocity `(v, 0)` and `e_E = p₀/((γ−1)ρ_E)`, so the pressure is uniform and
//! the flow is an exact contact-type solution. `v = 0` gives the stationary
//! family.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nsf_solver::{FluidField, Grid, Primitive};
use crate::relative_energy::{TestTrio, TrioPoint};
use crate::thermodynamics::{GasModel, ThermoState};

/// Analytic Euler fields `(ρ_E, u_E, e_E)`.
pub trait EulerFields {
    fn density(&self, t: f64, x: f64, y: f64) -> f64;
    fn velocity(&self, t: f64, x: f64, y: f64) -> [f64; 2];
    fn internal_energy(&self, t: f64, x: f64, y: f64) -> f64;
}

/// Density modulation `A cos(2πk ξ) cos²(πy)`; flat at the walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineProfile {
    pub amplitude: f64,
    pub wavenumber: u32,
}

impl CosineProfile {
    pub fn new(amplitude: f64, wavenumber: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&amplitude) || wavenumber == 0 {
            return Err(Error::InvalidProfile(format!(
                "amplitude {amplitude} must lie in [0, 1) and wavenumber {wavenumber} must be positive"
            )));
        }
        Ok(Self { amplitude, wavenumber })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Stationary,
    Traveling,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(Self::Stationary),
            "traveling" | "travelling" => Ok(Self::Traveling),
            other => Err(Error::InvalidParameter(format!("unknown Euler family '{other}'"))),
        }
    }
}

/// Bounds of the Euler fields with a 10% margin on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerBounds {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub e_lo: f64,
    pub e_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub speed: f64,
}

/// A member of the isobaric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerSolution {
    gamma: f64,
    p0: f64,
    speed: f64,
    profile: CosineProfile,
}

impl EulerSolution {
    pub fn stationary(gamma: f64, p0: f64, profile: CosineProfile) -> Result<Self> {
        Self::traveling(gamma, p0, 0.0, profile)
    }

    pub fn traveling(gamma: f64, p0: f64, speed: f64, profile: CosineProfile) -> Result<Self> {
        if !(gamma > 1.0) || !(p0 > 0.0) || !speed.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma={gamma}, p0={p0}, speed={speed}")));
        }
        let profile = CosineProfile::new(profile.amplitude, profile.wavenumber)?;
        Ok(Self { gamma, p0, speed, profile })
    }

    pub fn kind(&self) -> FamilyKind {
        if self.speed == 0.0 {
            FamilyKind::Stationary
        } else {
            FamilyKind::Traveling
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn profile(&self) -> CosineProfile {
        self.profile
    }

    #[inline]
    fn phase(&self, t: f64, x: f64) -> f64 {
        2.0 * PI * self.profile.wavenumber as f64 * (x - self.speed * t)
    }

    /// `θ_E = (γ−1)e_E = p₀/ρ_E`.
    pub fn temperature(&self, t: f64, x: f64, y: f64) -> f64 {
        self.p0 / self.density(t, x, y)
    }

    pub fn primitive(&self, t: f64, x: f64, y: f64) -> Primitive {
        let rho = self.density(t, x, y);
        Primitive { rho, u: [self.speed, 0.0], theta: self.p0 / rho }
    }

    pub fn bounds(&self) -> EulerBounds {
        let a = self.profile.amplitude;
        let (rmin, rmax) = (1.0 - a, 1.0 + a);
        let m = self.gamma - 1.0;
        EulerBounds {
            rho_lo: 0.9 * rmin,
            rho_hi: 1.1 * rmax,
            e_lo: 0.9 * self.p0 / (m * rmax),
            e_hi: 1.1 * self.p0 / (m * rmin),
            theta_lo: 0.9 * self.p0 / rmax,
            theta_hi: 1.1 * self.p0 / rmin,
            speed: self.speed.abs(),
        }
    }

    /// Threshold 25% above the smallest admissible `ρ̄/((γ−1)e̲)^{1/(γ−1)}`.
    pub fn threshold(&self) -> f64 {
        let b = self.bounds();
        1.25 * min_threshold(b.rho_hi, b.e_lo, self.gamma)
    }

    /// Equation of state whose ideal region contains the solution.
    pub fn gas_model(&self) -> Result<GasModel> {
        GasModel::new(self.gamma, self.threshold())
    }

    /// Initial data sampler for the solver.
    pub fn initial_field(&self, gas: &GasModel, grid: Grid, bc: crate::nsf_solver::BoundaryKind) -> Result<FluidField> {
        FluidField::initialize(gas, grid, bc, |x, y| self.primitive(0.0, x, y))
    }
}

impl EulerFields for EulerSolution {
    fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        let c = (PI * y).cos();
        1.0 + self.profile.amplitude * self.phase(t, x).cos() * c * c
    }

    fn velocity(&self, _t: f64, _x: f64, _y: f64) -> [f64; 2] {
        [self.speed, 0.0]
    }

    fn internal_energy(&self, t: f64, x: f64, y: f64) -> f64 {
        self.p0 / ((self.gamma - 1.0) * self.density(t, x, y))
    }
}

impl TestTrio for EulerSolution {
    fn eval(&self, t: f64, x: f64, y: f64) -> TrioPoint {
        let a = self.profile.amplitude;
        let kk = 2.0 * PI * self.profile.wavenumber as f64;
        let ph = self.phase(t, x);
        let c = (PI * y).cos();
        let r = 1.0 + a * ph.cos() * c * c;
        let dx = -a * kk * ph.sin() * c * c;
        let dy = -a * PI * ph.cos() * (2.0 * PI * y).sin();
        let dt = -self.speed * dx;
        let th = self.p0 / r;
        let f = -self.p0 / (r * r);
        TrioPoint {
            r,
            theta: th,
            u: [self.speed, 0.0],
            grad_r: [dx, dy],
            grad_theta: [f * dx, f * dy],
            grad_u: [[0.0; 2]; 2],
            dt_r: dt,
            dt_theta: f * dt,
            dt_u: [0.0; 2],
        }
    }
}

/// Smallest admissible threshold `ρ̄/((γ−1)e̲)^{1/(γ−1)}`.
pub fn min_threshold(rho_hi: f64, e_lo: f64, gamma: f64) -> f64 {
    rho_hi / ((gamma - 1.0) * e_lo).powf(1.0 / (gamma - 1.0))
}

/// Temperatures `θ_E = (γ−1)e_E` at cell centers and the checks behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureAssignment {
    pub theta: Vec<f64>,
    pub max_compressibility: f64,
    /// `max |e(ρ_E, θ_E) − e_E| / e_E`.
    pub max_energy_mismatch: f64,
}

/// Assigns `θ_E` on the grid at time `t` and verifies `Z_E < Z̲` in every cell.
pub fn assign_temperature<F: EulerFields + ?Sized>(gas: &GasModel, fields: &F, grid: &Grid, t: f64) -> Result<TemperatureAssignment> {
    let mut out =
        TemperatureAssignment { theta: Vec::with_capacity(grid.nx() * grid.ny()), max_compressibility: 0.0, max_energy_mismatch: 0.0 };
    for (i, j) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let rho = fields.density(t, x, y);
        let e = fields.internal_energy(t, x, y);
        if !(rho > 0.0 && e > 0.0) {
            return Err(Error::InvalidProfile(format!("rho={rho}, e={e} at ({x}, {y})")));
        }
        let theta = (gas.gamma() - 1.0) * e;
        let state = ThermoState { rho, theta };
        let z = gas.compressibility(state);
        if z >= gas.z_threshold() {
            return Err(Error::ThresholdViolation { z, threshold: gas.z_threshold(), i: i as usize, j: j as usize });
        }
        out.max_compressibility = out.max_compressibility.max(z);
        out.max_energy_mismatch = out.max_energy_mismatch.max((gas.internal_energy(state) - e).abs() / e);
        out.theta.push(theta);
    }
    Ok(out)
}

/// Discrete L² norms of the mass, momentum and energy residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

/// Central differences in `t`, `x`, `y` with step `h` of `q` at cell centers,
/// reduced by `combine(dt, dx, dy)` and accumulated as a discrete L² norm.
fn l2_residual<Q, C>(grid: &Grid, t: f64, q: Q, combine: C) -> f64
where
    Q: Fn(f64, f64, f64) -> Vec<f64>,
    C: Fn(f64, f64, f64, &[f64], &[f64], &[f64], &[f64]) -> Vec<f64>,
{
    let h = grid.h();
    let mut acc = 0.0;
    for (i, j) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let at = q(t, x, y);
        let dq = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<_>>();
        let qt = dq(q(t + h, x, y), q(t - h, x, y));
        let qx = dq(q(t, x + h, y), q(t, x - h, y));
        let qy = dq(q(t, x, y + h), q(t, x, y - h));
        for r in combine(t, x, y, &at, &qt, &qx, &qy) {
            acc += r * r;
        }
    }
    (acc * grid.cell_area()).sqrt()
}

/// Residuals of the Euler system with `p = (γ−1)ρe`, conservative form:
/// `∂ₜρ + div(ρu)`, `∂ₜ(ρu) + div(ρu⊗u + pI)`, `∂ₜE + div((E+p)u)`.
pub fn euler_residual<F: EulerFields + ?Sized>(gas: &GasModel, fields: &F, grid: &Grid, t: f64) -> ResidualNorms {
    let g1 = gas.gamma() - 1.0;
    // [ρ, ρu, ρv, E, flux_x(4), flux_y(4)]
    let q = |t: f64, x: f64, y: f64| {
        let rho = fields.density(t, x, y);
        let u = fields.velocity(t, x, y);
        let rho_e = rho * fields.internal_energy(t, x, y);
        let p = g1 * rho_e;
        let en = 0.5 * rho * (u[0] * u[0] + u[1] * u[1]) + rho_e;
        vec![
            rho,
            rho * u[0],
            rho * u[1],
            en,
            rho * u[0],
            rho * u[0] * u[0] + p,
            rho * u[1] * u[0],
            (en + p) * u[0],
            rho * u[1],
            rho * u[0] * u[1],
            rho * u[1] * u[1] + p,
            (en + p) * u[1],
        ]
    };
    let part = |sel: &'static [usize]| {
        l2_residual(grid, t, q, move |_, _, _, _, qt, qx, qy| sel.iter().map(|&c| qt[c] + qx[4 + c] + qy[8 + c]).collect())
    };
    ResidualNorms { mass: part(&[0]), momentum: part(&[1, 2]), energy: part(&[3]) }
}

/// `∂ₜ(ρs) + div(ρ s u)` with `s = s(ρ_E, θ_E)` from the gas model.
pub fn entropy_conservation_residual<F: EulerFields + ?Sized>(gas: &GasModel, fields: &F, grid: &Grid, t: f64) -> f64 {
    let g1 = gas.gamma() - 1.0;
    let q = |t: f64, x: f64, y: f64| {
        let rho = fields.density(t, x, y);
        let u = fields.velocity(t, x, y);
        let theta = g1 * fields.internal_energy(t, x, y);
        let rs = rho * gas.entropy(ThermoState { rho, theta });
        vec![rs, rs * u[0], rs * u[1]]
    };
    l2_residual(grid, t, q, |_, _, _, _, qt, qx, qy| vec![qt[0] + qx[1] + qy[2]])
}

/// `(∂ₜθ + u·∇θ + (γ−1)θ div u, ∂ₜp + u·∇p + γ p div u)` with `θ = θ_E` and
/// `p = p(ρ_E, θ_E)`.
pub fn transport_identity_residuals<F: EulerFields + ?Sized>(gas: &GasModel, fields: &F, grid: &Grid, t: f64) -> (f64, f64) {
    let gamma = gas.gamma();
    let q = |t: f64, x: f64, y: f64| {
        let rho = fields.density(t, x, y);
        let u = fields.velocity(t, x, y);
        let theta = (gamma - 1.0) * fields.internal_energy(t, x, y);
        let p = gas.pressure(ThermoState { rho, theta });
        vec![theta, p, u[0], u[1]]
    };
    let theta_res = l2_residual(grid, t, q, |_, _, _, at, qt, qx, qy| {
        let div = qx[2] + qy[3];
        vec![qt[0] + at[2] * qx[0] + at[3] * qy[0] + (gamma - 1.0) * at[0] * div]
    });
    let p_res = l2_residual(grid, t, q, |_, _, _, at, qt, qx, qy| {
        let div = qx[2] + qy[3];
        vec![qt[1] + at[2] * qx[1] + at[3] * qy[1] + gamma * at[1] * div]
    });
    (theta_res, p_res)
}

/// Coefficient of `div u_E` in the pressure/entropy combination:
/// `p_E − p + (γ−1)ρ_Eθ_E(s − s_E) − γ(1 − ρ/ρ_E)p_E + (γ−1)θ_E(ρ − ρ_E)(s − s_E)`.
pub fn pressure_entropy_bracket(gas: &GasModel, reference: ThermoState, state: ThermoState) -> f64 {
    let g1 = gas.gamma() - 1.0;
    let (re, te) = (reference.rho, reference.theta);
    let pe = gas.pressure(reference);
    let ds = gas.entropy(state) - gas.entropy(reference);
    pe - gas.pressure(state) + g1 * re * te * ds - gas.gamma() * (1.0 - state.rho / re) * pe + g1 * te * (state.rho - re) * ds
}

/// Quadratic-order probe of [`pressure_entropy_bracket`] around each sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraicIdentityReport {
    /// Bracket at zero perturbation, largest magnitude.
    pub max_at_zero: f64,
    /// Range of `B(1e-2)/B(5e-3)` over samples.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest symmetric-difference slope `|B(ε) − B(−ε)|/(2ε)` at `ε = 1e-5`,
    /// relative to the bracket scale `p_E`.
    pub max_linear_coeff: f64,
}

/// Perturbs each reference state along `(ρ_E, 0.7 θ_E)` and measures the
/// order of the bracket.
pub fn algebraic_identity_check(gas: &GasModel, samples: &[ThermoState]) -> AlgebraicIdentityReport {
    let mut rep = AlgebraicIdentityReport { max_at_zero: 0.0, min_ratio: f64::INFINITY, max_ratio: 0.0, max_linear_coeff: 0.0 };
    for &s in samples {
        let b = |eps: f64| {
            let st = ThermoState { rho: s.rho * (1.0 + eps), theta: s.theta * (1.0 + 0.7 * eps) };
            pressure_entropy_bracket(gas, s, st)
        };
        rep.max_at_zero = rep.max_at_zero.max(b(0.0).abs());
        let ratio = b(1e-2) / b(5e-3);
        rep.min_ratio = rep.min_ratio.min(ratio);
        rep.max_ratio = rep.max_ratio.max(ratio);
        let eps = 1e-5;
        let slope = (b(eps) - b(-eps)).abs() / (2.0 * eps) / gas.pressure(s);
        rep.max_linear_coeff = rep.max_linear_coeff.max(slope);
    }
    rep
}

/// `(∫|ρ − ρ_E|, ∫|ρe − ρ_E e_E|, ∫|ρu − ρ_E u_E|)` at time `t`.
pub fn l1_errors<F: EulerFields + ?Sized>(gas: &GasModel, field: &FluidField, fields: &F, t: f64) -> [f64; 3] {
    let g = *field.grid();
    let mut acc = [0.0; 3];
    for (i, j) in g.cells() {
        let k = g.idx(i, j);
        let (x, y) = g.center(i, j);
        let re = fields.density(t, x, y);
        let ue = fields.velocity(t, x, y);
        let rho = field.rho[k];
        let rho_e = rho * gas.internal_energy(ThermoState { rho, theta: field.theta[k] });
        acc[0] += (rho - re).abs();
        acc[1] += (rho_e - re * fields.internal_energy(t, x, y)).abs();
        let dm = [field.mx[k] - re * ue[0], field.my[k] - re * ue[1]];
        acc[2] += (dm[0] * dm[0] + dm[1] * dm[1]).sqrt();
    }
    acc.map(|v| v * g.cell_area())
}

/// Least-squares slope of `log err` against `log h`.
pub fn fitted_order(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
