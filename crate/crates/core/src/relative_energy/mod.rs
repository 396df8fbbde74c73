//! Relative energy between a fluid state and a smooth test trio, its
//! radiation-augmented form, the cutoff splitting into essential and residual
//! parts, and the functionals used to monitor a vanishing-dissipation run.
//!
//! The relative energy is the Bregman distance generated by the ballistic free
//! energy `H_Θ(ρ, θ) = ρ(e − Θ s)`:
//!
//! ```text
//! E = ½ρ|u − U|² + H_Θ(ρ, θ) − ∂ρH_Θ(r, Θ)(ρ − r) − H_Θ(r, Θ)
//! ```

mod consistency;
mod inequality;

pub use consistency::{
    consistency_bound_check, consistency_terms, dissipation_functional, total_energy, BoundVerdict, ChainStep, ConsistencyMonitor,
    ConsistencyReport, ConsistencyTerms, TermVerdict,
};
pub use inequality::{relative_energy_integral, two_grid_tolerance, GapSample, InequalityMonitor, RhsTerms};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermodynamics::{GasModel, ThermoState};

/// Test functions `(r, Θ, U)` and their first derivatives at one point.
/// `grad_u[i][j] = ∂U_i/∂x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrioPoint {
    pub r: f64,
    pub theta: f64,
    pub u: [f64; 2],
    pub grad_r: [f64; 2],
    pub grad_theta: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub dt_r: f64,
    pub dt_theta: f64,
    pub dt_u: [f64; 2],
}

impl TrioPoint {
    /// Constant trio.
    pub fn constant(r: f64, theta: f64, u: [f64; 2]) -> Self {
        Self { r, theta, u, ..Default::default() }
    }

    pub fn base(&self) -> BaseState {
        BaseState { r: self.r, theta: self.theta, u: self.u }
    }
}

/// Smooth test functions on the space-time channel.
pub trait TestTrio {
    fn eval(&self, t: f64, x: f64, y: f64) -> TrioPoint;
}

/// Trio values without derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseState {
    pub r: f64,
    pub theta: f64,
    pub u: [f64; 2],
}

/// `ρ(e − Θ s)`, gas part only.
pub fn ballistic_free_energy(gas: &GasModel, state: ThermoState, big_theta: f64) -> f64 {
    state.rho * (gas.internal_energy(state) - big_theta * gas.entropy(state))
}

/// `ρ((e + e_R) − Θ(s + s_R))`.
pub fn augmented_ballistic_free_energy(gas: &GasModel, state: ThermoState, big_theta: f64) -> f64 {
    state.rho * (gas.total_internal_energy(state) - big_theta * gas.total_entropy(state))
}

/// `∂H_Θ/∂ρ` at `(ρ, θ)` with `Θ` fixed, gas part. The radiation part of `H_Θ`
/// does not depend on `ρ`.
pub fn free_energy_density_derivative(gas: &GasModel, state: ThermoState, big_theta: f64) -> f64 {
    let d = gas.partials(state);
    d.e + state.rho * d.e_rho - big_theta * (d.s + state.rho * d.s_rho)
}

/// Pointwise relative energy `E(ρ, θ, u | r, Θ, U)`.
pub fn relative_energy(gas: &GasModel, state: ThermoState, u: [f64; 2], base: &BaseState) -> f64 {
    let w = [u[0] - base.u[0], u[1] - base.u[1]];
    let kinetic = 0.5 * state.rho * (w[0] * w[0] + w[1] * w[1]);
    let at_base = ThermoState { rho: base.r, theta: base.theta };
    kinetic + ballistic_free_energy(gas, state, base.theta)
        - free_energy_density_derivative(gas, at_base, base.theta) * (state.rho - base.r)
        - ballistic_free_energy(gas, at_base, base.theta)
}

/// `a(θ⁴ − Θ⁴) + (4a/3)Θ(Θ³ − θ³)`, nonnegative for `a ≥ 0`.
#[inline]
pub fn radiation_gap(a: f64, theta: f64, big_theta: f64) -> f64 {
    let t3 = theta * theta * theta;
    let b3 = big_theta * big_theta * big_theta;
    a * (t3 * theta - b3 * big_theta) + 4.0 * a / 3.0 * big_theta * (b3 - t3)
}

/// `E_a = E + radiation_gap`, with the gas model's radiation coefficient.
pub fn augmented_relative_energy(gas: &GasModel, state: ThermoState, u: [f64; 2], base: &BaseState) -> f64 {
    relative_energy(gas, state, u, base) + radiation_gap(gas.radiation_coeff(), state.theta, base.theta)
}

/// Limit of `E / (|ρ−r|² + |θ−Θ|² + |u−U|²)` as the state approaches the
/// base point: the smallest eigenvalue of half the Hessian,
/// `min(p_ρ/(2r), r e_θ/(2Θ), r/2)`.
pub fn quadratic_coercivity_limit(gas: &GasModel, base: &BaseState) -> f64 {
    let d = gas.partials(ThermoState { rho: base.r, theta: base.theta });
    (0.5 * d.p_rho / base.r).min(0.5 * base.r * d.e_theta / base.theta).min(0.5 * base.r)
}

/// Smooth cutoff `Φ(ρ, θ)` equal to one on `[ρ̲, ρ̄] × [θ̲, θ̄]` and vanishing
/// outside `[ρ̲/m, mρ̄] × [θ̲/m, mθ̄]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssResCutoff {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub margin: f64,
}

impl EssResCutoff {
    pub fn new(rho_lo: f64, rho_hi: f64, theta_lo: f64, theta_hi: f64, margin: f64) -> Result<Self> {
        let ok = 0.0 < rho_lo && rho_lo < rho_hi && 0.0 < theta_lo && theta_lo < theta_hi && margin > 1.0;
        if !ok || !rho_hi.is_finite() || !theta_hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cutoff box [{rho_lo}, {rho_hi}] x [{theta_lo}, {theta_hi}] with margin {margin}"
            )));
        }
        Ok(Self { rho_lo, rho_hi, theta_lo, theta_hi, margin })
    }

    /// Box with the default transition width (factor 2).
    pub fn with_box(rho_lo: f64, rho_hi: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        Self::new(rho_lo, rho_hi, theta_lo, theta_hi, 2.0)
    }

    pub fn phi(&self, rho: f64, theta: f64) -> f64 {
        bump(rho, self.rho_lo, self.rho_hi, self.margin) * bump(theta, self.theta_lo, self.theta_hi, self.margin)
    }

    /// `([F]_ess, [F]_res)` with `[F]_ess = Φ F` and `[F]_res = F − [F]_ess`.
    pub fn split(&self, state: ThermoState, value: f64) -> (f64, f64) {
        let ess = self.phi(state.rho, state.theta) * value;
        (ess, value - ess)
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn bump(x: f64, lo: f64, hi: f64, margin: f64) -> f64 {
    if x >= lo && x <= hi {
        1.0
    } else if x < lo {
        let a = lo / margin;
        smoothstep((x - a) / (lo - a))
    } else {
        let b = hi * margin;
        smoothstep((b - x) / (b - hi))
    }
}

/// One coercivity sample: fluid state, velocity, and base point.
#[derive(Debug, Clone, Copy)]
pub struct CoercivitySample {
    pub state: ThermoState,
    pub u: [f64; 2],
    pub base: BaseState,
}

/// Largest constants realizing the two lower bounds over a sample cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityReport {
    /// `min E / ([ρ−r]²_ess + [θ−Θ]²_ess + |u−U|²_ess)`.
    pub quadratic: f64,
    /// `min E_a / (1_res + [ρ(e+e_R)]_res + [ρ|s+s_R|]_res)`.
    pub residual_augmented: f64,
    /// `min E / (1_res + [ρe]_res + [ρ|s|]_res)`.
    pub residual: f64,
    pub quadratic_samples: usize,
    pub residual_samples: usize,
}

impl CoercivityReport {
    /// Smallest of the reported constants.
    pub fn constant(&self) -> f64 {
        self.quadratic.min(self.residual).min(self.residual_augmented)
    }
}

/// Fits the constants of both coercivity bounds over `samples`. A negative
/// relative energy (beyond roundoff) is an error.
pub fn coercivity_check(gas: &GasModel, cutoff: &EssResCutoff, samples: &[CoercivitySample]) -> Result<CoercivityReport> {
    let mut rep = CoercivityReport {
        quadratic: f64::INFINITY,
        residual_augmented: f64::INFINITY,
        residual: f64::INFINITY,
        quadratic_samples: 0,
        residual_samples: 0,
    };
    for (index, s) in samples.iter().enumerate() {
        let e = relative_energy(gas, s.state, s.u, &s.base);
        let ea = e + radiation_gap(gas.radiation_coeff(), s.state.theta, s.base.theta);
        let scale = ballistic_free_energy(gas, s.state, s.base.theta).abs() + s.state.rho;
        if e < -1e-12 * scale || ea < -1e-12 * scale || !e.is_finite() {
            return Err(Error::CoercivityFailure { index, value: e.min(ea) });
        }
        let phi = cutoff.phi(s.state.rho, s.state.theta);
        let w = [s.u[0] - s.base.u[0], s.u[1] - s.base.u[1]];
        let dr = s.state.rho - s.base.r;
        let dt = s.state.theta - s.base.theta;
        let quad = phi * (dr * dr + dt * dt + w[0] * w[0] + w[1] * w[1]);
        if quad > 0.0 {
            rep.quadratic = rep.quadratic.min(e / quad);
            rep.quadratic_samples += 1;
        }
        let res = 1.0 - phi;
        if res > 0.0 {
            let rho = s.state.rho;
            let gas_part = res * (1.0 + rho * gas.internal_energy(s.state) + rho * gas.entropy(s.state).abs());
            let total = res * (1.0 + rho * gas.total_internal_energy(s.state) + rho * gas.total_entropy(s.state).abs());
            rep.residual = rep.residual.min(e / gas_part);
            rep.residual_augmented = rep.residual_augmented.min(ea / total);
            rep.residual_samples += 1;
        }
    }
    Ok(rep)
}

/// Constants of the basic estimates `ρ^γ + ρθ ≤ C ρe` and
/// `0 ≤ ρs ≤ C ρ(1 + |log ρ| + [log θ]⁺)` over a cloud of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasicEstimates {
    pub energy_constant: f64,
    pub entropy_constant: f64,
    pub min_entropy: f64,
}

pub fn basic_estimates(gas: &GasModel, states: &[ThermoState]) -> BasicEstimates {
    let mut out = BasicEstimates { energy_constant: 0.0, entropy_constant: 0.0, min_entropy: f64::INFINITY };
    for &st in states {
        let ThermoState { rho, theta } = st;
        let rho_e = rho * gas.internal_energy(st);
        let rho_s = rho * gas.entropy(st);
        out.energy_constant = out.energy_constant.max((rho.powf(gas.gamma()) + rho * theta) / rho_e);
        out.entropy_constant = out.entropy_constant.max(rho_s / (rho * (1.0 + rho.ln().abs() + theta.ln().max(0.0))));
        out.min_entropy = out.min_entropy.min(rho_s);
    }
    out
}
