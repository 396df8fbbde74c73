//! Complete equation of state built on the polytropic closure `p = (γ-1) ρ e`.
//!
//! Pressure, internal energy and entropy are generated by a pair of structure
//! functions of the scaling variable `Z = ρ / θ^{1/(γ-1)}`:
//!
//! ```text
//! p = θ^{γ/(γ-1)} P(Z),   e = θ/(γ-1) · P(Z)/Z,   s = S(Z)
//! ```
//!
//! The structure functions are piecewise: the identity `P(Z) = Z` below the
//! threshold `Z̲` (where the gas obeys Boyle-Mariotte, `p = ρθ`) and a
//! `Z^γ` branch above it whose entropy decays to zero. Both pieces join in C¹.
//!
//! Radiation adds `p_R = aθ⁴/3`, `e_R = aθ⁴/ρ`, `s_R = 4aθ³/(3ρ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Density and absolute temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoState {
    pub rho: f64,
    pub theta: f64,
}

impl ThermoState {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::DegenerateState(format!("density must be positive, got {rho}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::DegenerateState(format!("temperature must be positive, got {theta}")));
        }
        Ok(Self { rho, theta })
    }
}

/// Pressure, energy, entropy and their first partial derivatives at one state,
/// for the gas part only (no radiation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub p: f64,
    pub p_rho: f64,
    pub p_theta: f64,
    pub e: f64,
    pub e_rho: f64,
    pub e_theta: f64,
    pub s: f64,
    pub s_rho: f64,
    pub s_theta: f64,
}

/// The complete (p, ρ, θ) equation of state.
///
/// `radiation_coeff` is a per-run quantity supplied by the dissipation schedule
/// and is not part of the persisted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
    z_threshold: f64,
    #[serde(skip)]
    radiation_coeff: f64,
    /// `2/(γ−1)` when it is a small integer, else 0.
    #[serde(skip)]
    twice_power: i32,
}

impl GasModel {
    /// Builds the structure functions for adiabatic exponent `gamma` and
    /// ideal-region threshold `z_threshold`.
    pub fn new(gamma: f64, z_threshold: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(z_threshold > 0.0 && z_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!("z_threshold must be positive, got {z_threshold}")));
        }
        let twice = 2.0 / (gamma - 1.0);
        let k = (twice + 0.5).floor();
        let twice_power = if (twice - k).abs() < 1e-12 && k <= 16.0 { k as i32 } else { 0 };
        Ok(Self { gamma, z_threshold, radiation_coeff: 0.0, twice_power })
    }

    /// Returns a copy carrying the radiation coefficient `a`.
    pub fn with_radiation(mut self, a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("radiation coefficient must be non-negative, got {a}")));
        }
        self.radiation_coeff = a;
        Ok(self)
    }

    /// Re-checks invariants after deserialization.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.gamma, self.z_threshold)?.with_radiation(self.radiation_coeff)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn z_threshold(&self) -> f64 {
        self.z_threshold
    }

    pub fn radiation_coeff(&self) -> f64 {
        self.radiation_coeff
    }

    /// `1/(γ-1)`, the ideal-branch specific heat.
    #[inline]
    pub fn inv_gm1(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    // ---- structure functions -------------------------------------------------

    #[inline]
    pub fn structure_p(&self, z: f64) -> f64 {
        let w = z / self.z_threshold;
        if w <= 1.0 {
            z
        } else {
            self.z_threshold * ((self.gamma - 1.0) / self.gamma + w.powf(self.gamma) / self.gamma)
        }
    }

    #[inline]
    pub fn structure_dp(&self, z: f64) -> f64 {
        let w = z / self.z_threshold;
        if w <= 1.0 {
            1.0
        } else {
            w.powf(self.gamma - 1.0)
        }
    }

    #[inline]
    pub fn structure_s(&self, z: f64) -> f64 {
        let w = z / self.z_threshold;
        if w <= 1.0 {
            1.0 - w.ln()
        } else {
            1.0 / w
        }
    }

    #[inline]
    pub fn structure_ds(&self, z: f64) -> f64 {
        let w = z / self.z_threshold;
        if w <= 1.0 {
            -1.0 / z
        } else {
            -1.0 / (w * w * self.z_threshold)
        }
    }

    /// `γP(Z) - P'(Z)Z`, positive by thermodynamic stability.
    #[inline]
    pub fn stability_margin(&self, z: f64) -> f64 {
        self.gamma * self.structure_p(z) - self.structure_dp(z) * z
    }

    // ---- gas part ----------------------------------------------------------------

    /// `θ^{1/(γ−1)}`, without `powf` for integer and half-integer exponents.
    #[inline]
    fn theta_power(&self, theta: f64) -> f64 {
        let k = self.twice_power;
        if k == 0 {
            return theta.powf(self.inv_gm1());
        }
        let mut base = 1.0;
        for _ in 0..k / 2 {
            base *= theta;
        }
        if k % 2 == 0 {
            base
        } else {
            base * theta.sqrt()
        }
    }

    #[inline]
    pub fn compressibility(&self, state: ThermoState) -> f64 {
        state.rho / self.theta_power(state.theta)
    }

    /// True when the state lies on the Boyle-Mariotte branch `Z <= Z̲`.
    pub fn is_ideal(&self, state: ThermoState) -> bool {
        self.compressibility(state) <= self.z_threshold
    }

    #[inline]
    pub fn pressure(&self, state: ThermoState) -> f64 {
        let z = self.compressibility(state);
        if z <= self.z_threshold {
            state.rho * state.theta
        } else {
            state.theta * self.theta_power(state.theta) * self.structure_p(z)
        }
    }

    #[inline]
    pub fn internal_energy(&self, state: ThermoState) -> f64 {
        let z = self.compressibility(state);
        if z <= self.z_threshold {
            state.theta * self.inv_gm1()
        } else {
            state.theta * self.inv_gm1() * self.structure_p(z) / z
        }
    }

    #[inline]
    pub fn entropy(&self, state: ThermoState) -> f64 {
        self.structure_s(self.compressibility(state))
    }

    /// All gas-part values and analytic first partials.
    pub fn partials(&self, state: ThermoState) -> Partials {
        let m = self.inv_gm1();
        let ThermoState { rho, theta } = state;
        let z = self.compressibility(state);
        let pz = self.structure_p(z);
        let dpz = self.structure_dp(z);
        let margin = self.gamma * pz - dpz * z;
        let theta_m = self.theta_power(theta);
        let ds = self.structure_ds(z);
        Partials {
            p: theta_m * theta * pz,
            p_rho: theta * dpz,
            p_theta: m * theta_m * margin,
            e: m * theta * pz / z,
            e_rho: m * theta * (dpz * z - pz) / (z * rho),
            e_theta: m * m * margin / z,
            s: self.structure_s(z),
            s_rho: ds * z / rho,
            s_theta: -m * ds * z / theta,
        }
    }

    // ---- with radiation ---------------------------------------------------------

    #[inline]
    pub fn total_pressure(&self, state: ThermoState) -> f64 {
        let t2 = state.theta * state.theta;
        self.pressure(state) + self.radiation_coeff * t2 * t2 / 3.0
    }

    #[inline]
    pub fn total_internal_energy(&self, state: ThermoState) -> f64 {
        let t2 = state.theta * state.theta;
        self.internal_energy(state) + self.radiation_coeff * t2 * t2 / state.rho
    }

    #[inline]
    pub fn total_entropy(&self, state: ThermoState) -> f64 {
        let t = state.theta;
        self.entropy(state) + 4.0 * self.radiation_coeff * t * t * t / (3.0 * state.rho)
    }

    /// Isentropic sound speed of the radiating gas,
    /// `c² = ∂p/∂ρ + θ (∂p/∂θ)² / (ρ² ∂e/∂θ)` with radiation-augmented partials.
    pub fn sound_speed(&self, state: ThermoState) -> f64 {
        let a = self.radiation_coeff;
        if self.is_ideal(state) {
            let ThermoState { rho, theta } = state;
            let t3 = theta * theta * theta;
            let p_theta = rho + 4.0 * a * t3 / 3.0;
            let e_theta = self.inv_gm1() + 4.0 * a * t3 / rho;
            return (theta + theta * p_theta * p_theta / (rho * rho * e_theta)).sqrt();
        }
        let d = self.partials(state);
        let t3 = state.theta * state.theta * state.theta;
        let p_theta = d.p_theta + 4.0 * a * t3 / 3.0;
        let e_theta = d.e_theta + 4.0 * a * t3 / state.rho;
        let c2 = d.p_rho + state.theta * p_theta * p_theta / (state.rho * state.rho * e_theta);
        c2.sqrt()
    }

    /// Temperature with `ρ e_total(ρ, θ) = rho_e`. Bisection-safeguarded Newton
    /// to relative tolerance `1e-13`, at most 60 iterations.
    pub fn temperature_from_energy(&self, rho: f64, rho_e: f64, guess: f64) -> Result<f64> {
        if !(rho > 0.0) || !(rho_e > 0.0) || !rho_e.is_finite() {
            return Err(Error::NonPhysicalState(format!("internal energy density {rho_e} at density {rho}")));
        }
        let a = self.radiation_coeff;
        let m = self.inv_gm1();
        let target = rho_e / rho;
        // a = 0 on the ideal branch has a closed form.
        if a == 0.0 {
            let theta = target / m;
            if self.compressibility(ThermoState { rho, theta }) <= self.z_threshold {
                return Ok(theta);
            }
        }
        if let Some(theta) = self.ideal_root(rho, guess.max(0.0), |t| {
            let t3 = t * t * t;
            (m * t + a * t3 * t / rho - target, m + 4.0 * a * t3 / rho)
        }) {
            return Ok(theta);
        }
        let f = |theta: f64| {
            let s = ThermoState { rho, theta };
            let d = self.partials(s);
            let t3 = theta * theta * theta;
            (d.e + a * t3 * theta / rho - target, d.e_theta + 4.0 * a * t3 / rho)
        };
        solve_monotone(f, guess, target / m, 1e-13)
            .ok_or_else(|| Error::NonPhysicalState(format!("temperature inversion failed for rho={rho}, rho_e={rho_e}")))
    }

    /// Temperature with `p_total(ρ, θ) = p`.
    pub fn temperature_from_pressure(&self, rho: f64, p: f64, guess: f64) -> Result<f64> {
        if !(rho > 0.0) || !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPhysicalState(format!("pressure {p} at density {rho}")));
        }
        let a = self.radiation_coeff;
        if a == 0.0 {
            let theta = p / rho;
            if self.compressibility(ThermoState { rho, theta }) <= self.z_threshold {
                return Ok(theta);
            }
        }
        if let Some(theta) = self.ideal_root(rho, guess.max(0.0), |t| {
            let t3 = t * t * t;
            (rho * t + a * t3 * t / 3.0 - p, rho + 4.0 * a * t3 / 3.0)
        }) {
            return Ok(theta);
        }
        let f = |theta: f64| {
            let d = self.partials(ThermoState { rho, theta });
            let t3 = theta * theta * theta;
            (d.p + a * t3 * theta / 3.0 - p, d.p_theta + 4.0 * a * t3 / 3.0)
        };
        solve_monotone(f, guess, p / rho, 1e-13)
            .ok_or_else(|| Error::NonPhysicalState(format!("temperature inversion failed for rho={rho}, p={p}")))
    }
}

impl GasModel {
    /// Root of the Boyle-Mariotte branch polynomial, accepted only when it
    /// lands inside the ideal region.
    fn ideal_root<F>(&self, rho: f64, guess: f64, f: F) -> Option<f64>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let theta = solve_monotone(f, guess, 1.0, 1e-13)?;
        (self.compressibility(ThermoState { rho, theta }) <= self.z_threshold).then_some(theta)
    }
}

/// Root of a strictly increasing function on `(0, ∞)`. `f` returns value and
/// derivative. Newton steps that leave the current bracket fall back to bisection.
fn solve_monotone<F>(f: F, guess: f64, fallback: f64, rtol: f64) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = if guess > 0.0 && guess.is_finite() {
        guess
    } else if fallback > 0.0 && fallback.is_finite() {
        fallback
    } else {
        1.0
    };
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for _ in 0..60 {
        let (val, der) = f(x);
        if val == 0.0 {
            return Some(x);
        }
        if val > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let mut next = x - val / der;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) };
        }
        if (next - x).abs() <= rtol * next.abs() {
            return Some(next);
        }
        x = next;
    }
    None
}

/// Radiation pressure, specific energy and specific entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationComponents {
    pub pressure: f64,
    pub energy: f64,
    pub entropy: f64,
}

pub fn radiation_components(radiation_coeff: f64, state: ThermoState) -> Result<RadiationComponents> {
    if !(radiation_coeff >= 0.0) {
        return Err(Error::InvalidParameter(format!("radiation coefficient must be non-negative, got {radiation_coeff}")));
    }
    let t = state.theta;
    let t3 = t * t * t;
    Ok(RadiationComponents {
        pressure: radiation_coeff * t3 * t / 3.0,
        energy: radiation_coeff * t3 * t / state.rho,
        entropy: 4.0 * radiation_coeff * t3 / (3.0 * state.rho),
    })
}

/// Residuals of Gibbs' relation `θ Ds = De + p D(1/ρ)` with central differences:
/// `r₁ = ∂e/∂θ − θ ∂s/∂θ`, `r₂ = θ ∂s/∂ρ − ∂e/∂ρ + p/ρ²`.
///
/// The increments are `fd_step · max(1, ρ)` and `fd_step · max(1, θ)`.
pub fn gibbs_residual(model: &GasModel, state: ThermoState, fd_step: f64) -> Result<(f64, f64)> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd_step must be positive, got {fd_step}")));
    }
    let ThermoState { rho, theta } = state;
    if rho < 2.0 * fd_step || theta < 2.0 * fd_step {
        return Err(Error::DegenerateState(format!("state (rho={rho}, theta={theta}) too close to zero for fd_step {fd_step}")));
    }
    let hr = fd_step * rho.max(1.0);
    let ht = fd_step * theta.max(1.0);
    let at = |r: f64, t: f64| ThermoState { rho: r, theta: t };
    let de_dt = (model.internal_energy(at(rho, theta + ht)) - model.internal_energy(at(rho, theta - ht))) / (2.0 * ht);
    let ds_dt = (model.entropy(at(rho, theta + ht)) - model.entropy(at(rho, theta - ht))) / (2.0 * ht);
    let de_dr = (model.internal_energy(at(rho + hr, theta)) - model.internal_energy(at(rho - hr, theta))) / (2.0 * hr);
    let ds_dr = (model.entropy(at(rho + hr, theta)) - model.entropy(at(rho - hr, theta))) / (2.0 * hr);
    let p = model.pressure(state);
    Ok((de_dt - theta * ds_dt, theta * ds_dr - de_dr + p / (rho * rho)))
}

/// Outcome of [`stability_check`].
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub samples: usize,
    pub min_dp: f64,
    pub min_margin: f64,
    /// Largest observed `(γP(Z) − P'(Z)Z)/Z`.
    pub observed_bound: f64,
    /// Largest relative deviation of `S'(Z)` from `−(γP − P'Z)/((γ−1)Z²)`.
    pub max_entropy_slope_deviation: f64,
}

pub fn stability_check(model: &GasModel, z_samples: &[f64]) -> Result<StabilityReport> {
    if z_samples.is_empty() {
        return Err(Error::InvalidParameter("no Z samples".into()));
    }
    let mut report = StabilityReport {
        samples: z_samples.len(),
        min_dp: f64::INFINITY,
        min_margin: f64::INFINITY,
        observed_bound: 0.0,
        max_entropy_slope_deviation: 0.0,
    };
    for &z in z_samples {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidParameter(format!("Z samples must be positive, got {z}")));
        }
        let dp = model.structure_dp(z);
        if !(dp > 0.0) {
            return Err(Error::StabilityViolation { z, reason: format!("P'(Z) = {dp} is not positive") });
        }
        let margin = model.stability_margin(z);
        if !(margin > 0.0) {
            return Err(Error::StabilityViolation { z, reason: format!("γP(Z) − P'(Z)Z = {margin} is not positive") });
        }
        let expected = -model.inv_gm1() * margin / (z * z);
        let dev = ((model.structure_ds(z) - expected) / expected).abs();
        report.min_dp = report.min_dp.min(dp);
        report.min_margin = report.min_margin.min(margin);
        report.observed_bound = report.observed_bound.max(margin / z);
        report.max_entropy_slope_deviation = report.max_entropy_slope_deviation.max(dev);
    }
    Ok(report)
}

/// `n` logarithmically spaced samples in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}
