use serde::Serialize;

use crate::error::{Error, Result};
use crate::nsf_solver::{Dissipation, FluidField, Monitor, StepView};
use crate::thermodynamics::{GasModel, ThermoState};
use crate::transport::{deviatoric_strain, TransportModel};

const DIM: f64 = 2.0;

/// Instantaneous L¹ norms of the six perturbation terms and the spatial
/// integrals feeding the consistency chains.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ConsistencyTerms {
    /// `‖aθ⁴/3‖, ‖μS‖, ‖(4a/3)θ³‖, ‖(4a/3)θ³u‖, ‖κκ̃∇θ/θ‖, ‖aθ⁴‖`.
    pub norms: [f64; 6],
    pub dissipation_viscous: f64,
    pub dissipation_heat: f64,
    pub energy: f64,
    pub int_mu_theta: f64,
    pub int_theta: f64,
    pub int_theta_growth: f64,
    pub int_theta3: f64,
    pub int_theta4: f64,
    pub int_kappa: f64,
    pub int_u4: f64,
    /// `∫ (θ^{(1−α)/2})^{8/(1−α)}`, or `|Ω|` when `α = 1`.
    pub int_theta_power: f64,
}

impl ConsistencyTerms {
    pub fn dissipation(&self) -> f64 {
        self.dissipation_viscous + self.dissipation_heat
    }
}

fn for_cells(field: &FluidField, mut f: impl FnMut(isize, isize, usize)) {
    let g = *field.grid();
    for (i, j) in g.cells() {
        f(i, j, g.idx(i, j));
    }
}

/// Evaluates all consistency integrands on `field` with cell quadrature.
pub fn consistency_terms(gas: &GasModel, transport: &TransportModel, field: &FluidField, coeffs: Dissipation) -> ConsistencyTerms {
    let a = gas.radiation_coeff();
    let alpha = transport.alpha();
    let (mu, kappa) = (coeffs.mu, coeffs.kappa);
    let mut t = ConsistencyTerms::default();
    for_cells(field, |i, j, k| {
        let th = field.theta[k];
        let rho = field.rho[k];
        let u = [field.u[k], field.v[k]];
        let grad = field.velocity_gradient(i, j);
        let gth = field.temperature_gradient(i, j);
        let th3 = th * th * th;
        let th4 = th3 * th;
        let speed2 = u[0] * u[0] + u[1] * u[1];
        let mu_t = transport.shear_viscosity(th);
        let eta_t = transport.bulk_viscosity(th);
        let kap = transport.heat_conductivity(th);
        let strain = deviatoric_strain(&grad);
        let strain2: f64 = strain.iter().flatten().map(|x| x * x).sum();
        let div = grad[0][0] + grad[1][1];
        let mut stress2 = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                let s = mu_t * strain[p][q] + if p == q { eta_t * div } else { 0.0 };
                stress2 += s * s;
            }
        }
        let gth_norm = (gth[0] * gth[0] + gth[1] * gth[1]).sqrt();
        t.norms[0] += a * th4 / 3.0;
        t.norms[1] += mu * stress2.sqrt();
        t.norms[2] += 4.0 * a * th3 / 3.0;
        t.norms[3] += 4.0 * a * th3 * speed2.sqrt() / 3.0;
        t.norms[4] += kappa * kap * gth_norm / th;
        t.norms[5] += a * th4;
        t.dissipation_viscous += mu * (mu_t * strain2 + eta_t * div * div) / th;
        t.dissipation_heat += kappa * kap * gth_norm * gth_norm / (th * th);
        t.energy += 0.5 * rho * speed2 + rho * gas.internal_energy(ThermoState { rho, theta: th }) + a * th4;
        t.int_mu_theta += mu_t * th;
        t.int_theta += th;
        t.int_theta_growth += th.powf(1.0 + alpha);
        t.int_theta3 += th3;
        t.int_theta4 += th4;
        t.int_kappa += kap;
        t.int_u4 += speed2 * speed2;
        t.int_theta_power += if alpha < 1.0 {
            let q = 8.0 / (1.0 - alpha);
            th.powf(0.5 * (1.0 - alpha)).powf(q)
        } else {
            1.0
        };
    });
    let w = field.grid().cell_area();
    for n in t.norms.iter_mut() {
        *n *= w;
    }
    for v in [
        &mut t.dissipation_viscous,
        &mut t.dissipation_heat,
        &mut t.energy,
        &mut t.int_mu_theta,
        &mut t.int_theta,
        &mut t.int_theta_growth,
        &mut t.int_theta3,
        &mut t.int_theta4,
        &mut t.int_kappa,
        &mut t.int_u4,
        &mut t.int_theta_power,
    ] {
        *v *= w;
    }
    t
}

/// `𝒟 = μ∫(μ̃/θ)|∇u+∇uᵀ−(2/d)div u I|² + μ∫(η̃/θ)|div u|² + κ∫κ̃|∇θ|²/θ²`.
pub fn dissipation_functional(transport: &TransportModel, field: &FluidField, coeffs: Dissipation) -> f64 {
    let mut acc = 0.0;
    for_cells(field, |i, j, k| {
        let th = field.theta[k];
        let grad = field.velocity_gradient(i, j);
        let gth = field.temperature_gradient(i, j);
        let strain2: f64 = deviatoric_strain(&grad).iter().flatten().map(|x| x * x).sum();
        let div = grad[0][0] + grad[1][1];
        acc += coeffs.mu * (transport.shear_viscosity(th) * strain2 + transport.bulk_viscosity(th) * div * div) / th
            + coeffs.kappa * transport.heat_conductivity(th) * (gth[0] * gth[0] + gth[1] * gth[1]) / (th * th);
    });
    acc * field.grid().cell_area()
}

/// `ℰ = ∫(½ρ|u|² + ρe + aθ⁴)` from the primitive variables.
pub fn total_energy(gas: &GasModel, field: &FluidField) -> f64 {
    let a = gas.radiation_coeff();
    let mut acc = 0.0;
    for_cells(field, |_, _, k| {
        let (rho, th) = (field.rho[k], field.theta[k]);
        let speed2 = field.u[k] * field.u[k] + field.v[k] * field.v[k];
        acc += 0.5 * rho * speed2 + rho * gas.internal_energy(ThermoState { rho, theta: th }) + a * th * th * th * th;
    });
    acc * field.grid().cell_area()
}

/// Space-time integrals of one run, accumulated by midpoint quadrature.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConsistencyReport {
    pub mu: f64,
    pub kappa: f64,
    pub a: f64,
    pub alpha: f64,
    pub bulk_coeff: f64,
    pub area: f64,
    pub duration: f64,
    /// `∫‖E^i‖ dt`, `i = 1..6`.
    pub norms: [f64; 6],
    pub dissipation_viscous: f64,
    pub dissipation_heat: f64,
    /// `∫ℰ dt`.
    pub energy: f64,
    pub int_mu_theta: f64,
    pub int_theta: f64,
    pub int_theta_growth: f64,
    pub int_theta3: f64,
    pub int_radiation_energy: f64,
    /// `∫(∫θ⁴)^{3/4} dt`.
    pub int_theta4_34: f64,
    pub int_kappa: f64,
    /// `∫(4a/3)‖θ³‖_{4/3}‖u‖_4 dt`.
    pub radiation_holder: f64,
    /// Largest relative mismatch of the radiation exponent identity.
    pub identity_mismatch: f64,
}

impl ConsistencyReport {
    pub fn dissipation(&self) -> f64 {
        self.dissipation_viscous + self.dissipation_heat
    }

    /// `ω = μ + κ + κ/a^{3/4}` (without the last term when `a = 0`).
    pub fn omega(&self) -> f64 {
        let tail = if self.a > 0.0 { self.kappa / self.a.powf(0.75) } else { 0.0 };
        self.mu + self.kappa + tail
    }
}

/// Accumulates a [`ConsistencyReport`] along a run.
pub struct ConsistencyMonitor {
    gas: GasModel,
    transport: TransportModel,
    coeffs: Dissipation,
    report: ConsistencyReport,
    latest: ConsistencyTerms,
}

impl ConsistencyMonitor {
    pub fn new(gas: GasModel, transport: TransportModel, coeffs: Dissipation) -> Self {
        let report = ConsistencyReport {
            mu: coeffs.mu,
            kappa: coeffs.kappa,
            a: gas.radiation_coeff(),
            alpha: transport.alpha(),
            bulk_coeff: transport.bulk_coeff(),
            ..Default::default()
        };
        Self { gas, transport, coeffs, report, latest: ConsistencyTerms::default() }
    }

    pub fn report(&self) -> &ConsistencyReport {
        &self.report
    }

    pub fn into_report(self) -> ConsistencyReport {
        self.report
    }

    /// Terms at the most recent sample time.
    pub fn latest(&self) -> &ConsistencyTerms {
        &self.latest
    }

    fn identity_mismatch(&self, t: &ConsistencyTerms) -> f64 {
        let (a, mu, alpha) = (self.report.a, self.coeffs.mu, self.report.alpha);
        if !(a > 0.0 && mu > 0.0) || t.int_theta4 == 0.0 {
            return 0.0;
        }
        let holder_sq = t.int_theta4.powf(1.5);
        let power_sq = if alpha < 1.0 { t.int_theta_power.powf(0.25 * (1.0 - alpha)) } else { 1.0 };
        let lhs = a * a / mu * holder_sq * power_sq;
        let rhs = a.powf(0.25 * (1.0 + alpha)) / mu * (a * t.int_theta4).powf(0.25 * (7.0 - alpha));
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    }
}

impl Monitor for ConsistencyMonitor {
    fn start(&mut self, _t: f64, field: &FluidField) -> Result<()> {
        self.report.area = field.grid().domain_area();
        self.latest = consistency_terms(&self.gas, &self.transport, field, self.coeffs);
        Ok(())
    }

    fn step(&mut self, view: &StepView<'_>) -> Result<()> {
        let dt = view.dt();
        let t = consistency_terms(&self.gas, &self.transport, view.mid, self.coeffs);
        let r = &mut self.report;
        for (acc, v) in r.norms.iter_mut().zip(t.norms) {
            *acc += dt * v;
        }
        r.duration += dt;
        r.dissipation_viscous += dt * t.dissipation_viscous;
        r.dissipation_heat += dt * t.dissipation_heat;
        r.energy += dt * t.energy;
        r.int_mu_theta += dt * t.int_mu_theta;
        r.int_theta += dt * t.int_theta;
        r.int_theta_growth += dt * t.int_theta_growth;
        r.int_theta3 += dt * t.int_theta3;
        r.int_radiation_energy += dt * r.a * t.int_theta4;
        r.int_theta4_34 += dt * t.int_theta4.powf(0.75);
        r.int_kappa += dt * t.int_kappa;
        r.radiation_holder += dt * 4.0 * r.a / 3.0 * t.int_theta4.powf(0.75) * t.int_u4.powf(0.25);
        let mismatch = self.identity_mismatch(&t);
        self.report.identity_mismatch = self.report.identity_mismatch.max(mismatch);
        Ok(())
    }

    fn sample(&mut self, _t: f64, field: &FluidField) -> Result<()> {
        self.latest = consistency_terms(&self.gas, &self.transport, field, self.coeffs);
        Ok(())
    }
}

/// One inequality `lhs ≤ rhs` of a consistency chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub chain: &'static str,
    pub step: usize,
    pub run: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl ChainStep {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300
    }
}

/// Fitted constants of one perturbation term across the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermVerdict {
    pub term: usize,
    /// `c_n = max(0, ‖E^i_n‖ − ε𝒟_n) / (∫ℰ_n dt + ω_n T)` per run.
    pub constants: Vec<f64>,
    /// No constant exceeds twice the first one.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub epsilon: f64,
    pub terms: Vec<TermVerdict>,
    pub chains: Vec<ChainStep>,
    pub max_identity_mismatch: f64,
}

impl BoundVerdict {
    pub fn passed(&self) -> bool {
        self.terms.iter().all(|t| t.bounded) && self.chains.iter().all(ChainStep::holds) && self.max_identity_mismatch < 1e-10
    }

    /// First failure as an error.
    pub fn into_result(self) -> Result<Self> {
        if let Some(c) = self.chains.iter().find(|c| !c.holds()) {
            let term = match c.chain {
                "viscous" => 2,
                "heat" => 5,
                _ => 4,
            };
            return Err(Error::BoundViolation {
                term,
                run: c.run,
                detail: format!("{} chain step {}: {} > {}", c.chain, c.step, c.lhs, c.rhs),
            });
        }
        if let Some(t) = self.terms.iter().find(|t| !t.bounded) {
            let run = t.constants.iter().position(|&c| c > 2.0 * t.constants[0] + 1e-12).unwrap_or(0);
            return Err(Error::BoundViolation {
                term: t.term,
                run,
                detail: format!("fitted constants {:?} grow beyond twice the first", t.constants),
            });
        }
        if self.max_identity_mismatch >= 1e-10 {
            return Err(Error::BoundViolation {
                term: 4,
                run: 0,
                detail: format!("radiation exponent identity mismatch {}", self.max_identity_mismatch),
            });
        }
        Ok(self)
    }
}

fn chain_steps(run: usize, r: &ConsistencyReport, eps: f64) -> Vec<ChainStep> {
    let mut out = Vec::new();
    let mut push = |chain, step, lhs, rhs| out.push(ChainStep { chain, step, run, lhs, rhs });
    let (mu, kappa, a, alpha) = (r.mu, r.kappa, r.a, r.alpha);
    let vol = r.area * r.duration;
    let b = 1.0 + DIM * r.bulk_coeff;
    let dv = eps * r.dissipation_viscous;
    if mu > 0.0 {
        let v1 = dv + mu * b / (4.0 * eps) * r.int_mu_theta;
        let v2 = dv + mu * b / (2.0 * eps) * (r.int_theta + r.int_theta_growth);
        let v3 = dv + mu * b / eps * (vol + r.int_theta_growth);
        push("viscous", 1, r.norms[1], v1);
        push("viscous", 2, v1, v2);
        push("viscous", 3, v2, v3);
        if a > 0.0 {
            let v4 = dv + mu * b / eps * (vol + (vol + r.int_radiation_energy) / a.powf(0.25 * (1.0 + alpha)));
            push("viscous", 4, v3, v4);
        }
    }
    let dh = eps * r.dissipation_heat;
    if kappa > 0.0 {
        let h1 = dh + kappa / (4.0 * eps) * r.int_kappa;
        let h2 = dh + kappa / (4.0 * eps) * (vol + r.area.powf(0.25) * r.int_theta4_34);
        push("heat", 1, r.norms[4], h1);
        push("heat", 2, h1, h2);
        if a > 0.0 {
            let h3 = dh + (kappa * vol + r.area.powf(0.25) * kappa / a.powf(0.75) * (r.duration + r.int_radiation_energy)) / (4.0 * eps);
            push("heat", 3, h2, h3);
        }
    }
    if a > 0.0 {
        push("radiation", 1, r.norms[3], r.radiation_holder);
    }
    out
}

/// Fits `c(ε)` for every term on every run, tests boundedness across the
/// schedule, and evaluates every step of the viscous, heat and radiation
/// chains.
pub fn consistency_bound_check(reports: &[ConsistencyReport], epsilon: f64) -> Result<BoundVerdict> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut terms = Vec::new();
    for i in 0..6 {
        let constants: Vec<f64> = reports
            .iter()
            .map(|r| {
                let d = if i == 1 || i == 3 || i == 4 { epsilon * r.dissipation() } else { 0.0 };
                let denom = r.energy + r.omega() * r.duration;
                if denom > 0.0 {
                    (r.norms[i] - d).max(0.0) / denom
                } else {
                    0.0
                }
            })
            .collect();
        let first = constants.first().copied().unwrap_or(0.0);
        let bounded = constants.iter().all(|&c| c <= 2.0 * first + 1e-12);
        terms.push(TermVerdict { term: i + 1, constants, bounded });
    }
    let chains = reports.iter().enumerate().flat_map(|(n, r)| chain_steps(n, r, epsilon)).collect();
    let max_identity_mismatch = reports.iter().map(|r| r.identity_mismatch).fold(0.0, f64::max);
    Ok(BoundVerdict { epsilon, terms, chains, max_identity_mismatch })
}
