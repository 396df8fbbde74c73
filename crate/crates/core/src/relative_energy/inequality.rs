use serde::Serialize;

use super::{augmented_relative_energy, TestTrio, TrioPoint};
use crate::error::Result;
use crate::nsf_solver::{Dissipation, FluidField, Monitor, StepView};
use crate::thermodynamics::{GasModel, ThermoState};
use crate::transport::TransportModel;

/// The eight space-time integrals on the right of the relative energy
/// inequality, accumulated up to a sample time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RhsTerms {
    /// `ρ(u−U)·∇U·(U−u)`.
    pub convective: f64,
    /// `μ S:∇U`.
    pub viscous: f64,
    /// `−κ (q/θ)·∇Θ`.
    pub heat: f64,
    /// `ρ(s_tot − s_tot(r,Θ))(U−u)·∇Θ`.
    pub entropy_flux: f64,
    /// `ρ(∂ₜU + U·∇U)·(U−u)`.
    pub acceleration: f64,
    /// `−p_tot div U`.
    pub pressure: f64,
    /// `−ρ(s_tot − s_tot(r,Θ))(∂ₜΘ + U·∇Θ)`.
    pub entropy_transport: f64,
    /// `(1 − ρ/r)∂ₜp_tot(r,Θ) − (ρ/r)u·∇p_tot(r,Θ)`.
    pub pressure_work: f64,
}

impl RhsTerms {
    fn as_array(&self) -> [f64; 8] {
        [
            self.convective,
            self.viscous,
            self.heat,
            self.entropy_flux,
            self.acceleration,
            self.pressure,
            self.entropy_transport,
            self.pressure_work,
        ]
    }

    fn add_scaled(&mut self, w: f64, o: &[f64; 8]) {
        self.convective += w * o[0];
        self.viscous += w * o[1];
        self.heat += w * o[2];
        self.entropy_flux += w * o[3];
        self.acceleration += w * o[4];
        self.pressure += w * o[5];
        self.entropy_transport += w * o[6];
        self.pressure_work += w * o[7];
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// Both sides of the inequality at one sample time `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub t: f64,
    /// `∫E_a(τ)`.
    pub rel_energy: f64,
    /// Accumulated `∫∫(Θ/θ)(μS:∇u − κq·∇θ/θ)`.
    pub dissipation: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub gap: f64,
    pub terms: RhsTerms,
    /// Sum of the magnitudes of all contributions, for roundoff floors.
    pub scale: f64,
}

/// `∫E_a(field | trio(t))` with cell quadrature.
pub fn relative_energy_integral<T: TestTrio + ?Sized>(gas: &GasModel, field: &FluidField, trio: &T, t: f64) -> f64 {
    let g = *field.grid();
    let mut acc = 0.0;
    for (i, j) in g.cells() {
        let k = g.idx(i, j);
        let (x, y) = g.center(i, j);
        let base = trio.eval(t, x, y).base();
        let state = ThermoState { rho: field.rho[k], theta: field.theta[k] };
        acc += augmented_relative_energy(gas, state, [field.u[k], field.v[k]], &base);
    }
    acc * g.cell_area()
}

/// Evaluates the relative energy inequality along a run: time integrals by
/// midpoint quadrature on solver steps, space integrals by cell quadrature.
pub struct InequalityMonitor<T: TestTrio> {
    gas: GasModel,
    transport: TransportModel,
    coeffs: Dissipation,
    trio: T,
    initial: f64,
    dissipation: f64,
    terms: RhsTerms,
    scale: f64,
    samples: Vec<GapSample>,
}

impl<T: TestTrio> InequalityMonitor<T> {
    pub fn new(gas: GasModel, transport: TransportModel, coeffs: Dissipation, trio: T) -> Self {
        Self { gas, transport, coeffs, trio, initial: 0.0, dissipation: 0.0, terms: RhsTerms::default(), scale: 0.0, samples: Vec::new() }
    }

    pub fn samples(&self) -> &[GapSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<GapSample> {
        self.samples
    }

    /// `sup_τ ∫E_a` over the sample times.
    pub fn sup_relative_energy(&self) -> f64 {
        self.samples.iter().map(|s| s.rel_energy).fold(0.0, f64::max)
    }

    /// Local integrands (dissipation, eight right-hand side terms).
    fn integrands(&self, field: &FluidField, i: isize, j: isize, k: usize, tp: &TrioPoint) -> (f64, [f64; 8]) {
        let gas = &self.gas;
        let (mu, kappa) = (self.coeffs.mu, self.coeffs.kappa);
        let rho = field.rho[k];
        let th = field.theta[k];
        let u = [field.u[k], field.v[k]];
        let gu = field.velocity_gradient(i, j);
        let gth = field.temperature_gradient(i, j);
        let w = [u[0] - tp.u[0], u[1] - tp.u[1]];
        let grad_big_u = &tp.grad_u;

        let diss = tp.theta * self.transport.entropy_production(th, &gu, &gth, mu, kappa);

        let mut wgw = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                wgw += w[p] * grad_big_u[p][q] * w[q];
            }
        }
        let stress = self.transport.viscous_stress(th, &gu);
        let mut stress_work = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                stress_work += stress[p][q] * grad_big_u[p][q];
            }
        }
        let kap = self.transport.heat_conductivity(th);
        let state = ThermoState { rho, theta: th };
        let base = ThermoState { rho: tp.r, theta: tp.theta };
        let ds = gas.total_entropy(state) - gas.total_entropy(base);
        let w_gth = -(w[0] * tp.grad_theta[0] + w[1] * tp.grad_theta[1]);
        let accel = [
            tp.dt_u[0] + tp.u[0] * grad_big_u[0][0] + tp.u[1] * grad_big_u[0][1],
            tp.dt_u[1] + tp.u[0] * grad_big_u[1][0] + tp.u[1] * grad_big_u[1][1],
        ];
        let div_u = grad_big_u[0][0] + grad_big_u[1][1];
        let d = gas.partials(base);
        let a = gas.radiation_coeff();
        let pt_theta = d.p_theta + 4.0 * a * tp.theta.powi(3) / 3.0;
        let dt_p = d.p_rho * tp.dt_r + pt_theta * tp.dt_theta;
        let grad_p = [d.p_rho * tp.grad_r[0] + pt_theta * tp.grad_theta[0], d.p_rho * tp.grad_r[1] + pt_theta * tp.grad_theta[1]];
        let ratio = rho / tp.r;
        let terms = [
            -rho * wgw,
            mu * stress_work,
            kappa * kap * (gth[0] * tp.grad_theta[0] + gth[1] * tp.grad_theta[1]) / th,
            rho * ds * w_gth,
            -rho * (accel[0] * w[0] + accel[1] * w[1]),
            -gas.total_pressure(state) * div_u,
            -rho * ds * (tp.dt_theta + tp.u[0] * tp.grad_theta[0] + tp.u[1] * tp.grad_theta[1]),
            (1.0 - ratio) * dt_p - ratio * (u[0] * grad_p[0] + u[1] * grad_p[1]),
        ];
        (diss, terms)
    }
}

impl<T: TestTrio> Monitor for InequalityMonitor<T> {
    fn start(&mut self, t: f64, field: &FluidField) -> Result<()> {
        self.initial = relative_energy_integral(&self.gas, field, &self.trio, t);
        self.dissipation = 0.0;
        self.terms = RhsTerms::default();
        self.scale = self.initial.abs();
        self.samples.clear();
        Ok(())
    }

    fn step(&mut self, view: &StepView<'_>) -> Result<()> {
        let f = view.mid;
        let g = *f.grid();
        let tm = view.t_mid();
        let w = view.dt() * g.cell_area();
        let mut diss = 0.0;
        let mut sums = [0.0; 8];
        let mut mags = 0.0;
        for (i, j) in g.cells() {
            let k = g.idx(i, j);
            let (x, y) = g.center(i, j);
            let tp = self.trio.eval(tm, x, y);
            let (d, terms) = self.integrands(f, i, j, k, &tp);
            diss += d;
            mags += d.abs();
            for (s, v) in sums.iter_mut().zip(terms) {
                *s += v;
                mags += v.abs();
            }
        }
        self.dissipation += w * diss;
        self.terms.add_scaled(w, &sums);
        self.scale += w * mags;
        Ok(())
    }

    fn sample(&mut self, t: f64, field: &FluidField) -> Result<()> {
        let e = relative_energy_integral(&self.gas, field, &self.trio, t);
        let lhs = e - self.initial + self.dissipation;
        let rhs = self.terms.sum();
        self.samples.push(GapSample {
            t,
            rel_energy: e,
            dissipation: self.dissipation,
            lhs,
            rhs,
            gap: rhs - lhs,
            terms: self.terms,
            scale: self.scale + e.abs(),
        });
        Ok(())
    }
}

/// Per-sample tolerance `|gap_h − gap_2h| + 1e-10·scale + 1e-14` from a run
/// and its coarse companion on the same sample times.
pub fn two_grid_tolerance(fine: &[GapSample], coarse: &[GapSample]) -> Vec<f64> {
    fine.iter()
        .map(|f| {
            let floor = 1e-10 * f.scale + 1e-14;
            match coarse.iter().find(|c| (c.t - f.t).abs() <= 1e-12 * f.t.abs().max(1.0)) {
                Some(c) => (f.gap - c.gap).abs() + floor,
                None => floor,
            }
        })
        .collect()
}
