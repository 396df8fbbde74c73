use serde::{Deserialize, Serialize};

use super::field::FluidField;
use super::flux::{numerical_flux, FaceState, FluxKind, Limiter};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::thermodynamics::{GasModel, ThermoState};
use crate::transport::{stress_with, TransportModel};

/// Discretization choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub flux: FluxKind,
    pub limiter: Limiter,
    pub cfl: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { flux: FluxKind::Hllc, limiter: Limiter::Unlimited, cfl: 0.4 }
    }
}

/// Dissipation coefficients of one run; the radiation coefficient lives in
/// the gas model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    pub mu: f64,
    pub kappa: f64,
}

impl Dissipation {
    pub const NONE: Dissipation = Dissipation { mu: 0.0, kappa: 0.0 };
}

/// Explicit second-order finite-volume integrator with reusable work arrays.
#[derive(Debug, Clone)]
pub struct Solver {
    gas: GasModel,
    transport: TransportModel,
    coeffs: Dissipation,
    opts: SchemeOptions,
    rhs: [Vec<f64>; 4],
    fx: Vec<[f64; 4]>,
    fy: Vec<[f64; 4]>,
    stage: Option<FluidField>,
}

impl Solver {
    pub fn new(gas: GasModel, transport: TransportModel, coeffs: Dissipation, opts: SchemeOptions) -> Result<Self> {
        if !(coeffs.mu >= 0.0 && coeffs.kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative dissipation {coeffs:?}")));
        }
        if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {}", opts.cfl)));
        }
        Ok(Self { gas, transport, coeffs, opts, rhs: Default::default(), fx: Vec::new(), fy: Vec::new(), stage: None })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn transport(&self) -> &TransportModel {
        &self.transport
    }

    pub fn coefficients(&self) -> Dissipation {
        self.coeffs
    }

    pub fn options(&self) -> SchemeOptions {
        self.opts
    }

    /// `CFL / (λ_conv + λ_diff)` with `λ_conv = max((|u|+c)/h + (|v|+c)/h)`
    /// and `λ_diff = 2dν/h²`.
    pub fn stable_dt(&self, field: &FluidField) -> f64 {
        let g = field.grid();
        let h = g.h();
        let (mut conv, mut nu) = (0.0_f64, 0.0_f64);
        let a = self.gas.radiation_coeff();
        for (i, j) in g.cells() {
            let k = g.idx(i, j);
            let state = ThermoState { rho: field.rho[k], theta: field.theta[k] };
            let c = self.gas.sound_speed(state);
            conv = conv.max((field.u[k].abs() + c) / h + (field.v[k].abs() + c) / h);
            if self.coeffs.mu > 0.0 || self.coeffs.kappa > 0.0 {
                let th = state.theta;
                let visc = self.coeffs.mu * (self.transport.shear_viscosity(th) + self.transport.bulk_viscosity(th)) / state.rho;
                let cv = if self.gas.is_ideal(state) { self.gas.inv_gm1() } else { self.gas.partials(state).e_theta }
                    + 4.0 * a * th * th * th / state.rho;
                let heat = self.coeffs.kappa * self.transport.heat_conductivity(th) / (state.rho * cv);
                nu = nu.max(visc.max(heat));
            }
        }
        let diff = 4.0 * nu / (h * h);
        self.opts.cfl / (conv + diff)
    }

    /// One SSP-RK2 step of size `dt`.
    pub fn step(&mut self, field: &mut FluidField, dt: f64) -> Result<()> {
        let dt_max = self.stable_dt(field);
        if !(dt > 0.0) || dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, dt_max });
        }
        self.step_unchecked(field, dt)
    }

    pub(crate) fn step_unchecked(&mut self, field: &mut FluidField, dt: f64) -> Result<()> {
        let mut stage = match self.stage.take() {
            Some(s) if s.grid() == field.grid() && s.boundary() == field.boundary() => s,
            _ => field.clone(),
        };
        stage.clone_from(field);
        self.evaluate_rhs(field)?;
        let g = *field.grid();
        for (i, j) in g.cells() {
            let k = g.idx(i, j);
            stage.rho[k] = field.rho[k] + dt * self.rhs[0][k];
            stage.mx[k] = field.mx[k] + dt * self.rhs[1][k];
            stage.my[k] = field.my[k] + dt * self.rhs[2][k];
            stage.energy[k] = field.energy[k] + dt * self.rhs[3][k];
        }
        let res = stage.refresh(&self.gas).and_then(|_| self.evaluate_rhs(&stage));
        if let Err(e) = res {
            self.stage = Some(stage);
            return Err(e);
        }
        for (i, j) in g.cells() {
            let k = g.idx(i, j);
            field.rho[k] = 0.5 * (field.rho[k] + stage.rho[k] + dt * self.rhs[0][k]);
            field.mx[k] = 0.5 * (field.mx[k] + stage.mx[k] + dt * self.rhs[1][k]);
            field.my[k] = 0.5 * (field.my[k] + stage.my[k] + dt * self.rhs[2][k]);
            field.energy[k] = 0.5 * (field.energy[k] + stage.energy[k] + dt * self.rhs[3][k]);
        }
        self.stage = Some(stage);
        field.refresh(&self.gas)
    }

    /// Face state reconstructed from cell `c` towards its neighbour with
    /// limited slopes of `(ρ, u_n, u_t, p)`; `sign` is `+1` for the face
    /// after the cell and `-1` for the face before it.
    #[inline]
    fn face_state(
        &self,
        f: &FluidField,
        m: usize,
        c: usize,
        p: usize,
        sign: f64,
        normal_x: bool,
        cell: (isize, isize),
    ) -> Result<FaceState> {
        let lim = self.opts.limiter;
        let recon = |q: &[f64]| q[c] + sign * 0.5 * lim.slope(q[c] - q[m], q[p] - q[c]);
        let rho = recon(&f.rho);
        let pres = recon(&f.p);
        let (un, ut) = if normal_x { (recon(&f.u), recon(&f.v)) } else { (recon(&f.v), recon(&f.u)) };
        if !(rho > 0.0 && pres > 0.0) {
            return Err(Error::PositivityFailure { i: cell.0.max(0) as usize, j: cell.1.max(0) as usize, rho, theta: f64::NAN });
        }
        let guess = f.theta[c] * (pres / f.p[c]) * (f.rho[c] / rho);
        let theta = self.gas.temperature_from_pressure(rho, pres, guess)?;
        let state = ThermoState { rho, theta };
        let energy = 0.5 * rho * (un * un + ut * ut) + rho * self.gas.total_internal_energy(state);
        Ok(FaceState { rho, un, ut, p: pres, energy, c: self.gas.sound_speed(state) })
    }

    /// Fills `self.rhs` with the semi-discrete right-hand side of `field`
    /// (primitives and ghosts must be current).
    pub(crate) fn evaluate_rhs(&mut self, f: &FluidField) -> Result<()> {
        let g = *f.grid();
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let n = g.storage_len();
        for r in self.rhs.iter_mut() {
            if r.len() != n {
                *r = vec![0.0; n];
            }
        }
        self.fx.resize(((nx + 1) * ny) as usize, [0.0; 4]);
        self.fy.resize((nx * (ny + 1)) as usize, [0.0; 4]);
        let h = g.h();
        let stride = g.stride();
        let viscous = self.coeffs.mu > 0.0 || self.coeffs.kappa > 0.0;

        for j in 0..ny {
            for i in 0..=nx {
                let (kl, kr) = (g.idx(i - 1, j), g.idx(i, j));
                let l = self.face_state(f, kl - 1, kl, kr, 1.0, true, (i - 1, j))?;
                let r = self.face_state(f, kl, kr, kr + 1, -1.0, true, (i, j))?;
                let mut flux = numerical_flux(self.opts.flux, &l, &r);
                if viscous {
                    let grad = [
                        [(f.u[kr] - f.u[kl]) / h, 0.25 * (f.u[kr + stride] - f.u[kr - stride] + f.u[kl + stride] - f.u[kl - stride]) / h],
                        [(f.v[kr] - f.v[kl]) / h, 0.25 * (f.v[kr + stride] - f.v[kr - stride] + f.v[kl + stride] - f.v[kl - stride]) / h],
                    ];
                    let uf = [0.5 * (f.u[kl] + f.u[kr]), 0.5 * (f.v[kl] + f.v[kr])];
                    let th = 0.5 * (f.theta[kl] + f.theta[kr]);
                    let dth = (f.theta[kr] - f.theta[kl]) / h;
                    let s = self.stress(th, &grad);
                    flux[1] -= s[0][0];
                    flux[2] -= s[1][0];
                    flux[3] += -(s[0][0] * uf[0] + s[0][1] * uf[1]) - self.coeffs.kappa * self.transport.heat_conductivity(th) * dth;
                }
                self.fx[(j * (nx + 1) + i) as usize] = flux;
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let (kl, kr) = (g.idx(i, j - 1), g.idx(i, j));
                let l = self.face_state(f, kl - stride, kl, kr, 1.0, false, (i, j - 1))?;
                let r = self.face_state(f, kl, kr, kr + stride, -1.0, false, (i, j))?;
                let nf = numerical_flux(self.opts.flux, &l, &r);
                // (mass, normal = y, tangential = x, energy) -> (mass, x, y, energy)
                let mut flux = [nf[0], nf[2], nf[1], nf[3]];
                if j == 0 || j == ny {
                    flux[0] = 0.0;
                    flux[1] = 0.0;
                    flux[3] = 0.0;
                }
                if viscous {
                    let grad = [
                        [0.25 * (f.u[kr + 1] - f.u[kr - 1] + f.u[kl + 1] - f.u[kl - 1]) / h, (f.u[kr] - f.u[kl]) / h],
                        [0.25 * (f.v[kr + 1] - f.v[kr - 1] + f.v[kl + 1] - f.v[kl - 1]) / h, (f.v[kr] - f.v[kl]) / h],
                    ];
                    let uf = [0.5 * (f.u[kl] + f.u[kr]), 0.5 * (f.v[kl] + f.v[kr])];
                    let th = 0.5 * (f.theta[kl] + f.theta[kr]);
                    let dth = (f.theta[kr] - f.theta[kl]) / h;
                    let s = self.stress(th, &grad);
                    flux[1] -= s[0][1];
                    flux[2] -= s[1][1];
                    flux[3] += -(s[1][0] * uf[0] + s[1][1] * uf[1]) - self.coeffs.kappa * self.transport.heat_conductivity(th) * dth;
                }
                self.fy[(j * nx + i) as usize] = flux;
            }
        }
        let inv_h = 1.0 / h;
        for j in 0..ny {
            for i in 0..nx {
                let k = g.idx(i, j);
                let w = self.fx[(j * (nx + 1) + i) as usize];
                let e = self.fx[(j * (nx + 1) + i + 1) as usize];
                let s = self.fy[(j * nx + i) as usize];
                let nn = self.fy[((j + 1) * nx + i) as usize];
                for c in 0..4 {
                    self.rhs[c][k] = -((e[c] - w[c]) + (nn[c] - s[c])) * inv_h;
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn stress(&self, theta: f64, grad: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let mu = self.coeffs.mu * self.transport.shear_viscosity(theta);
        let eta = self.coeffs.mu * self.transport.bulk_viscosity(theta);
        stress_with(mu, eta, grad)
    }
}

/// Grid-level entropy production integral
/// `∫ (1/θ)(μ S:Du − κ q·∇θ/θ)` with central differences.
pub fn entropy_production_integral(transport: &TransportModel, field: &FluidField, coeffs: Dissipation) -> f64 {
    let g = field.grid();
    let mut total = 0.0;
    for j in 0..g.ny() as isize {
        let mut row = 0.0;
        for i in 0..g.nx() as isize {
            let k = g.idx(i, j);
            let grad = field.velocity_gradient(i, j);
            let gt = field.temperature_gradient(i, j);
            row += transport.entropy_production(field.theta[k], &grad, &gt, coeffs.mu, coeffs.kappa);
        }
        total += row;
    }
    total * g.cell_area()
}

/// Discrete entropy budget of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBudget {
    /// `Σρ(s+s_R)h²` after minus before.
    pub change: f64,
    /// `dt ×` production integral at the midpoint state.
    pub production: f64,
    /// `change − production`; walls carry no entropy flux.
    pub defect: f64,
    /// `C (h² + dt²) |Ω| dt` with `C = 1`.
    pub tolerance: f64,
}

pub fn discrete_entropy_production(
    gas: &GasModel,
    transport: &TransportModel,
    before: &FluidField,
    after: &FluidField,
    dt: f64,
    coeffs: Dissipation,
) -> Result<EntropyBudget> {
    let mid = FluidField::blend(gas, before, after, 0.5)?;
    Ok(entropy_budget(gas, transport, before.total_entropy(gas), after.total_entropy(gas), &mid, dt, coeffs))
}

pub(crate) fn entropy_budget(
    _gas: &GasModel,
    transport: &TransportModel,
    s_before: f64,
    s_after: f64,
    mid: &FluidField,
    dt: f64,
    coeffs: Dissipation,
) -> EntropyBudget {
    let production = dt * entropy_production_integral(transport, mid, coeffs);
    let change = s_after - s_before;
    let h = mid.grid().h();
    EntropyBudget { change, production, defect: change - production, tolerance: scheme_tolerance(h, dt, mid.grid()) }
}

/// `C (h² + dt²) |Ω| dt`, `C = 1`.
pub fn scheme_tolerance(h: f64, dt: f64, grid: &Grid) -> f64 {
    (h * h + dt * dt) * grid.domain_area() * dt
}
