//! Channel wall geometry, the no-slip velocity corrector and the boundary
//! layer criterion functionals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::euler_reference::{fitted_order, EulerSolution};
use crate::nsf_solver::{FluidField, Grid, Monitor, StepView};
use crate::relative_energy::{TestTrio, TrioPoint};
use crate::transport::TransportModel;

/// Walls at `y = 0` and `y = 1`, periodic in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryGeometry;

impl BoundaryGeometry {
    /// Distance to the nearest wall.
    #[inline]
    pub fn distance(&self, _x: f64, y: f64) -> f64 {
        y.min(1.0 - y)
    }

    /// Nearest wall point.
    #[inline]
    pub fn projection(&self, x: f64, y: f64) -> (f64, f64) {
        if y <= 0.5 {
            (x, 0.0)
        } else {
            (x, 1.0)
        }
    }

    /// Gradient of the distance, pointing into the fluid.
    #[inline]
    pub fn distance_gradient(&self, _x: f64, y: f64) -> [f64; 2] {
        if y <= 0.5 {
            [0.0, 1.0]
        } else {
            [0.0, -1.0]
        }
    }

    /// Outer unit normal at the nearest wall point.
    #[inline]
    pub fn outer_normal(&self, x: f64, y: f64) -> [f64; 2] {
        let g = self.distance_gradient(x, y);
        [-g[0], -g[1]]
    }

    /// `(w_n, w_τ)` with `w_n = (w·∇d)∇d`.
    #[inline]
    pub fn split(&self, x: f64, y: f64, w: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let g = self.distance_gradient(x, y);
        let c = w[0] * g[0] + w[1] * g[1];
        let wn = [c * g[0], c * g[1]];
        (wn, [w[0] - wn[0], w[1] - wn[1]])
    }

    /// Fraction of the row `[jh, (j+1)h]` lying within distance `width` of a wall.
    pub fn layer_fraction(&self, grid: &Grid, j: isize, width: f64) -> f64 {
        let h = grid.h();
        let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
        let overlap = |a: f64, b: f64| (hi.min(b) - lo.max(a)).max(0.0);
        let w = width.min(0.5);
        ((overlap(0.0, w) + overlap(1.0 - w, 1.0)) / h).min(1.0)
    }
}

/// Splits the cell velocities of `field` into normal and tangential parts.
pub fn normal_tangential_split(geometry: &BoundaryGeometry, field: &FluidField) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let grid = *field.grid();
    let mut normal = Vec::with_capacity(grid.nx() * grid.ny());
    let mut tangential = Vec::with_capacity(grid.nx() * grid.ny());
    for (i, j) in grid.cells() {
        let k = grid.idx(i, j);
        let (x, y) = grid.center(i, j);
        let (wn, wt) = geometry.split(x, y, [field.u[k], field.v[k]]);
        normal.push(wn);
        tangential.push(wt);
    }
    (normal, tangential)
}

/// Reversed quintic smoothstep: 1 for `s ≤ 0`, 0 for `s ≥ 1`.
#[inline]
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

#[inline]
pub fn cutoff_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        -30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

/// Velocity, time derivative and gradient (`[i][j] = ∂v_i/∂x_j`) of the corrector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorValue {
    pub v: [f64; 2],
    pub dt_v: [f64; 2],
    pub grad_v: [[f64; 2]; 2],
}

/// `v_δ = ξ(d/δ) u_E(t, Π(x))`, matching the Euler velocity on the walls
/// and vanishing outside the layer of thickness `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrector {
    euler: EulerSolution,
    delta: f64,
    geometry: BoundaryGeometry,
}

impl Corrector {
    pub fn new(geometry: BoundaryGeometry, euler: EulerSolution, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidDelta(delta));
        }
        Ok(Self { euler, delta, geometry })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn euler(&self) -> &EulerSolution {
        &self.euler
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> CorrectorValue {
        let g = &self.geometry;
        let s = g.distance(x, y) / self.delta;
        let xi = cutoff(s);
        let dxi = cutoff_derivative(s) / self.delta;
        let grad_d = g.distance_gradient(x, y);
        let (px, py) = g.projection(x, y);
        let wall = self.euler.eval(t, px, py);
        let mut grad_v = [[0.0; 2]; 2];
        for i in 0..2 {
            // the projection depends on x only
            grad_v[i][0] = xi * wall.grad_u[i][0] + dxi * grad_d[0] * wall.u[i];
            grad_v[i][1] = dxi * grad_d[1] * wall.u[i];
        }
        CorrectorValue { v: [xi * wall.u[0], xi * wall.u[1]], dt_v: [xi * wall.dt_u[0], xi * wall.dt_u[1]], grad_v }
    }
}

/// Euler density and temperature with velocity `u_E − v_δ`; vanishes on the
/// walls and so is admissible for no-slip runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedTrio {
    pub corrector: Corrector,
}

impl TestTrio for CorrectedTrio {
    fn eval(&self, t: f64, x: f64, y: f64) -> TrioPoint {
        let mut p = self.corrector.euler.eval(t, x, y);
        let c = self.corrector.eval(t, x, y);
        for i in 0..2 {
            p.u[i] -= c.v[i];
            p.dt_u[i] -= c.dt_v[i];
            for j in 0..2 {
                p.grad_u[i][j] -= c.grad_v[i][j];
            }
        }
        p
    }
}

/// Sup-norms of the corrector over cell centers and sample times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectorEstimates {
    pub delta: f64,
    pub divergence: f64,
    /// `‖∂ₜv_δ‖ + ‖v_δ‖`.
    pub time_and_value: f64,
    pub tangential_gradient: f64,
    pub normal_gradient: f64,
    /// Largest `|(v_δ)·∇d|`.
    pub normal_component: f64,
}

pub fn corrector_estimates(corrector: &Corrector, grid: &Grid, times: &[f64]) -> CorrectorEstimates {
    let g = corrector.geometry;
    let norm = |w: [f64; 2]| w[0].hypot(w[1]);
    let mut est = CorrectorEstimates {
        delta: corrector.delta,
        divergence: 0.0,
        time_and_value: 0.0,
        tangential_gradient: 0.0,
        normal_gradient: 0.0,
        normal_component: 0.0,
    };
    let (mut sup_dt, mut sup_v) = (0.0f64, 0.0f64);
    for &t in times {
        for (i, j) in grid.cells() {
            let (x, y) = grid.center(i, j);
            let c = corrector.eval(t, x, y);
            let nd = g.distance_gradient(x, y);
            let tau = [nd[1], -nd[0]];
            let along =
                |dir: [f64; 2]| [c.grad_v[0][0] * dir[0] + c.grad_v[0][1] * dir[1], c.grad_v[1][0] * dir[0] + c.grad_v[1][1] * dir[1]];
            est.divergence = est.divergence.max((c.grad_v[0][0] + c.grad_v[1][1]).abs());
            est.tangential_gradient = est.tangential_gradient.max(norm(along(tau)));
            est.normal_gradient = est.normal_gradient.max(norm(along(nd)));
            est.normal_component = est.normal_component.max((c.v[0] * nd[0] + c.v[1] * nd[1]).abs());
            sup_dt = sup_dt.max(norm(c.dt_v));
            sup_v = sup_v.max(norm(c.v));
        }
    }
    est.time_and_value = sup_dt + sup_v;
    est
}

/// Corrector estimates across a range of layer thicknesses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectorSweep {
    pub estimates: Vec<CorrectorEstimates>,
    /// `max/min` over the sweep of the divergence, time-and-value and
    /// tangential sup-norms.
    pub ratios: [f64; 3],
    /// Fitted exponent of the normal gradient against `δ`; NaN when it vanishes.
    pub normal_exponent: f64,
}

impl CorrectorSweep {
    /// δ-independent within a factor 2 and normal gradient scaling as `1/δ`.
    pub fn passed(&self) -> bool {
        let bounded = (0..3).all(|k| {
            let vals = self.estimates.iter().map(|e| [e.divergence, e.time_and_value, e.tangential_gradient][k]);
            let (lo, hi) = vals.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi <= 2.0 * lo + 1e-12
        });
        let zero = self.estimates.iter().all(|e| e.normal_gradient == 0.0);
        bounded && (zero || (-1.2..=-0.8).contains(&self.normal_exponent))
    }
}

pub fn corrector_sweep(euler: &EulerSolution, grid: &Grid, deltas: &[f64], times: &[f64]) -> Result<CorrectorSweep> {
    let mut estimates = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let c = Corrector::new(BoundaryGeometry, *euler, d)?;
        estimates.push(corrector_estimates(&c, grid, times));
    }
    let ratio = |f: fn(&CorrectorEstimates) -> f64| {
        let (lo, hi) = estimates.iter().map(f).fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    };
    let ratios = [ratio(|e| e.divergence), ratio(|e| e.time_and_value), ratio(|e| e.tangential_gradient)];
    let pts: Vec<(f64, f64)> = estimates.iter().filter(|e| e.normal_gradient > 0.0).map(|e| (e.delta, e.normal_gradient)).collect();
    let normal_exponent = if pts.len() >= 2 { fitted_order(&pts) } else { f64::NAN };
    Ok(CorrectorSweep { estimates, ratios, normal_exponent })
}

/// Which wall-layer criterion a [`KatoMonitor`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KatoCriterion {
    /// Stress and Hardy-type weighted energy in the layer of width `μ`.
    Gradient,
    /// Layer temperature growth and normal momentum for `α < 1`.
    Conditional,
    /// Layer temperature and normal momentum in `L²` for `α = 1`.
    Alpha1,
}

/// Lebesgue exponent of the normal momentum in the conditional criterion.
pub fn momentum_exponent(alpha: f64) -> f64 {
    24.0 / (17.0 + 3.0 * alpha)
}

/// Lebesgue exponent of `θ^{(1−α)/2}` in the conditional criterion.
pub fn temperature_exponent(alpha: f64) -> f64 {
    8.0 / (1.0 - alpha)
}

/// `(Σ w |f|^q h²)^{1/q}` over layer-weighted cells.
pub fn layer_norm(grid: &Grid, weights: &[f64], values: &[f64], q: f64) -> f64 {
    let s: f64 = weights.iter().zip(values).map(|(w, v)| w * v.abs().powf(q)).sum();
    (s * grid.cell_area()).powf(1.0 / q)
}

/// Instantaneous integrands of a criterion on one field.
fn kato_rates(kind: KatoCriterion, transport: &TransportModel, mu: f64, delta: f64, field: &FluidField) -> [f64; 3] {
    let grid = *field.grid();
    let g = BoundaryGeometry;
    let area = grid.cell_area();
    let alpha = transport.alpha();
    let width = if kind == KatoCriterion::Gradient { mu } else { delta };
    let row_w: Vec<f64> = (0..grid.ny() as isize).map(|j| g.layer_fraction(&grid, j, width)).collect();
    match kind {
        KatoCriterion::Gradient => {
            let (mut stress, mut hardy) = (0.0, 0.0);
            for (i, j) in grid.cells() {
                let w = row_w[j as usize];
                if w == 0.0 {
                    continue;
                }
                let k = grid.idx(i, j);
                let (x, y) = grid.center(i, j);
                let s = transport.viscous_stress(field.theta[k], &field.velocity_gradient(i, j));
                let s2: f64 = s.iter().flatten().map(|v| v * v).sum();
                let d = g.distance(x, y);
                let (rho, u) = (field.rho[k], [field.u[k], field.v[k]]);
                let (un, _) = g.split(x, y, u);
                let un2 = un[0] * un[0] + un[1] * un[1];
                stress += w * s2;
                hardy += w * (rho * (u[0] * u[0] + u[1] * u[1]) + rho * rho * un2) / (d * d);
            }
            [mu * stress * area, mu * hardy * area, 0.0]
        }
        KatoCriterion::Conditional | KatoCriterion::Alpha1 => {
            let n = grid.nx() * grid.ny();
            let (mut weights, mut momentum, mut theta) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            let mut growth = 0.0;
            let power = if kind == KatoCriterion::Alpha1 { 2.0 } else { 1.0 + alpha };
            for (i, j) in grid.cells() {
                let w = row_w[j as usize];
                if w == 0.0 {
                    continue;
                }
                let k = grid.idx(i, j);
                let (x, y) = grid.center(i, j);
                let (un, _) = g.split(x, y, [field.u[k], field.v[k]]);
                weights.push(w);
                momentum.push(field.rho[k] * un[0].hypot(un[1]));
                theta.push(field.theta[k]);
                growth += w * field.theta[k].powf(power);
            }
            let second = growth * area / delta;
            if kind == KatoCriterion::Alpha1 {
                let m = layer_norm(&grid, &weights, &momentum, 2.0);
                [mu / delta, second, m * m / mu]
            } else {
                let m = layer_norm(&grid, &weights, &momentum, momentum_exponent(alpha));
                // ‖θ^{(1−α)/2}‖²_{L^{8/(1−α)}} = ‖θ‖_{L⁴}^{1−α}
                let t4 = layer_norm(&grid, &weights, &theta, 4.0);
                let third = m / delta + m * m * t4.powf(1.0 - alpha) / (delta * delta * mu);
                [mu / delta, second, third]
            }
        }
    }
}

/// Criterion values accumulated over a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KatoReport {
    pub criterion: KatoCriterion,
    pub mu: f64,
    pub delta: f64,
    pub duration: f64,
    /// Two values for the gradient criterion, three otherwise.
    pub values: Vec<f64>,
}

/// Midpoint-in-time accumulation of a wall-layer criterion.
#[derive(Debug, Clone)]
pub struct KatoMonitor {
    transport: TransportModel,
    report: KatoReport,
}

impl KatoMonitor {
    /// Fails with [`Error::UnresolvedLayer`] when the layer spans fewer than
    /// two (gradient) or four (others) cells.
    pub fn new(kind: KatoCriterion, transport: TransportModel, mu: f64, delta: f64, grid: &Grid) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        let h = grid.h();
        let (width, cells) = match kind {
            KatoCriterion::Gradient => (mu, 2.0),
            _ => (delta, 4.0),
        };
        if kind != KatoCriterion::Gradient && !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidDelta(delta));
        }
        if kind == KatoCriterion::Conditional && !(transport.alpha() < 1.0) {
            return Err(Error::InvalidParameter("conditional criterion needs alpha < 1".into()));
        }
        if width < cells * h {
            return Err(Error::UnresolvedLayer { width, cells, h });
        }
        let n = if kind == KatoCriterion::Gradient { 2 } else { 3 };
        let mut values = vec![0.0; n];
        if n == 3 {
            values[0] = mu / delta;
        }
        Ok(Self { transport, report: KatoReport { criterion: kind, mu, delta, duration: 0.0, values } })
    }

    pub fn report(&self) -> &KatoReport {
        &self.report
    }

    pub fn into_report(self) -> KatoReport {
        self.report
    }

    /// Adds `dt` times the integrands on `field`.
    pub fn accumulate(&mut self, field: &FluidField, dt: f64) {
        let r = &mut self.report;
        let rates = kato_rates(r.criterion, &self.transport, r.mu, r.delta, field);
        r.duration += dt;
        let first = if r.values.len() == 3 { 1 } else { 0 };
        for k in first..r.values.len() {
            r.values[k] += dt * rates[k];
        }
    }
}

impl Monitor for KatoMonitor {
    fn step(&mut self, view: &StepView<'_>) -> Result<()> {
        self.accumulate(view.mid, view.dt());
        Ok(())
    }
}

fn from_history(kind: KatoCriterion, transport: &TransportModel, mu: f64, delta: f64, history: &[(f64, FluidField)]) -> Result<KatoReport> {
    let Some((_, first)) = history.first() else {
        return Err(Error::InvalidParameter("empty history".into()));
    };
    let mut m = KatoMonitor::new(kind, *transport, mu, delta, first.grid())?;
    for w in history.windows(2) {
        let dt = w[1].0 - w[0].0;
        m.accumulate(&w[0].1, 0.5 * dt);
        m.accumulate(&w[1].1, 0.5 * dt);
    }
    Ok(m.into_report())
}

/// Trapezoidal evaluation of the gradient criterion over snapshots.
pub fn kato_gradient_criterion(transport: &TransportModel, mu: f64, history: &[(f64, FluidField)]) -> Result<KatoReport> {
    from_history(KatoCriterion::Gradient, transport, mu, 0.25, history)
}

/// Trapezoidal evaluation of the conditional criterion over snapshots.
pub fn kato_conditional_criterion(transport: &TransportModel, mu: f64, delta: f64, history: &[(f64, FluidField)]) -> Result<KatoReport> {
    from_history(KatoCriterion::Conditional, transport, mu, delta, history)
}

/// Trapezoidal evaluation of the `α = 1` criterion over snapshots.
pub fn kato_alpha1_criterion(transport: &TransportModel, mu: f64, delta: f64, history: &[(f64, FluidField)]) -> Result<KatoReport> {
    from_history(KatoCriterion::Alpha1, transport, mu, delta, history)
}
