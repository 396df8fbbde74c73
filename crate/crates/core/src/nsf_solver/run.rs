use serde::Serialize;

use super::field::FluidField;
use super::scheme::{entropy_budget, Solver};
use crate::error::{Error, Result};

/// Time horizon and output times of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_final: f64,
    /// Increasing times in `(0, t_final]` at which the run lands exactly and
    /// notifies monitors; `t_final` is always included.
    pub sample_times: Vec<f64>,
    pub max_steps: usize,
    pub keep_snapshots: bool,
}

impl RunConfig {
    /// `samples` equally spaced output times ending at `t_final`.
    pub fn uniform(t_final: f64, samples: usize) -> Self {
        let n = samples.max(1);
        Self {
            t_final,
            sample_times: (1..=n).map(|k| t_final * k as f64 / n as f64).collect(),
            max_steps: 10_000_000,
            keep_snapshots: false,
        }
    }
}

/// Consecutive solver states handed to monitors after every step. `mid` is
/// the conservative average of `before` and `after` at `t_mid`.
pub struct StepView<'a> {
    pub t0: f64,
    pub t1: f64,
    pub before: &'a FluidField,
    pub after: &'a FluidField,
    pub mid: &'a FluidField,
}

impl StepView<'_> {
    pub fn dt(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn t_mid(&self) -> f64 {
        0.5 * (self.t0 + self.t1)
    }
}

/// Online diagnostic fed by [`run`].
pub trait Monitor {
    fn start(&mut self, _t: f64, _field: &FluidField) -> Result<()> {
        Ok(())
    }
    fn step(&mut self, _view: &StepView<'_>) -> Result<()> {
        Ok(())
    }
    fn sample(&mut self, _t: f64, _field: &FluidField) -> Result<()> {
        Ok(())
    }
}

/// Built-in monitor values at a sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasicSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    pub min_rho: f64,
    pub min_theta: f64,
}

/// Built-in monitor series and per-step extrema.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BasicSeries {
    pub samples: Vec<BasicSample>,
    /// Largest `|Δ mass|` of any single step.
    pub max_step_mass_change: f64,
    /// Smallest `defect / tolerance` of the entropy budget over all steps.
    pub min_entropy_margin: f64,
    /// Sum of negative entropy-budget defects.
    pub negative_defect_total: f64,
    /// Number of steps whose defect fell below `−tolerance`.
    pub entropy_violations: usize,
}

impl BasicSeries {
    /// `max |E(t) − E(0)| / |E(0)|` over samples.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        self.samples.iter().map(|s| (s.energy - first.energy).abs()).fold(0.0, f64::max) / first.energy.abs()
    }

    /// `max |M(t) − M(0)| / M(0)` over samples.
    pub fn mass_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        self.samples.iter().map(|s| (s.mass - first.mass).abs()).fold(0.0, f64::max) / first.mass.abs()
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub field: FluidField,
    pub time: f64,
    pub steps: usize,
    pub basic: BasicSeries,
    pub snapshots: Vec<(f64, FluidField)>,
    /// Set when a step failed; monitors hold the partial history.
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Advances `field` to `cfg.t_final`, landing exactly on every sample time.
pub fn run(solver: &mut Solver, field: FluidField, cfg: &RunConfig, monitors: &mut [&mut dyn Monitor]) -> Result<RunOutcome> {
    if !(cfg.t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_final must be non-negative, got {}", cfg.t_final)));
    }
    let mut times: Vec<f64> = cfg.sample_times.iter().copied().filter(|&t| t > 0.0 && t < cfg.t_final).collect();
    if cfg.t_final > 0.0 {
        times.push(cfg.t_final);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("sample times must increase".into()));
    }
    let gas = *solver.gas();
    let transport = *solver.transport();
    let coeffs = solver.coefficients();

    let mut basic = BasicSeries { min_entropy_margin: f64::INFINITY, ..Default::default() };
    let mut snapshots = Vec::new();
    let mut t = 0.0;
    let mut cur = field;
    let mut entropy = cur.total_entropy(&gas);
    let record = |t: f64, f: &FluidField, entropy: f64| BasicSample {
        t,
        mass: f.total_mass(),
        energy: f.total_energy(),
        entropy,
        min_rho: f.min_density(),
        min_theta: f.min_temperature(),
    };
    basic.samples.push(record(0.0, &cur, entropy));
    for m in monitors.iter_mut() {
        m.start(0.0, &cur)?;
        m.sample(0.0, &cur)?;
    }
    if cfg.keep_snapshots {
        snapshots.push((0.0, cur.clone()));
    }
    let mut steps = 0;
    let mut failure = None;
    let mut prev = cur.clone();
    let mut mid = cur.clone();
    'outer: for &target in &times {
        while t < target {
            if steps >= cfg.max_steps {
                failure = Some(Error::InvalidParameter(format!("step budget {} exhausted at t = {t}", cfg.max_steps)));
                break 'outer;
            }
            let dt_stable = solver.stable_dt(&cur);
            let remaining = target - t;
            let (dt, land) = if dt_stable >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else if dt_stable > 0.5 * remaining {
                // two even steps avoid a sliver
                (0.5 * remaining, false)
            } else {
                (dt_stable, false)
            };
            prev.clone_from(&cur);
            if let Err(e) = solver.step_unchecked(&mut cur, dt) {
                failure = Some(e);
                cur.clone_from(&prev);
                break 'outer;
            }
            let t1 = if land { target } else { t + dt };
            steps += 1;
            if let Err(e) = mid.blend_from(&gas, &prev, &cur, 0.5) {
                failure = Some(e);
                break 'outer;
            }
            let new_entropy = cur.total_entropy(&gas);
            let budget = entropy_budget(&gas, &transport, entropy, new_entropy, &mid, t1 - t, coeffs);
            entropy = new_entropy;
            let margin = budget.defect / budget.tolerance;
            basic.min_entropy_margin = basic.min_entropy_margin.min(margin);
            if budget.defect < 0.0 {
                basic.negative_defect_total += budget.defect;
            }
            if margin < -1.0 {
                basic.entropy_violations += 1;
            }
            basic.max_step_mass_change = basic.max_step_mass_change.max((cur.total_mass() - prev.total_mass()).abs());
            let view = StepView { t0: t, t1, before: &prev, after: &cur, mid: &mid };
            for m in monitors.iter_mut() {
                m.step(&view)?;
            }
            t = t1;
        }
        basic.samples.push(record(t, &cur, entropy));
        for m in monitors.iter_mut() {
            m.sample(t, &cur)?;
        }
        if cfg.keep_snapshots {
            snapshots.push((t, cur.clone()));
        }
    }
    if failure.is_some() {
        log::warn!("run stopped at t = {t} after {steps} steps: {:?}", failure);
    }
    Ok(RunOutcome { field: cur, time: t, steps, basic, snapshots, failure })
}
