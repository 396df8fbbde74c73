//! Vanishing-dissipation schedules, experiment orchestration, convergence
//! verdicts and persistence.

mod report;
mod suites;

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundary_layer::{
    corrector_sweep, BoundaryGeometry, CorrectedTrio, Corrector, CorrectorSweep, KatoCriterion, KatoMonitor, KatoReport,
};
use crate::error::{Error, Result};
use crate::euler_reference::{l1_errors, CosineProfile, EulerSolution, FamilyKind};
use crate::nsf_solver::{
    run, BasicSeries, BoundaryKind, Dissipation, FluidField, Grid, Monitor, Primitive, RunConfig, SchemeOptions, Solver, StepView,
};
use crate::relative_energy::{two_grid_tolerance, ConsistencyMonitor, ConsistencyReport, GapSample, InequalityMonitor, TestTrio};
use crate::thermodynamics::GasModel;
use crate::transport::TransportModel;

pub use crate::euler_reference::fitted_order;
pub use report::{
    convergence_assert, decay_verdict, persist, read_summary, summary_rows, ConvergenceVerdict, DecayVerdict, SummaryRow, TimeSeriesRow,
};
pub use suites::{eos_suite, EosBranchReport, EosSuiteReport};

/// Coefficients of one level of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleLevel {
    pub n: usize,
    pub mu: f64,
    /// Radiation coefficient `μ^{4/(1+α)}`.
    pub a: f64,
    /// Heat conductivity `a^{3/4} σ`.
    pub kappa: f64,
    /// Slack `σ = μ^{slack exponent}`.
    pub sigma: f64,
    /// Corrector thickness `μ^{delta exponent}`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationSchedule {
    pub mu0: f64,
    pub alpha: f64,
    pub levels: Vec<ScheduleLevel>,
}

/// Schedule with slack and corrector thickness both `μ_n^{1/2}`.
pub fn build_schedule(mu0: f64, alpha: f64, levels: usize) -> Result<DissipationSchedule> {
    DissipationSchedule::with_exponents(mu0, alpha, levels, 0.5, 0.5)
}

impl DissipationSchedule {
    pub fn with_exponents(mu0: f64, alpha: f64, levels: usize, slack_exponent: f64, delta_exponent: f64) -> Result<Self> {
        if !(mu0 > 0.0 && mu0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("mu0 must lie in (0, 1], got {mu0}")));
        }
        if !((1.0 / 3.0 - 1e-12..=1.0).contains(&alpha)) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [1/3, 1], got {alpha}")));
        }
        if levels == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one level".into()));
        }
        if !(slack_exponent > 0.0 && delta_exponent > 0.0 && delta_exponent < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "slack exponent {slack_exponent} must be positive and delta exponent {delta_exponent} in (0, 1)"
            )));
        }
        let levels = (0..levels)
            .map(|n| {
                let mu = mu0 * 0.5f64.powi(n as i32);
                let a = mu.powf(4.0 / (1.0 + alpha));
                let sigma = mu.powf(slack_exponent);
                ScheduleLevel { n, mu, a, kappa: a.powf(0.75) * sigma, sigma, delta: mu.powf(delta_exponent) }
            })
            .collect();
        Ok(Self { mu0, alpha, levels })
    }
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub p0: f64,
    pub family: FamilyKind,
    /// Speed of the traveling family.
    pub speed: f64,
    pub amplitude: f64,
    pub wavenumber: u32,
    pub alpha: f64,
    pub bulk_coeff: f64,
    pub mu0: f64,
    pub levels: usize,
    pub grid: [usize; 2],
    pub bc: BoundaryKind,
    pub t_final: f64,
    /// Equally spaced output times per run.
    pub samples: usize,
    pub slack_exponent: f64,
    pub delta_exponent: f64,
    /// Relative density perturbation of the initial data, scaled by `μ_n^{1/2}`.
    pub perturbation: f64,
    /// Companion run on the half-resolution grid for gap tolerances.
    pub two_grid: bool,
    /// Rerun of the last level on the doubled grid.
    pub fine_check: bool,
    pub scheme: SchemeOptions,
    /// Suppresses wall-clock fields in the outputs.
    pub deterministic: bool,
    /// Largest admissible last/first ratio of `sup ∫E_a`.
    pub ratio_threshold: f64,
    pub max_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            p0: 1.0,
            family: FamilyKind::Stationary,
            speed: 0.25,
            amplitude: 0.2,
            wavenumber: 1,
            alpha: 1.0,
            bulk_coeff: 0.0,
            mu0: 0.1,
            levels: 5,
            grid: [128, 64],
            bc: BoundaryKind::Slip,
            t_final: 0.5,
            samples: 10,
            slack_exponent: 0.5,
            delta_exponent: 0.5,
            perturbation: 0.0,
            two_grid: true,
            fine_check: false,
            scheme: SchemeOptions::default(),
            deterministic: false,
            ratio_threshold: 0.25,
            max_steps: 10_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn euler(&self) -> Result<EulerSolution> {
        let profile = CosineProfile::new(self.amplitude, self.wavenumber)?;
        match self.family {
            FamilyKind::Stationary => EulerSolution::stationary(self.gamma, self.p0, profile),
            FamilyKind::Traveling => EulerSolution::traveling(self.gamma, self.p0, self.speed, profile),
        }
    }

    pub fn schedule(&self) -> Result<DissipationSchedule> {
        DissipationSchedule::with_exponents(self.mu0, self.alpha, self.levels, self.slack_exponent, self.delta_exponent)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::channel(self.grid[0], self.grid[1])
    }

    pub fn transport(&self) -> Result<TransportModel> {
        TransportModel::new(self.alpha)?.with_bulk_viscosity(self.bulk_coeff)
    }

    /// Criterion reported for this boundary condition.
    pub fn kato_criterion(&self) -> KatoCriterion {
        match self.bc {
            BoundaryKind::Slip => KatoCriterion::Gradient,
            BoundaryKind::NoSlip if self.alpha >= 1.0 => KatoCriterion::Alpha1,
            BoundaryKind::NoSlip => KatoCriterion::Conditional,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.euler()?;
        self.schedule()?;
        self.grid()?;
        self.transport()?;
        if !(self.t_final > 0.0) || self.samples == 0 {
            return Err(Error::InvalidParameter(format!("need t_final > 0 and samples > 0, got {} and {}", self.t_final, self.samples)));
        }
        if !(self.perturbation.abs() < 0.5) {
            return Err(Error::InvalidParameter(format!("perturbation {} too large", self.perturbation)));
        }
        Ok(())
    }
}

/// Criterion values of one level, or the reason they are missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KatoOutcome {
    pub criterion: KatoCriterion,
    pub report: Option<KatoReport>,
    pub note: Option<String>,
}

/// Diagnostics of one level of the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: ScheduleLevel,
    /// `sup_τ ∫E_a` over the sample times.
    pub sup_rel_energy: f64,
    pub final_rel_energy: f64,
    /// Time integrals of the L¹ distances of `(ρ, ρe, ρu)` to the Euler fields.
    pub l1_errors: [f64; 3],
    pub consistency: ConsistencyReport,
    pub gaps: Vec<GapSample>,
    /// Per-sample gap tolerances; the floor alone without a companion run.
    pub tolerances: Vec<f64>,
    pub kato: KatoOutcome,
    pub basic: BasicSeries,
    pub steps: usize,
    pub wall_seconds: f64,
    pub failure: Option<String>,
}

impl LevelReport {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Samples with `gap < −tolerance`.
    pub fn gap_violations(&self) -> usize {
        self.gaps.iter().zip(&self.tolerances).filter(|(g, tol)| g.gap < -**tol).count()
    }

    /// `min (gap + tolerance)` over samples.
    pub fn min_gap_excess(&self) -> f64 {
        self.gaps.iter().zip(&self.tolerances).map(|(g, tol)| g.gap + tol).fold(f64::INFINITY, f64::min)
    }
}

/// Last level rerun on the doubled grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FineCheck {
    pub grid: [usize; 2],
    pub n: usize,
    pub base_sup_rel_energy: f64,
    pub fine_sup_rel_energy: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub schedule: DissipationSchedule,
    pub levels: Vec<LevelReport>,
    /// δ-sweep of the corrector estimates (no-slip only).
    pub corrector: Option<CorrectorSweep>,
    pub fine_check: Option<FineCheck>,
}

impl ExperimentReport {
    pub fn any_failure(&self) -> bool {
        self.levels.iter().any(|l| !l.succeeded())
    }
}

/// Time integral of the L¹ distances to the Euler fields.
struct L1Monitor {
    gas: GasModel,
    euler: EulerSolution,
    acc: [f64; 3],
}

impl Monitor for L1Monitor {
    fn step(&mut self, view: &StepView<'_>) -> Result<()> {
        let e = l1_errors(&self.gas, view.mid, &self.euler, view.t_mid());
        for (a, v) in self.acc.iter_mut().zip(e) {
            *a += view.dt() * v;
        }
        Ok(())
    }
}

struct Level<'a> {
    cfg: &'a ExperimentConfig,
    euler: EulerSolution,
    gas: GasModel,
    transport: TransportModel,
    coeffs: Dissipation,
    level: ScheduleLevel,
}

struct LevelRun {
    gaps: Vec<GapSample>,
    consistency: Option<ConsistencyReport>,
    l1: [f64; 3],
    kato: Option<KatoReport>,
    basic: BasicSeries,
    steps: usize,
    failure: Option<String>,
}

impl Level<'_> {
    fn new<'a>(cfg: &'a ExperimentConfig, euler: EulerSolution, level: ScheduleLevel) -> Result<Level<'a>> {
        let gas = euler.gas_model()?.with_radiation(level.a)?;
        Ok(Level { cfg, euler, gas, transport: cfg.transport()?, coeffs: Dissipation { mu: level.mu, kappa: level.kappa }, level })
    }

    fn initial_field(&self, grid: Grid) -> Result<FluidField> {
        let eps = self.cfg.perturbation * self.level.mu.sqrt();
        let lx = grid.lx();
        let euler = self.euler;
        FluidField::initialize(&self.gas, grid, self.cfg.bc, move |x, y| {
            let p = euler.primitive(0.0, x, y);
            let s = (PI * y).sin();
            Primitive { rho: p.rho * (1.0 + eps * (2.0 * PI * x / lx).sin() * s * s), ..p }
        })
    }

    /// One NSF run; `full` adds consistency, L¹ and criterion monitors.
    fn run<T: TestTrio>(&self, grid: Grid, trio: T, full: bool) -> Result<LevelRun> {
        let mut solver = Solver::new(self.gas, self.transport, self.coeffs, self.cfg.scheme)?;
        let field = self.initial_field(grid)?;
        let mut rc = RunConfig::uniform(self.cfg.t_final, self.cfg.samples);
        rc.max_steps = self.cfg.max_steps;
        let mut ineq = InequalityMonitor::new(self.gas, self.transport, self.coeffs, trio);
        let mut cons = ConsistencyMonitor::new(self.gas, self.transport, self.coeffs);
        let mut l1 = L1Monitor { gas: self.gas, euler: self.euler, acc: [0.0; 3] };
        let mut kato = match full {
            true => Some(KatoMonitor::new(self.cfg.kato_criterion(), self.transport, self.level.mu, self.level.delta, &grid)),
            false => None,
        };
        let result = {
            let mut monitors: Vec<&mut dyn Monitor> = vec![&mut ineq];
            if full {
                monitors.push(&mut cons);
                monitors.push(&mut l1);
            }
            if let Some(Ok(k)) = kato.as_mut() {
                monitors.push(k);
            }
            run(&mut solver, field, &rc, &mut monitors)
        };
        let (basic, steps, failure) = match result {
            Ok(out) => (out.basic, out.steps, out.failure.map(|e| e.to_string())),
            Err(e) => (BasicSeries::default(), 0, Some(e.to_string())),
        };
        Ok(LevelRun {
            gaps: ineq.into_samples(),
            consistency: full.then(|| cons.into_report()),
            l1: l1.acc,
            kato: match kato {
                Some(Ok(k)) => Some(k.into_report()),
                _ => None,
            },
            basic,
            steps,
            failure,
        })
    }

    fn run_with_trio(&self, grid: Grid, full: bool) -> Result<LevelRun> {
        match self.cfg.bc {
            BoundaryKind::Slip => self.run(grid, self.euler, full),
            BoundaryKind::NoSlip => {
                let corrector = Corrector::new(BoundaryGeometry, self.euler, self.level.delta)?;
                self.run(grid, CorrectedTrio { corrector }, full)
            }
        }
    }

    fn kato_note(&self, grid: &Grid) -> Option<String> {
        KatoMonitor::new(self.cfg.kato_criterion(), self.transport, self.level.mu, self.level.delta, grid).err().map(|e| e.to_string())
    }
}

fn sup_energy(gaps: &[GapSample]) -> f64 {
    gaps.iter().map(|g| g.rel_energy).fold(0.0, f64::max)
}

/// Runs every level of the schedule; solver failures mark the level and
/// the schedule continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let euler = cfg.euler()?;
    let schedule = cfg.schedule()?;
    let grid = cfg.grid()?;
    let corrector = match cfg.bc {
        BoundaryKind::NoSlip => Some(corrector_sweep(&euler, &grid, &[0.2, 0.1, 0.05], &[0.0, cfg.t_final])?),
        BoundaryKind::Slip => None,
    };
    let mut levels = Vec::with_capacity(schedule.levels.len());
    for &lv in &schedule.levels {
        let start = Instant::now();
        let level = Level::new(cfg, euler, lv)?;
        log::info!("level {}: mu={:.4e} kappa={:.4e} a={:.4e} delta={:.4e}", lv.n, lv.mu, lv.kappa, lv.a, lv.delta);
        let main = level.run_with_trio(grid, true)?;
        let coarse = match (cfg.two_grid, grid.coarsened()) {
            (true, Ok(g)) => Some(level.run_with_trio(g, false)?),
            _ => None,
        };
        let tolerances = match &coarse {
            Some(c) if c.failure.is_none() => two_grid_tolerance(&main.gaps, &c.gaps),
            _ => two_grid_tolerance(&main.gaps, &[]),
        };
        let kato_note = if main.kato.is_none() { level.kato_note(&grid) } else { None };
        let wall_seconds = if cfg.deterministic { 0.0 } else { start.elapsed().as_secs_f64() };
        let report = LevelReport {
            level: lv,
            sup_rel_energy: sup_energy(&main.gaps),
            final_rel_energy: main.gaps.last().map_or(f64::NAN, |g| g.rel_energy),
            l1_errors: main.l1,
            consistency: main.consistency.unwrap_or_default(),
            tolerances,
            kato: KatoOutcome { criterion: cfg.kato_criterion(), report: main.kato, note: kato_note },
            gaps: main.gaps,
            basic: main.basic,
            steps: main.steps,
            wall_seconds,
            failure: main.failure,
        };
        log::info!(
            "level {}: sup E_a = {:.6e}, steps = {}, gap violations = {}{}",
            lv.n,
            report.sup_rel_energy,
            report.steps,
            report.gap_violations(),
            report.failure.as_deref().map(|f| format!(", failed: {f}")).unwrap_or_default()
        );
        levels.push(report);
    }
    let fine_check = if cfg.fine_check {
        match levels.iter().rev().find(|l| l.succeeded()) {
            Some(last) => {
                let fine = grid.refined();
                let level = Level::new(cfg, euler, last.level)?;
                let run = level.run_with_trio(fine, false)?;
                match run.failure {
                    Some(f) => {
                        log::warn!("fine cross-check failed: {f}");
                        None
                    }
                    None => {
                        let fs = sup_energy(&run.gaps);
                        Some(FineCheck {
                            grid: [fine.nx(), fine.ny()],
                            n: last.level.n,
                            base_sup_rel_energy: last.sup_rel_energy,
                            fine_sup_rel_energy: fs,
                            relative_change: (fs - last.sup_rel_energy).abs() / last.sup_rel_energy.abs().max(f64::MIN_POSITIVE),
                        })
                    }
                }
            }
            None => None,
        }
    } else {
        None
    };
    Ok(ExperimentReport { config: cfg.clone(), schedule, levels, corrector, fine_check })
}
