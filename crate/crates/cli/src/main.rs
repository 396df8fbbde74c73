use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nsflab::euler_reference::FamilyKind;
use nsflab::harness::{convergence_assert, eos_suite, persist, run_experiment, ExperimentConfig, ExperimentReport};
use nsflab::nsf_solver::BoundaryKind;

const PASS: u8 = 0;
const ASSERT_FAIL: u8 = 2;
const SOLVER_FAIL: u8 = 3;

#[derive(Parser)]
#[command(name = "nsflab", version, about = "Vanishing dissipation/radiation experiments for the Navier-Stokes-Fourier system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Random-state checks of the equation of state.
    EosCheck {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Single run at the first level of the schedule.
    Solve,
    /// Full schedule with the convergence verdict.
    Experiment,
    /// No-slip schedule with corrector estimates and layer criteria.
    Kato,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    mu0: Option<f64>,
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    /// slip or noslip.
    #[arg(long, global = true)]
    bc: Option<BoundaryKind>,
    /// stationary or traveling.
    #[arg(long, global = true)]
    family: Option<FamilyKind>,
    #[arg(long, global = true)]
    speed: Option<f64>,
    #[arg(long, global = true)]
    p0: Option<f64>,
    #[arg(long, global = true)]
    tfinal: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    deterministic: bool,
    /// Rerun the last level on the doubled grid.
    #[arg(long, global = true)]
    fine_check: bool,
}

impl Opts {
    fn experiment_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(if let Some(v) = self.$flag { cfg.$field = v; })*};
        }
        set!(gamma => gamma, alpha => alpha, mu0 => mu0, levels => levels, bc => bc, family => family, speed => speed, p0 => p0, tfinal => t_final);
        if let Some(g) = &self.grid {
            cfg.grid = [g[0], g[1]];
        }
        cfg.deterministic |= self.deterministic;
        cfg.fine_check |= self.fine_check;
        if let Some(path) = &self.config {
            cfg = merge_json(&cfg, path)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge_json(base: &ExperimentConfig, path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overrides: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let serde_json::Value::Object(overrides) = overrides else {
        bail!("{} must contain a JSON object", path.display());
    };
    let mut merged = serde_json::to_value(base)?;
    let target = merged.as_object_mut().expect("config serializes to an object");
    for (k, v) in overrides {
        target.insert(k, v);
    }
    serde_json::from_value(merged).with_context(|| format!("invalid config {}", path.display()))
}

fn print_levels(report: &ExperimentReport) {
    println!(
        "{:>2} {:>10} {:>10} {:>10} {:>12} {:>12} {:>10} {:>6}  status",
        "n", "mu", "kappa", "a", "sup E_a", "final E_a", "L1 rho", "steps"
    );
    for l in &report.levels {
        let status = match &l.failure {
            Some(f) => format!("FAILED: {f}"),
            None if l.gap_violations() > 0 => format!("{} gap violations", l.gap_violations()),
            None => "ok".into(),
        };
        println!(
            "{:>2} {:>10.3e} {:>10.3e} {:>10.3e} {:>12.5e} {:>12.5e} {:>10.3e} {:>6}  {status}",
            l.level.n, l.level.mu, l.level.kappa, l.level.a, l.sup_rel_energy, l.final_rel_energy, l.l1_errors[0], l.steps
        );
    }
}

fn finish(report: &ExperimentReport, out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        persist(report, dir).with_context(|| format!("writing results to {}", dir.display()))?;
        println!("results written to {}", dir.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::EosCheck { samples, seed } => {
            let rep = eos_suite(seed, samples, 1e-4)?;
            for b in &rep.branches {
                println!(
                    "gamma={:.4} {:<8} gibbs max {:.2e} order {:.2}  identity {:.2e}",
                    b.gamma,
                    if b.ideal { "ideal" } else { "residual" },
                    b.max_gibbs,
                    b.gibbs_order,
                    b.max_identity
                );
            }
            println!(
                "stability margin {:.3e}, entropy slope deviation {:.2e}, S(1e6) = {:.2e}, P/Z^gamma deviation {:.2e}",
                rep.min_stability_margin, rep.max_entropy_slope_deviation, rep.entropy_tail, rep.pressure_tail_deviation
            );
            let ok = rep.passed();
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { PASS } else { ASSERT_FAIL })
        }
        Command::Solve => {
            let mut cfg = cli.opts.experiment_config()?;
            cfg.levels = 1;
            let report = run_experiment(&cfg)?;
            print_levels(&report);
            let l = &report.levels[0];
            println!(
                "energy drift {:.3e}, mass drift {:.3e}, entropy violations {}",
                l.basic.energy_drift(),
                l.basic.mass_drift(),
                l.basic.entropy_violations
            );
            finish(&report, cli.opts.out.as_deref())?;
            Ok(if report.any_failure() { SOLVER_FAIL } else { PASS })
        }
        Command::Experiment => {
            let cfg = cli.opts.experiment_config()?;
            let report = run_experiment(&cfg)?;
            print_levels(&report);
            if let Some(f) = &report.fine_check {
                println!("fine cross-check {}x{}: sup E_a changed by {:.2}%", f.grid[0], f.grid[1], 100.0 * f.relative_change);
            }
            let verdict = convergence_assert(&report.levels, cfg.ratio_threshold);
            println!("decay ratio {:.4} (threshold {})", verdict.sup_rel_energy.ratio, cfg.ratio_threshold);
            for r in &verdict.reasons {
                println!("  {r}");
            }
            println!("{}", if verdict.passed { "PASS" } else { "FAIL" });
            finish(&report, Some(cli.opts.out.as_deref().unwrap_or(Path::new("nsflab-out"))))?;
            Ok(if report.any_failure() {
                SOLVER_FAIL
            } else if verdict.passed {
                PASS
            } else {
                ASSERT_FAIL
            })
        }
        Command::Kato => {
            let mut cfg = cli.opts.experiment_config()?;
            cfg.bc = BoundaryKind::NoSlip;
            let report = run_experiment(&cfg)?;
            print_levels(&report);
            let sweep = report.corrector.as_ref().expect("no-slip runs carry a corrector sweep");
            for e in &sweep.estimates {
                println!(
                    "delta {:.3}: |div| {:.3e}  |dt v|+|v| {:.3e}  |grad_t| {:.3e}  |grad_n| {:.3e}",
                    e.delta, e.divergence, e.time_and_value, e.tangential_gradient, e.normal_gradient
                );
            }
            println!(
                "normal gradient exponent {:.3}, corrector estimates {}",
                sweep.normal_exponent,
                if sweep.passed() { "pass" } else { "fail" }
            );
            for l in &report.levels {
                match (&l.kato.report, &l.kato.note) {
                    (Some(r), _) => println!("n={} {:?}: {:?}", l.level.n, r.criterion, r.values),
                    (None, note) => println!("n={} unresolved: {}", l.level.n, note.as_deref().unwrap_or("run failed")),
                }
            }
            finish(&report, cli.opts.out.as_deref())?;
            Ok(if report.any_failure() {
                SOLVER_FAIL
            } else if sweep.passed() {
                PASS
            } else {
                ASSERT_FAIL
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_default_env().filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn }).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
