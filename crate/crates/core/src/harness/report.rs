use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, LevelReport};
use crate::error::Result;

/// Monotonicity and overall decay of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayVerdict {
    /// `last / first`.
    pub ratio: f64,
    pub strictly_decreasing: bool,
    pub passed: bool,
}

/// Passes when the series strictly decreases and `last/first < threshold`.
pub fn decay_verdict(series: &[f64], threshold: f64) -> DecayVerdict {
    let strictly_decreasing = series.len() >= 2 && series.windows(2).all(|w| w[1] < w[0]);
    let ratio = match (series.first(), series.last()) {
        (Some(&f), Some(&l)) if f != 0.0 => l / f,
        (Some(_), Some(&0.0)) => 1.0,
        _ => f64::NAN,
    };
    DecayVerdict { ratio, strictly_decreasing, passed: strictly_decreasing && ratio < threshold }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub passed: bool,
    pub successful_levels: usize,
    pub sup_rel_energy: DecayVerdict,
    /// Strict decrease of the L¹ distances of `(ρ, ρe, ρu)`.
    pub l1_decreasing: [bool; 3],
    /// Strict decrease of each consistency norm, for information.
    pub consistency_decreasing: [bool; 6],
    pub reasons: Vec<String>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
}

/// Decay of `sup ∫E_a` and of the L¹ distances over the successful levels.
pub fn convergence_assert(levels: &[LevelReport], ratio_threshold: f64) -> ConvergenceVerdict {
    let ok: Vec<&LevelReport> = levels.iter().filter(|l| l.succeeded()).collect();
    let sup: Vec<f64> = ok.iter().map(|l| l.sup_rel_energy).collect();
    let sup_verdict = decay_verdict(&sup, ratio_threshold);
    let l1_decreasing: [bool; 3] = std::array::from_fn(|k| strictly_decreasing(&ok.iter().map(|l| l.l1_errors[k]).collect::<Vec<_>>()));
    let consistency_decreasing: [bool; 6] =
        std::array::from_fn(|k| strictly_decreasing(&ok.iter().map(|l| l.consistency.norms[k]).collect::<Vec<_>>()));
    let mut reasons = Vec::new();
    if ok.len() < 3 {
        reasons.push(format!("only {} successful levels, need 3", ok.len()));
    }
    if ok.len() < levels.len() {
        reasons.push(format!("{} levels failed", levels.len() - ok.len()));
    }
    if !sup_verdict.strictly_decreasing {
        reasons.push("sup relative energy is not strictly decreasing".into());
    }
    if !(sup_verdict.ratio < ratio_threshold) {
        reasons.push(format!("decay ratio {:.4} is not below {ratio_threshold}", sup_verdict.ratio));
    }
    for (k, name) in ["density", "energy density", "momentum"].iter().enumerate() {
        if !l1_decreasing[k] {
            reasons.push(format!("L1 {name} error is not decreasing"));
        }
    }
    ConvergenceVerdict {
        passed: reasons.is_empty(),
        successful_levels: ok.len(),
        sup_rel_energy: sup_verdict,
        l1_decreasing,
        consistency_decreasing,
        reasons,
    }
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub mu: f64,
    pub kappa: f64,
    pub a: f64,
    pub delta: f64,
    pub sup_rel_energy: f64,
    pub final_rel_energy: f64,
    pub l1_rho_err: f64,
    pub l1_rhoe_err: f64,
    pub l1_mom_err: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "E4")]
    pub e4: f64,
    #[serde(rename = "E5")]
    pub e5: f64,
    #[serde(rename = "E6")]
    pub e6: f64,
    #[serde(rename = "D_n")]
    pub d_n: f64,
    /// Empty when the layer is unresolved.
    pub kato_1: Option<f64>,
    pub kato_2: Option<f64>,
    pub kato_3: Option<f64>,
    pub energy_drift: f64,
    pub wall_seconds: f64,
}

const SUMMARY_HEADER: [&str; 22] = [
    "n",
    "mu",
    "kappa",
    "a",
    "delta",
    "sup_rel_energy",
    "final_rel_energy",
    "l1_rho_err",
    "l1_rhoe_err",
    "l1_mom_err",
    "E1",
    "E2",
    "E3",
    "E4",
    "E5",
    "E6",
    "D_n",
    "kato_1",
    "kato_2",
    "kato_3",
    "energy_drift",
    "wall_seconds",
];

/// One line of `timeseries.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub n: usize,
    pub t: f64,
    pub rel_energy: f64,
    pub dissipation: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    pub min_rho: f64,
    pub min_theta: f64,
}

const SERIES_HEADER: [&str; 13] =
    ["n", "t", "rel_energy", "dissipation", "lhs", "rhs", "gap", "tolerance", "mass", "energy", "entropy", "min_rho", "min_theta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KatoRow {
    n: usize,
    criterion: String,
    index: usize,
    value: Option<f64>,
    note: String,
}

const KATO_HEADER: [&str; 5] = ["n", "criterion", "index", "value", "note"];

pub fn summary_rows(report: &ExperimentReport) -> Vec<SummaryRow> {
    report
        .levels
        .iter()
        .map(|l| {
            let k = l.kato.report.as_ref().map(|r| r.values.clone()).unwrap_or_default();
            let e = l.consistency.norms;
            SummaryRow {
                n: l.level.n,
                mu: l.level.mu,
                kappa: l.level.kappa,
                a: l.level.a,
                delta: l.level.delta,
                sup_rel_energy: l.sup_rel_energy,
                final_rel_energy: l.final_rel_energy,
                l1_rho_err: l.l1_errors[0],
                l1_rhoe_err: l.l1_errors[1],
                l1_mom_err: l.l1_errors[2],
                e1: e[0],
                e2: e[1],
                e3: e[2],
                e4: e[3],
                e5: e[4],
                e6: e[5],
                d_n: l.consistency.dissipation(),
                kato_1: k.first().copied(),
                kato_2: k.get(1).copied(),
                kato_3: k.get(2).copied(),
                energy_drift: l.basic.energy_drift(),
                wall_seconds: l.wall_seconds,
            }
        })
        .collect()
}

fn series_rows(report: &ExperimentReport) -> Vec<TimeSeriesRow> {
    let mut rows = Vec::new();
    for l in &report.levels {
        for (k, g) in l.gaps.iter().enumerate() {
            let b = l.basic.samples.get(k);
            let pick = |f: fn(&crate::nsf_solver::BasicSample) -> f64| b.map_or(f64::NAN, f);
            rows.push(TimeSeriesRow {
                n: l.level.n,
                t: g.t,
                rel_energy: g.rel_energy,
                dissipation: g.dissipation,
                lhs: g.lhs,
                rhs: g.rhs,
                gap: g.gap,
                tolerance: l.tolerances.get(k).copied().unwrap_or(f64::NAN),
                mass: pick(|s| s.mass),
                energy: pick(|s| s.energy),
                entropy: pick(|s| s.entropy),
                min_rho: pick(|s| s.min_rho),
                min_theta: pick(|s| s.min_theta),
            });
        }
    }
    rows
}

fn kato_rows(report: &ExperimentReport) -> Vec<KatoRow> {
    let mut rows = Vec::new();
    for l in &report.levels {
        let criterion = serde_json::to_value(l.kato.criterion).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        match &l.kato.report {
            Some(r) => {
                for (i, v) in r.values.iter().enumerate() {
                    rows.push(KatoRow { n: l.level.n, criterion: criterion.clone(), index: i + 1, value: Some(*v), note: String::new() });
                }
            }
            None => rows.push(KatoRow { n: l.level.n, criterion, index: 0, value: None, note: l.kato.note.clone().unwrap_or_default() }),
        }
    }
    rows
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `timeseries.csv`, `kato.csv` and `summary.json`.
pub fn persist(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_csv(&out_dir.join("summary.csv"), &SUMMARY_HEADER, &summary_rows(report))?;
    write_csv(&out_dir.join("timeseries.csv"), &SERIES_HEADER, &series_rows(report))?;
    write_csv(&out_dir.join("kato.csv"), &KATO_HEADER, &kato_rows(report))?;
    let verdict = convergence_assert(&report.levels, report.config.ratio_threshold);
    let json = serde_json::json!({ "report": report, "verdict": verdict });
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}
