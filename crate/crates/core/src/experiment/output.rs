//! CSV and JSON report files.
//!
//! Floats are written in Rust's shortest round-trip form and JSON keys follow
//! struct order, so identical reports give identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coupling::{CutoffRow, CutoffScalingReport};
use crate::error::{KacError, Result};
use crate::simulator::write_snapshots;
use crate::stats::LogLogFit;

use super::converge::{ConvergenceReport, ConvergenceRow};
use super::plan::ExperimentPlan;
use super::{RunSummary, StudyReport};

pub fn write_convergence_csv<W: Write>(out: &mut W, rows: &[ConvergenceRow]) -> std::io::Result<()> {
    writeln!(out, "N,replica,t,w2_squared")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.replica, r.t, r.w2_squared)?;
    }
    Ok(())
}

pub fn write_cutoff_csv<W: Write>(out: &mut W, rows: &[CutoffRow]) -> std::io::Result<()> {
    writeln!(out, "K,replica,h_T")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.k, r.replica, r.h_t)?;
    }
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> KacError + '_ {
    move |source| KacError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf> {
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(path)
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    mode: super::Mode,
    passed: bool,
    seed: u64,
    config_hash: String,
    config: &'a ExperimentPlan,
    #[serde(flatten)]
    results: T,
}

#[derive(Serialize)]
struct ConvergeResults<'a> {
    slope: Option<f64>,
    stderr: Option<f64>,
    slope_ceiling: f64,
    sup_means: &'a [(usize, f64)],
    reference_spec: &'a str,
    diagnostic: Option<&'a str>,
}

#[derive(Serialize)]
struct CoupleStudy<'a> {
    n: usize,
    k_max: f64,
    means: &'a [(f64, f64)],
    fit: Option<LogLogFit>,
}

#[derive(Serialize)]
struct CoupleResults<'a> {
    slope_ceiling: f64,
    studies: Vec<CoupleStudy<'a>>,
}

#[derive(Serialize)]
struct SimulateResults<'a> {
    runs: &'a [RunSummary],
}

/// Writes the report files for `report` into `dir` (created if needed) and
/// returns their paths.
pub fn emit_results(report: &StudyReport, plan: &ExperimentPlan, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let summary_path = dir.join("summary.json");
    let passed = report.passed(plan);
    macro_rules! summary {
        ($results:expr) => {{
            let s = Summary {
                mode: plan.mode,
                passed,
                seed: plan.base_seed,
                config_hash: plan.config_hash(),
                config: plan,
                results: $results,
            };
            let text = serde_json::to_string_pretty(&s).expect("summary serializes");
            write_file(summary_path, |w| writeln!(w, "{text}"))?
        }};
    }
    match report {
        StudyReport::Simulate(r) => {
            for (n, replicas) in &r.snapshots {
                written.push(write_file(dir.join(format!("snapshots_N{n}.csv")), |w| {
                    writeln!(w, "replica_id,t,particle_id,vx,vy,vz")?;
                    for (id, snaps) in replicas.iter().enumerate() {
                        write_snapshots(w, id, snaps, false)?;
                    }
                    Ok(())
                })?);
            }
            written.push(summary!(SimulateResults { runs: &r.runs }));
        }
        StudyReport::Converge(r) => {
            written.push(write_file(dir.join("convergence.csv"), |w| write_convergence_csv(w, &r.rows))?);
            written.push(summary!(converge_results(r, plan.slope_ceiling)));
        }
        StudyReport::Couple(r) => {
            for (n, s) in &r.studies {
                written.push(write_file(dir.join(format!("cutoff_N{n}.csv")), |w| write_cutoff_csv(w, &s.rows))?);
            }
            written.push(summary!(CoupleResults {
                slope_ceiling: r.slope_ceiling,
                studies: r.studies.iter().map(|(n, s)| couple_study(*n, s)).collect(),
            }));
        }
        StudyReport::Validate(r) => {
            written.push(summary!(r));
        }
    }
    Ok(written)
}

fn converge_results(r: &ConvergenceReport, ceiling: f64) -> ConvergeResults<'_> {
    ConvergeResults {
        slope: r.fitted_slope,
        stderr: r.slope_stderr,
        slope_ceiling: ceiling,
        sup_means: &r.sup_means,
        reference_spec: &r.reference_spec,
        diagnostic: r.diagnostic.as_deref(),
    }
}

fn couple_study(n: usize, s: &CutoffScalingReport) -> CoupleStudy<'_> {
    CoupleStudy {
        n,
        k_max: s.k_max,
        means: &s.means,
        fit: s.fit,
    }
}
