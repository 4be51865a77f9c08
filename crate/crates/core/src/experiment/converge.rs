//! Self-convergence study of the empirical measure in squared W2.

use serde::Serialize;

use crate::coupling::replica_seeds;
use crate::error::{KacError, Result};
use crate::farm;
use crate::initial::InitialLaw;
use crate::rng::{derive_seed, Purpose};
use crate::simulator::{run, SimConfig, Snapshot};
use crate::stats::{fit_log_log, mean};
use crate::transport::{subsample_compare, EmpiricalMeasure};

use super::plan::{ExperimentPlan, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub replica: usize,
    pub t: f64,
    pub w2_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Sorted by `(n, replica, t)`.
    pub rows: Vec<ConvergenceRow>,
    /// `(N, mean over replicas of max over the grid of W2²)`.
    pub sup_means: Vec<(usize, f64)>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub reference_spec: String,
    /// Why no slope was fitted, if it was not.
    pub diagnostic: Option<String>,
}

impl ConvergenceReport {
    pub fn passed(&self, ceiling: f64) -> bool {
        self.fitted_slope.is_some_and(|s| s <= ceiling)
    }
}

/// Where the comparison measure at each grid time comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// An independent run of `reference_n` particles per replica.
    Independent,
    /// The particle run itself; every distance is zero (plumbing check).
    SameRun,
}

pub fn run_convergence_study(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    run_convergence_study_with(plan, ReferenceSource::Independent)
}

fn sim_config(plan: &ExperimentPlan, n: usize, init_seed: u64, dyn_seed: u64) -> Result<SimConfig> {
    Ok(SimConfig {
        n_particles: n,
        kernel: plan.kernel,
        cutoff_k: plan.cutoff(),
        horizon_t: plan.horizon_t,
        snapshot_times: SimConfig::uniform_grid(plan.horizon_t, plan.grid_intervals),
        initial: InitialLaw::new(plan.initial, init_seed)?,
        seed: dyn_seed,
    })
}

pub fn run_convergence_study_with(plan: &ExperimentPlan, source: ReferenceSource) -> Result<ConvergenceReport> {
    plan.validate()?;
    if plan.mode != Mode::Converge {
        return Err(KacError::Config(format!("plan mode is {:?}, not converge", plan.mode)));
    }
    let replicas: Vec<usize> = (0..plan.replicas).collect();
    let n_ref = plan.reference_n;
    let references: Vec<Vec<Snapshot>> = match source {
        ReferenceSource::Independent => farm::map(&replicas, |&r| {
            let cfg = sim_config(
                plan,
                n_ref,
                derive_seed(plan.base_seed, Purpose::ReferenceInitial, n_ref as u64, r as u64),
                derive_seed(plan.base_seed, Purpose::ReferenceDynamics, n_ref as u64, r as u64),
            )?;
            run(&cfg)
        })
        .into_iter()
        .collect::<Result<_>>()?,
        ReferenceSource::SameRun => Vec::new(),
    };

    let jobs: Vec<(usize, usize)> = plan
        .n_ladder
        .iter()
        .flat_map(|&n| replicas.iter().map(move |&r| (n, r)))
        .collect();
    let per_job = farm::map(&jobs, |&(n, r)| -> Result<Vec<ConvergenceRow>> {
        let (init_seed, dyn_seed) = replica_seeds(plan.base_seed, n, r);
        let snaps = run(&sim_config(plan, n, init_seed, dyn_seed)?)?;
        snaps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let particles = EmpiricalMeasure::new(s.velocities.clone())?;
                let big = match source {
                    ReferenceSource::Independent => EmpiricalMeasure::new(references[r][k].velocities.clone())?,
                    ReferenceSource::SameRun => particles.clone(),
                };
                let cmp = subsample_compare(&big, &particles, n)?;
                Ok(ConvergenceRow {
                    n,
                    replica: r,
                    t: s.time,
                    w2_squared: cmp.mean_w2_squared,
                })
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut sup_means = Vec::new();
    for (chunk_jobs, chunk) in jobs.chunks(plan.replicas).zip(per_job.chunks(plan.replicas)) {
        let mut sups = Vec::with_capacity(chunk.len());
        for job_rows in chunk {
            sups.push(job_rows.iter().map(|r| r.w2_squared).fold(0.0, f64::max));
            rows.extend_from_slice(job_rows);
        }
        sup_means.push((chunk_jobs[0].0, mean(&sups)));
    }

    let ns: Vec<f64> = sup_means.iter().map(|m| m.0 as f64).collect();
    let ms: Vec<f64> = sup_means.iter().map(|m| m.1).collect();
    let (fitted_slope, slope_stderr, diagnostic) = match fit_log_log(&ns, &ms) {
        Ok(fit) => (Some(fit.slope), Some(fit.slope_stderr), None),
        Err(e) => (None, None, Some(format!("slope not fitted: {e}"))),
    };
    let reference_spec = match source {
        ReferenceSource::Independent => format!(
            "independent run with N_ref = {n_ref} per replica; W2² averaged over consecutive blocks of size N; \
             sup over [0, T] approximated by the max over {} grid times",
            plan.grid_intervals + 1
        ),
        ReferenceSource::SameRun => "the particle run itself".to_string(),
    };
    Ok(ConvergenceReport {
        rows,
        sup_means,
        fitted_slope,
        slope_stderr,
        reference_spec,
        diagnostic,
    })
}
