//! Experiment orchestration: plans, study drivers and report files.

mod converge;
mod output;
mod plan;
pub mod validate;

pub use converge::{
    run_convergence_study, run_convergence_study_with, ConvergenceReport, ConvergenceRow, ReferenceSource,
};
pub use output::{emit_results, write_convergence_csv, write_cutoff_csv};
pub use plan::{ExperimentPlan, Mode};
pub use validate::{run_validation_suite, run_validation_suite_with, ValidationHooks, ValidationReport};

use serde::Serialize;

use crate::coupling::{cutoff_scaling_study, replica_seeds, CutoffScalingReport, CutoffStudy};
use crate::error::{KacError, Result};
use crate::farm;
use crate::initial::InitialLaw;
use crate::simulator::{run_from, ParticleState, SimConfig, Snapshot};
use crate::vec3::Vec3;

/// Conservation tolerances applied to every simulate run.
pub const ENERGY_DRIFT_TOL: f64 = 1e-9;
pub const MOMENTUM_DRIFT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub n: usize,
    pub replica: usize,
    pub events: u64,
    pub relative_energy_drift: f64,
    /// `|Σ v - P_0| / √(N e)` with `e` the mean energy per particle.
    pub scaled_momentum_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Per ladder N, one snapshot list per replica.
    pub snapshots: Vec<(usize, Vec<Vec<Snapshot>>)>,
    pub runs: Vec<RunSummary>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| {
            r.relative_energy_drift <= ENERGY_DRIFT_TOL && r.scaled_momentum_drift <= MOMENTUM_DRIFT_TOL
        })
    }
}

/// Runs every (N, replica) of the plan and keeps the grid snapshots.
pub fn run_simulation_study(plan: &ExperimentPlan) -> Result<SimulationReport> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = plan
        .n_ladder
        .iter()
        .flat_map(|&n| (0..plan.replicas).map(move |r| (n, r)))
        .collect();
    let results = farm::map(&jobs, |&(n, r)| -> Result<(Vec<Snapshot>, RunSummary)> {
        let (init_seed, dyn_seed) = replica_seeds(plan.base_seed, n, r);
        let cfg = SimConfig {
            n_particles: n,
            kernel: plan.kernel,
            cutoff_k: plan.cutoff(),
            horizon_t: plan.horizon_t,
            snapshot_times: SimConfig::uniform_grid(plan.horizon_t, plan.grid_intervals),
            initial: InitialLaw::new(plan.initial, init_seed)?,
            seed: dyn_seed,
        };
        let state = ParticleState::from_config(&cfg)?;
        let (p0, e0) = (state.total_momentum, state.total_energy);
        let snaps = run_from(&cfg, state)?;
        let last = snaps.last().expect("at least one snapshot");
        let e1: f64 = last.velocities.iter().map(|v| v.norm_sq()).sum();
        let p1 = Vec3::sum(&last.velocities);
        let summary = RunSummary {
            n,
            replica: r,
            events: last.event_count,
            relative_energy_drift: (e1 - e0).abs() / e0,
            scaled_momentum_drift: (p1 - p0).norm() / e0.sqrt(),
        };
        Ok((snaps, summary))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut snapshots = Vec::new();
    let mut runs = Vec::new();
    for (n_jobs, chunk) in jobs.chunks(plan.replicas).zip(results.chunks(plan.replicas)) {
        snapshots.push((n_jobs[0].0, chunk.iter().map(|c| c.0.clone()).collect()));
        runs.extend(chunk.iter().map(|c| c.1.clone()));
    }
    Ok(SimulationReport { snapshots, runs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    /// One cutoff ladder study per N of the plan.
    pub studies: Vec<(usize, CutoffScalingReport)>,
    pub slope_ceiling: f64,
}

impl CouplingReport {
    /// Means strictly decrease along the ladder and the slope meets the ceiling.
    pub fn passed(&self) -> bool {
        self.studies.iter().all(|(_, s)| {
            s.means.windows(2).all(|w| w[1].1 < w[0].1)
                && s.fit.is_some_and(|f| f.slope <= self.slope_ceiling)
        })
    }
}

pub fn run_coupling_study(plan: &ExperimentPlan) -> Result<CouplingReport> {
    plan.validate()?;
    if plan.mode != Mode::Couple {
        return Err(KacError::Config(format!("plan mode is {:?}, not couple", plan.mode)));
    }
    let studies = plan
        .n_ladder
        .iter()
        .map(|&n| {
            cutoff_scaling_study(&CutoffStudy {
                kernel: plan.kernel,
                n_particles: n,
                k_ladder: plan.k_ladder.clone(),
                horizon_t: plan.horizon_t,
                replicas: plan.replicas,
                seed: plan.base_seed,
                initial: plan.initial,
                alignment: plan.alignment,
            })
            .map(|s| (n, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingReport {
        studies,
        slope_ceiling: plan.slope_ceiling,
    })
}

/// Result of any mode.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyReport {
    Simulate(SimulationReport),
    Converge(ConvergenceReport),
    Couple(CouplingReport),
    Validate(ValidationReport),
}

impl StudyReport {
    pub fn passed(&self, plan: &ExperimentPlan) -> bool {
        match self {
            StudyReport::Simulate(r) => r.passed(),
            StudyReport::Converge(r) => r.passed(plan.slope_ceiling),
            StudyReport::Couple(r) => r.passed(),
            StudyReport::Validate(r) => r.all_passed,
        }
    }
}

/// Runs the study selected by `plan.mode`.
pub fn run_plan(plan: &ExperimentPlan) -> Result<StudyReport> {
    Ok(match plan.mode {
        Mode::Simulate => StudyReport::Simulate(run_simulation_study(plan)?),
        Mode::Converge => StudyReport::Converge(run_convergence_study(plan)?),
        Mode::Couple => StudyReport::Couple(run_coupling_study(plan)?),
        Mode::Validate => StudyReport::Validate(run_validation_suite(plan.base_seed)),
    })
}
