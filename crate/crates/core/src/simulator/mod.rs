//! Event-driven simulation of the Kac N-particle system.
//!
//! In the z-parameterization every unordered pair carries a Poisson clock of
//! intensity `dz dφ / (N - 1)` on `[0, ∞) × [0, 2π)`. With `z` restricted to a
//! finite range `[0, Z)` the whole system is driven by one exponential clock
//! of rate `π Z N` followed by a uniform pair, `z ~ U[0, Z)` and `φ ~ U[0, 2π)`.
//!
//! * Power laws use `Z = K`; every proposal is a collision.
//! * Hard spheres need no cutoff: `G(z/x)` vanishes for `z ≥ π x / 2`, and
//!   `x = |v_i - v_j| ≤ √(2 Σ|v_k|²)`, so `Z = π x_max / 2` is a majorant.
//!   A proposal is accepted iff `z < π |v_i - v_j| / 2`, which happens with
//!   probability `|v_i - v_j| / x_max`.
//!
//! Draw order per proposal is part of the reproducibility contract:
//! waiting time, first index, second index, `z`, `φ`.

mod moments;

pub use moments::{calibrate_povzner_tilde, empirical_moment, povzner_audit, povzner_audit_with, PovznerAudit};

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{KacError, Result};
use crate::geometry::collide_pair;
use crate::initial::{sample_initial, InitialLaw};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::rng::{stream, Purpose, SimRng};
use crate::vec3::Vec3;

/// Parameters of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_particles: usize,
    pub kernel: KernelSpec,
    /// Cutoff level K in the z variable; `f64::INFINITY` only for hard spheres.
    pub cutoff_k: f64,
    pub horizon_t: f64,
    /// Sorted times in `[0, horizon_t]` at which the state is recorded.
    pub snapshot_times: Vec<f64>,
    pub initial: InitialLaw,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(KacError::Config(format!(
                "n_particles must be at least 2, got {}",
                self.n_particles
            )));
        }
        if self.cutoff_k.is_nan() || self.cutoff_k < 1.0 {
            return Err(KacError::Config(format!("cutoff_k must be >= 1, got {}", self.cutoff_k)));
        }
        if self.kernel.family() == KernelFamily::PowerLaw && !self.cutoff_k.is_finite() {
            return Err(KacError::Config(
                "power-law kernels need a finite cutoff_k (infinite event rate otherwise)".into(),
            ));
        }
        if !(self.horizon_t >= 0.0 && self.horizon_t.is_finite()) {
            return Err(KacError::Config(format!("horizon_t must be finite and >= 0, got {}", self.horizon_t)));
        }
        if self.snapshot_times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(KacError::Config("snapshot_times must be sorted".into()));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= self.horizon_t))
        {
            return Err(KacError::Config("snapshot_times must lie in [0, horizon_t]".into()));
        }
        self.initial.validate()
    }

    /// `n + 1` equally spaced snapshot times from 0 to the horizon.
    pub fn uniform_grid(horizon_t: f64, intervals: usize) -> Vec<f64> {
        if horizon_t == 0.0 {
            return vec![0.0];
        }
        let intervals = intervals.max(1);
        (0..=intervals)
            .map(|k| {
                if k == intervals {
                    horizon_t
                } else {
                    horizon_t * k as f64 / intervals as f64
                }
            })
            .collect()
    }
}

/// One Poisson atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventDraw {
    /// Receives `c(v_first, v_second, z, φ)`; `second` receives its negative.
    pub first: usize,
    pub second: usize,
    pub z: f64,
    pub phi: f64,
    /// Set after application: whether the collision moved any velocity.
    pub accepted: bool,
}

/// Precomputed rates for a fixed kernel, cutoff, N and energy.
#[derive(Debug, Clone, Copy)]
pub struct Dynamics {
    pub kernel: KernelSpec,
    pub cutoff_k: f64,
    pub n: usize,
    /// Proposals draw `z` uniformly from `[0, z_range)`.
    pub z_range: f64,
    pub rate: f64,
}

impl Dynamics {
    pub fn new(kernel: KernelSpec, cutoff_k: f64, n: usize, total_energy: f64) -> Self {
        let z_range = match kernel.family() {
            KernelFamily::PowerLaw => cutoff_k,
            KernelFamily::HardSphere => {
                let x_max = (2.0 * total_energy).sqrt();
                (FRAC_PI_2 * x_max).min(cutoff_k)
            }
        };
        Dynamics {
            kernel,
            cutoff_k,
            n,
            z_range,
            rate: PI * z_range * n as f64,
        }
    }

    /// Draws the waiting time and the atom, in the contract order.
    #[inline]
    pub fn propose(&self, rng: &mut SimRng) -> (f64, EventDraw) {
        let wait: f64 = if self.rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / self.rate
        } else {
            f64::INFINITY
        };
        let i = rng.random_range(0..self.n);
        let mut j = rng.random_range(0..self.n - 1);
        if j >= i {
            j += 1;
        }
        let z = rng.random::<f64>() * self.z_range;
        let phi = rng.random::<f64>() * TAU;
        let (first, second) = if i < j { (i, j) } else { (j, i) };
        (
            wait,
            EventDraw {
                first,
                second,
                z,
                phi,
                accepted: false,
            },
        )
    }

    /// Applies an atom to `velocities`; returns whether anything moved.
    #[inline]
    pub fn apply(&self, velocities: &mut [Vec3], draw: &EventDraw) -> bool {
        let (vi, vj) = (velocities[draw.first], velocities[draw.second]);
        let (ni, nj) = collide_pair(&self.kernel, vi, vj, draw.z, draw.phi, self.cutoff_k);
        if ni == vi && nj == vj {
            return false;
        }
        velocities[draw.first] = ni;
        velocities[draw.second] = nj;
        true
    }
}

/// Total rate of the (majorant) proposal clock.
pub fn event_rate(config: &SimConfig, state: &ParticleState) -> f64 {
    Dynamics::new(config.kernel, config.cutoff_k, state.velocities.len(), state.total_energy).rate
}

/// Velocities, clock and conserved totals of a running system.
#[derive(Debug, Clone)]
pub struct ParticleState {
    pub velocities: Vec<Vec3>,
    pub time: f64,
    pub total_momentum: Vec3,
    /// `Σ |v_i|²` at initialization.
    pub total_energy: f64,
    /// Accepted collisions.
    pub event_count: u64,
    /// All proposals, accepted or not.
    pub proposal_count: u64,
    pub rng: SimRng,
    /// Next atom already drawn from `rng`, with its absolute time.
    pending: Option<(f64, EventDraw)>,
}

impl ParticleState {
    pub fn new(velocities: Vec<Vec3>, rng: SimRng) -> Result<Self> {
        if velocities.len() < 2 {
            return Err(KacError::Config("need at least 2 particles".into()));
        }
        if velocities.iter().any(|v| !v.is_finite()) {
            return Err(KacError::Config("non-finite initial velocity".into()));
        }
        Ok(ParticleState {
            total_momentum: Vec3::sum(&velocities),
            total_energy: velocities.iter().map(|v| v.norm_sq()).sum(),
            velocities,
            time: 0.0,
            event_count: 0,
            proposal_count: 0,
            rng,
            pending: None,
        })
    }

    /// Initial state for `config`: velocities from `config.initial`, dynamics
    /// stream keyed by `config.seed`.
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let v = sample_initial(&config.initial, config.n_particles)?;
        ParticleState::new(v, stream(config.seed, Purpose::Dynamics, 0, 0))
    }

    pub fn n(&self) -> usize {
        self.velocities.len()
    }

    /// `|Σ v_i - P_0|`.
    pub fn momentum_drift(&self) -> f64 {
        (Vec3::sum(&self.velocities) - self.total_momentum).norm()
    }

    /// `|Σ |v_i|² - E_0| / E_0`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e: f64 = self.velocities.iter().map(|v| v.norm_sq()).sum();
        (e - self.total_energy).abs() / self.total_energy
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.time,
            event_count: self.event_count,
            velocities: self.velocities.clone(),
        }
    }
}

/// State recorded at a requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub event_count: u64,
    pub velocities: Vec<Vec3>,
}

/// One proposal: advances the clock and applies the atom if accepted.
pub fn step(config: &SimConfig, state: &mut ParticleState) -> EventDraw {
    let dynamics = Dynamics::new(config.kernel, config.cutoff_k, state.n(), state.total_energy);
    let (t_next, mut draw) = match state.pending.take() {
        Some(p) => p,
        None => {
            let (wait, draw) = dynamics.propose(&mut state.rng);
            (state.time + wait, draw)
        }
    };
    state.time = t_next;
    draw.accepted = apply_draw(&dynamics, state, &draw);
    draw
}

/// Applies an externally supplied atom (no clock advance).
pub fn apply_draw(dynamics: &Dynamics, state: &mut ParticleState, draw: &EventDraw) -> bool {
    state.proposal_count += 1;
    let moved = dynamics.apply(&mut state.velocities, draw);
    if moved {
        state.event_count += 1;
    }
    moved
}

/// Advances `state` to `until`, applying every atom that falls in `(state.time, until]`.
pub fn advance_to(dynamics: &Dynamics, state: &mut ParticleState, until: f64) {
    loop {
        // An atom beyond `until` stays pending, so the trajectory does not
        // depend on where snapshots are taken.
        let (t_next, draw) = match state.pending.take() {
            Some(p) => p,
            None => {
                let (wait, draw) = dynamics.propose(&mut state.rng);
                (state.time + wait, draw)
            }
        };
        if t_next > until {
            state.pending = Some((t_next, draw));
            state.time = state.time.max(until);
            return;
        }
        state.time = t_next;
        apply_draw(dynamics, state, &draw);
    }
}

/// Runs the simulation from the state built by `config`.
pub fn run(config: &SimConfig) -> Result<Vec<Snapshot>> {
    let state = ParticleState::from_config(config)?;
    run_from(config, state)
}

/// Runs from a given initial state; returns one snapshot per requested time.
pub fn run_from(config: &SimConfig, mut state: ParticleState) -> Result<Vec<Snapshot>> {
    config.validate()?;
    let dynamics = Dynamics::new(config.kernel, config.cutoff_k, state.n(), state.total_energy);
    let mut snaps = Vec::with_capacity(config.snapshot_times.len());
    for &t in &config.snapshot_times {
        advance_to(&dynamics, &mut state, t);
        snaps.push(state.snapshot());
    }
    if state.time < config.horizon_t {
        advance_to(&dynamics, &mut state, config.horizon_t);
    }
    if config.snapshot_times.is_empty() {
        snaps.push(state.snapshot());
    }
    Ok(snaps)
}

/// Runs to the horizon and returns the final state (for diagnostics).
pub fn run_to_end(config: &SimConfig, mut state: ParticleState) -> Result<ParticleState> {
    config.validate()?;
    let dynamics = Dynamics::new(config.kernel, config.cutoff_k, state.n(), state.total_energy);
    advance_to(&dynamics, &mut state, config.horizon_t);
    Ok(state)
}

/// Writes snapshots as `replica_id,t,particle_id,vx,vy,vz` rows (header included
/// when `header` is set). Floats use the shortest round-trip representation.
pub fn write_snapshots<W: Write>(
    out: &mut W,
    replica_id: usize,
    snapshots: &[Snapshot],
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(out, "replica_id,t,particle_id,vx,vy,vz")?;
    }
    for s in snapshots {
        for (pid, v) in s.velocities.iter().enumerate() {
            writeln!(out, "{},{},{},{},{},{}", replica_id, s.time, pid, v.x, v.y, v.z)?;
        }
    }
    Ok(())
}
