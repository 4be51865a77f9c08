//! Shared-noise couplings of two Kac systems.
//!
//! System B runs with the larger cutoff `K_b` and is driven exactly as an
//! uncoupled simulation with the same seed, so it is bitwise identical to one.
//! System A (cutoff `K_a ≤ K_b`) sees the same atoms `(i, j, z, φ)`, collides
//! only when `z ≤ K_a`, and rotates its azimuth by the alignment angle
//! `φ₀(X_B, X_A)` so that `Γ(X_A, φ + φ₀) ≈ Γ(X_B, φ)`.
//! Particle `i` of A is paired with particle `i` of B.

use serde::{Deserialize, Serialize};

use crate::error::{KacError, Result};
use crate::farm;
use crate::geometry::{collide_pair, frame_of_relative, phi_zero_frames};
use crate::initial::{sample_initial, InitialKind, InitialLaw};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::rng::{derive_seed, stream, Purpose, SimRng};
use crate::simulator::{Dynamics, EventDraw};
use crate::stats::{fit_log_log, LogLogFit};
use crate::vec3::Vec3;

/// How system A's azimuth is matched to system B's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Shift by the optimal angle `φ₀`.
    #[default]
    Tanaka,
    /// Use the raw `φ` in both systems.
    Unaligned,
}

#[derive(Debug, Clone)]
pub struct CoupledState {
    pub kernel: KernelSpec,
    pub k_a: f64,
    pub k_b: f64,
    pub alignment: Alignment,
    pub a: Vec<Vec3>,
    pub b: Vec<Vec3>,
    pub time: f64,
    pub proposals: u64,
    pub events_a: u64,
    pub events_b: u64,
    pub rng: SimRng,
    /// `(t, h_t)` pairs recorded by [`CoupledState::record`].
    pub history: Vec<(f64, f64)>,
    dynamics: Dynamics,
    pending: Option<(f64, EventDraw)>,
}

impl CoupledState {
    /// Both systems start from `velocities`; `h_0 = 0` is recorded.
    pub fn new(
        kernel: KernelSpec,
        k_a: f64,
        k_b: f64,
        velocities: Vec<Vec3>,
        rng: SimRng,
        alignment: Alignment,
    ) -> Result<Self> {
        let mut s = Self::from_parts(kernel, k_a, k_b, velocities.clone(), velocities, rng, alignment)?;
        s.record();
        Ok(s)
    }

    /// Starts from two possibly different configurations (test fixtures).
    pub fn from_parts(
        kernel: KernelSpec,
        k_a: f64,
        k_b: f64,
        a: Vec<Vec3>,
        b: Vec<Vec3>,
        rng: SimRng,
        alignment: Alignment,
    ) -> Result<Self> {
        if a.len() != b.len() {
            return Err(KacError::SizeMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(KacError::Config("need at least 2 particles".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(KacError::Config("non-finite velocity".into()));
        }
        if k_a.is_nan() || k_b.is_nan() || k_a < 1.0 || k_a > k_b {
            return Err(KacError::Config(format!("need 1 <= k_a <= k_b, got k_a = {k_a}, k_b = {k_b}")));
        }
        if kernel.family() == KernelFamily::PowerLaw && !k_b.is_finite() {
            return Err(KacError::Config("power-law couplings need a finite k_b".into()));
        }
        let energy = |v: &[Vec3]| v.iter().map(|x| x.norm_sq()).sum::<f64>();
        // For hard spheres the majorant must dominate both systems.
        let dynamics = Dynamics::new(kernel, k_b, a.len(), energy(&a).max(energy(&b)));
        Ok(CoupledState {
            kernel,
            k_a,
            k_b,
            alignment,
            a,
            b,
            time: 0.0,
            proposals: 0,
            events_a: 0,
            events_b: 0,
            rng,
            history: Vec::new(),
            dynamics,
            pending: None,
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Appends `(time, h)` to the history.
    pub fn record(&mut self) {
        let h = coupled_distance(self);
        self.history.push((self.time, h));
    }

    fn next_atom(&mut self) -> (f64, EventDraw) {
        match self.pending.take() {
            Some(p) => p,
            None => {
                let (wait, draw) = self.dynamics.propose(&mut self.rng);
                (self.time + wait, draw)
            }
        }
    }

    fn apply(&mut self, draw: &EventDraw) {
        let (i, j) = (draw.first, draw.second);
        let (ai, aj, bi, bj) = (self.a[i], self.a[j], self.b[i], self.b[j]);
        let shift = match self.alignment {
            Alignment::Unaligned => 0.0,
            Alignment::Tanaka if draw.z <= self.k_a => {
                match (frame_of_relative(bi - bj), frame_of_relative(ai - aj)) {
                    (Some(fb), Some(fa)) => phi_zero_frames(&fb, &fa),
                    _ => 0.0,
                }
            }
            Alignment::Tanaka => 0.0,
        };
        self.proposals += 1;
        let (nbi, nbj) = collide_pair(&self.kernel, bi, bj, draw.z, draw.phi, self.k_b);
        if (nbi, nbj) != (bi, bj) {
            self.b[i] = nbi;
            self.b[j] = nbj;
            self.events_b += 1;
        }
        let (nai, naj) = collide_pair(&self.kernel, ai, aj, draw.z, draw.phi + shift, self.k_a);
        if (nai, naj) != (ai, aj) {
            self.a[i] = nai;
            self.a[j] = naj;
            self.events_a += 1;
        }
    }
}

/// One shared proposal applied to both systems.
pub fn coupled_step(state: &mut CoupledState) -> EventDraw {
    let (t, draw) = state.next_atom();
    state.time = t;
    state.apply(&draw);
    draw
}

/// Applies a given atom to both systems without moving the clock.
pub fn coupled_apply(state: &mut CoupledState, draw: &EventDraw) {
    state.apply(draw);
}

/// Advances both systems through every atom in `(time, until]`.
pub fn coupled_advance_to(state: &mut CoupledState, until: f64) {
    loop {
        let (t, draw) = state.next_atom();
        if t > until {
            state.pending = Some((t, draw));
            state.time = state.time.max(until);
            return;
        }
        state.time = t;
        state.apply(&draw);
    }
}

/// `(1/N) Σ |a_i - b_i|²`.
pub fn coupled_distance(state: &CoupledState) -> f64 {
    mean_squared_distance(&state.a, &state.b)
}

fn mean_squared_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).norm_sq()).sum::<f64>() / a.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledConfig {
    pub n_particles: usize,
    pub kernel: KernelSpec,
    pub k_a: f64,
    pub k_b: f64,
    pub horizon_t: f64,
    /// Sorted times in `[0, horizon_t]` where `h_t` is recorded.
    pub record_times: Vec<f64>,
    pub initial: InitialLaw,
    /// Dynamics seed; system B matches an uncoupled run with this seed.
    pub seed: u64,
    pub alignment: Alignment,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// `(t, h_t)` at each record time.
    pub history: Vec<(f64, f64)>,
    pub h_final: f64,
    pub final_a: Vec<Vec3>,
    pub final_b: Vec<Vec3>,
    pub events_a: u64,
    pub events_b: u64,
}

pub fn run_coupled(config: &CoupledConfig) -> Result<CoupledRun> {
    if !(config.horizon_t >= 0.0 && config.horizon_t.is_finite()) {
        return Err(KacError::Config(format!("horizon_t must be finite and >= 0, got {}", config.horizon_t)));
    }
    if config.record_times.windows(2).any(|w| !(w[0] <= w[1]))
        || config.record_times.iter().any(|&t| !(t >= 0.0 && t <= config.horizon_t))
    {
        return Err(KacError::Config("record_times must be sorted within [0, horizon_t]".into()));
    }
    let v = sample_initial(&config.initial, config.n_particles)?;
    let mut s = CoupledState::from_parts(
        config.kernel,
        config.k_a,
        config.k_b,
        v.clone(),
        v,
        stream(config.seed, Purpose::Dynamics, 0, 0),
        config.alignment,
    )?;
    for &t in &config.record_times {
        coupled_advance_to(&mut s, t);
        s.record();
    }
    coupled_advance_to(&mut s, config.horizon_t);
    Ok(CoupledRun {
        h_final: coupled_distance(&s),
        history: s.history,
        final_a: s.a,
        final_b: s.b,
        events_a: s.events_a,
        events_b: s.events_b,
    })
}

/// Parameters of a cutoff ladder study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffStudy {
    pub kernel: KernelSpec,
    pub n_particles: usize,
    /// Non-decreasing; the last level is the reference system.
    pub k_ladder: Vec<f64>,
    pub horizon_t: f64,
    pub replicas: usize,
    pub seed: u64,
    pub initial: InitialKind,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffRow {
    pub k: f64,
    pub replica: usize,
    pub h_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffScalingReport {
    pub k_max: f64,
    pub rows: Vec<CutoffRow>,
    /// `(K, mean h_T)` per level below the top.
    pub means: Vec<(f64, f64)>,
    /// Log-log fit of mean `h_T` against `K`; `None` when fewer than two
    /// levels have a positive mean.
    pub fit: Option<LogLogFit>,
}

/// Seeds of replica `r` at size `n`, shared by every level of a ladder.
pub fn replica_seeds(base_seed: u64, n: usize, replica: usize) -> (u64, u64) {
    (
        derive_seed(base_seed, Purpose::InitialVelocities, n as u64, replica as u64),
        derive_seed(base_seed, Purpose::Dynamics, n as u64, replica as u64),
    )
}

/// Couples each level `K` of the ladder with the top level and reports `h_T`.
pub fn cutoff_scaling_study(study: &CutoffStudy) -> Result<CutoffScalingReport> {
    if study.kernel.family() == KernelFamily::HardSphere {
        return Err(KacError::Config("hard spheres need no cutoff; the ladder study is for power laws".into()));
    }
    let ladder = &study.k_ladder;
    if ladder.len() < 2 {
        return Err(KacError::Config("k_ladder needs at least two levels".into()));
    }
    if ladder.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(KacError::Config("k_ladder must be non-decreasing".into()));
    }
    if study.replicas == 0 {
        return Err(KacError::Config("replicas must be positive".into()));
    }
    let k_max = *ladder.last().expect("non-empty");
    let levels = &ladder[..ladder.len() - 1];
    let jobs: Vec<(f64, usize)> = levels
        .iter()
        .flat_map(|&k| (0..study.replicas).map(move |r| (k, r)))
        .collect();
    let results = farm::map(&jobs, |&(k, r)| {
        let (init_seed, dyn_seed) = replica_seeds(study.seed, study.n_particles, r);
        let cfg = CoupledConfig {
            n_particles: study.n_particles,
            kernel: study.kernel,
            k_a: k,
            k_b: k_max,
            horizon_t: study.horizon_t,
            record_times: Vec::new(),
            initial: InitialLaw::new(study.initial, init_seed)?,
            seed: dyn_seed,
            alignment: study.alignment,
        };
        run_coupled(&cfg).map(|run| CutoffRow {
            k,
            replica: r,
            h_t: run.h_final,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let means: Vec<(f64, f64)> = rows
        .chunks(study.replicas)
        .map(|c| (c[0].k, c.iter().map(|r| r.h_t).sum::<f64>() / c.len() as f64))
        .collect();
    let positive: Vec<&(f64, f64)> = means.iter().filter(|m| m.1 > 0.0).collect();
    let ks: Vec<f64> = positive.iter().map(|m| m.0).collect();
    let hs: Vec<f64> = positive.iter().map(|m| m.1).collect();
    let fit = fit_log_log(&ks, &hs).ok();
    Ok(CutoffScalingReport {
        k_max,
        rows,
        means,
        fit,
    })
}
