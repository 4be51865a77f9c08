//! Built-in self-checks with fixed seeds, reported as JSON.
//!
//! The collision map and the inverse tail integral are injectable so that
//! mutation tests can confirm each suite actually detects faults.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{collide_pair, deflection_a, gamma_vec, phi_zero};
use crate::initial::InitialLaw;
use crate::kernel::{povzner_constant, KernelSpec};
use crate::rng::{derive_seed, stream, Purpose, SimRng};
use crate::simulator::{
    calibrate_povzner_tilde, povzner_audit_with, run_to_end, ParticleState, SimConfig,
};
use crate::transport::{
    mixture_convexity_check, w2_squared_brute_force, w2_squared_exact, EmpiricalMeasure,
};
use crate::vec3::Vec3;

pub type CollideFn = fn(&KernelSpec, Vec3, Vec3, f64, f64, f64) -> (Vec3, Vec3);
pub type InverseFn = fn(&KernelSpec, f64) -> Result<f64>;

/// Functions under test.
#[derive(Clone, Copy)]
pub struct ValidationHooks {
    pub collide: CollideFn,
    pub big_g: InverseFn,
}

impl Default for ValidationHooks {
    fn default() -> Self {
        ValidationHooks {
            collide: collide_pair,
            big_g: |k, z| k.big_g(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed error in the suite's own units.
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    #[serde(skip)]
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

struct Tally {
    checks: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn check(&mut self, err: f64, tol: f64) {
        self.checks += 1;
        // NaN errors count as failures.
        if !(err <= tol) {
            self.failures += 1;
        }
        if err.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(err);
        }
    }

    fn finish(self, name: &str, detail: String) -> SuiteResult {
        SuiteResult {
            name: name.to_string(),
            passed: self.failures == 0 && self.checks > 0,
            checks: self.checks,
            failures: self.failures,
            worst: self.worst,
            detail,
        }
    }
}

fn suite_rng(seed: u64, suite: u64) -> SimRng {
    stream(seed, Purpose::Validation, suite, 0)
}

/// Gaussian vector with a log-uniform scale in `[1e-2, 1e2]`.
fn random_velocity(rng: &mut SimRng) -> Vec3 {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    Vec3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    ) * scale
}

fn families() -> [KernelSpec; 3] {
    [
        KernelSpec::hard_sphere(),
        KernelSpec::power_law(0.5, 0.5).expect("valid"),
        KernelSpec::power_law(0.2, 0.8).expect("valid"),
    ]
}

/// `|G(H(θ)) - θ| ≤ 1e-10` on 200 angles per family, plus the exact hard-sphere
/// closed form on a grid of `z`.
pub fn suite_kernel_round_trip(hooks: &ValidationHooks) -> SuiteResult {
    let mut t = Tally::new();
    for spec in families() {
        for k in 1..=200 {
            let theta = FRAC_PI_2 * k as f64 / 200.0;
            let err = spec
                .big_h(theta)
                .and_then(|h| (hooks.big_g)(&spec, h))
                .map_or(f64::NAN, |g| (g - theta).abs());
            t.check(err, 1e-10);
        }
    }
    let hs = KernelSpec::hard_sphere();
    for k in 0..=400 {
        let z = 4.0 * k as f64 / 400.0;
        let err = (hooks.big_g)(&hs, z).map_or(f64::NAN, |g| (g - (FRAC_PI_2 - z).max(0.0)).abs());
        t.check(err, 0.0);
    }
    t.finish("kernel_round_trip", "G(H(theta)) vs theta on 200 angles, 3 kernels; hard-sphere G exact".into())
}

/// `|a| = √((1 - cos θ)/2) |v - v*|` to 1e-13 relative.
pub fn suite_norm_law(seed: u64, draws: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 2);
    let mut t = Tally::new();
    for _ in 0..draws {
        let v = random_velocity(&mut rng);
        let vs = random_velocity(&mut rng);
        let theta = rng.random_range(0.0..FRAC_PI_2);
        let phi = rng.random_range(0.0..TAU);
        let a = deflection_a(v, vs, theta, phi);
        // √((1 - cos θ)/2) = sin(θ/2) for θ in [0, π].
        let expected = (0.5 * theta).sin() * (v - vs).norm();
        let err = if expected == 0.0 {
            a.norm()
        } else {
            (a.norm() - expected).abs() / expected
        };
        t.check(err, 1e-13);
    }
    t.finish("norm_law", format!("{draws} random (v, v*, theta, phi), relative tolerance 1e-13"))
}

/// Momentum and energy conservation of single collisions and of a full run.
pub fn suite_conservation(hooks: &ValidationHooks, seed: u64, draws: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 3);
    let mut t = Tally::new();
    for spec in families() {
        for _ in 0..draws / 3 {
            let v = random_velocity(&mut rng);
            let vs = random_velocity(&mut rng);
            let z = rng.random::<f64>() * 20.0;
            let phi = rng.random_range(0.0..TAU);
            let (a, b) = (hooks.collide)(&spec, v, vs, z, phi, 16.0);
            let p_scale = v.norm() + vs.norm();
            let e_scale = v.norm_sq() + vs.norm_sq();
            t.check(((a + b) - (v + vs)).norm() / p_scale, 1e-13);
            t.check((a.norm_sq() + b.norm_sq() - e_scale).abs() / e_scale, 1e-13);
        }
    }
    // A full hard-sphere run through the simulator.
    let n = 256;
    let cfg = SimConfig {
        n_particles: n,
        kernel: KernelSpec::hard_sphere(),
        cutoff_k: f64::INFINITY,
        horizon_t: 10.0,
        snapshot_times: vec![],
        initial: InitialLaw::gaussian(1.0, derive_seed(seed, Purpose::Validation, 3, 1)),
        seed: derive_seed(seed, Purpose::Validation, 3, 2),
    };
    match ParticleState::from_config(&cfg).and_then(|s| run_to_end(&cfg, s)) {
        Ok(end) => {
            let e_per = end.total_energy / n as f64;
            t.check(end.relative_energy_drift(), 1e-9);
            t.check(end.momentum_drift() / (n as f64 * e_per).sqrt(), 1e-11);
        }
        Err(_) => t.check(f64::NAN, 0.0),
    }
    t.finish(
        "conservation",
        format!("{draws} single collisions (relative 1e-13) and one hard-sphere run with N = {n}"),
    )
}

/// Povzner inequality on random pairs for each order and kernel family.
pub fn suite_povzner(seed: u64, pairs: usize, orders: &[f64]) -> SuiteResult {
    let mut rng = suite_rng(seed, 4);
    let mut t = Tally::new();
    let mut detail = format!("{pairs} random pairs per (kernel, p);");
    for spec in [KernelSpec::hard_sphere(), KernelSpec::power_law(0.5, 0.5).expect("valid")] {
        for &p in orders {
            let constants = povzner_constant(p, &spec)
                .and_then(|a| calibrate_povzner_tilde(&spec, p).map(|at| (a, at)));
            let Ok((a_p, a_tilde)) = constants else {
                t.check(f64::NAN, 0.0);
                continue;
            };
            detail.push_str(&format!(" {:?} p={p}: A_p={a_p:.6e} A~_p={a_tilde:.6e};", spec.family()));
            for _ in 0..pairs {
                let v = random_velocity(&mut rng);
                let vs = random_velocity(&mut rng);
                match povzner_audit_with(&spec, v, vs, p, a_p, a_tilde) {
                    Ok(a) => {
                        let scale = a.rhs.abs().max(a.lhs.abs()).max(f64::MIN_POSITIVE);
                        t.check(if a.holds { 0.0 } else { (a.lhs - a.rhs) / scale }, 0.0);
                    }
                    Err(_) => t.check(f64::NAN, 0.0),
                }
            }
        }
    }
    t.finish("povzner", detail)
}

fn random_cloud(rng: &mut SimRng, n: usize) -> EmpiricalMeasure {
    let pts = (0..n)
        .map(|_| {
            Vec3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        })
        .collect();
    EmpiricalMeasure::new(pts).expect("finite points")
}

/// Exact solver vs brute force, metric axioms and mixture convexity.
pub fn suite_w2_exactness(seed: u64, instances: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 5);
    let mut t = Tally::new();
    for _ in 0..instances {
        let n = rng.random_range(1..=7usize);
        let (a, b, c) = (random_cloud(&mut rng, n), random_cloud(&mut rng, n), random_cloud(&mut rng, n));
        let res: Result<()> = (|| {
            let ab = w2_squared_exact(&a, &b)?;
            t.check((ab - w2_squared_brute_force(&a, &b)?).abs(), 1e-12);
            t.check((ab - w2_squared_exact(&b, &a)?).abs(), 1e-12);
            t.check(w2_squared_exact(&a, &a)?, 0.0);
            let (d_ab, d_bc, d_ac) = (ab.sqrt(), w2_squared_exact(&b, &c)?.sqrt(), w2_squared_exact(&a, &c)?.sqrt());
            t.check((d_ac - d_ab - d_bc).max(0.0), 1e-12);
            if n >= 2 {
                let k = n / 2;
                let split = |m: &EmpiricalMeasure| {
                    (
                        EmpiricalMeasure::new(m.points()[..k].to_vec()),
                        EmpiricalMeasure::new(m.points()[k..].to_vec()),
                    )
                };
                let (f, g) = split(&a);
                let (fp, gp) = split(&b);
                let ok = mixture_convexity_check(&f?, &fp?, &g?, &gp?, k as f64 / n as f64)?;
                t.check(if ok { 0.0 } else { 1.0 }, 0.0);
            }
            Ok(())
        })();
        if res.is_err() {
            t.check(f64::NAN, 0.0);
        }
    }
    t.finish(
        "w2_exactness",
        format!("{instances} instances with n <= 7: brute force (1e-12), symmetry, identity, triangle, convexity"),
    )
}

/// Proposal count on `[0, 1]` against Poisson(π K N) over replicas.
pub fn suite_event_count(seed: u64, n: usize, k: f64, replicas: usize) -> SuiteResult {
    let spec = KernelSpec::power_law(0.5, 0.5).expect("valid");
    let counts: Vec<f64> = (0..replicas)
        .map(|r| {
            let cfg = SimConfig {
                n_particles: n,
                kernel: spec,
                cutoff_k: k,
                horizon_t: 1.0,
                snapshot_times: vec![],
                initial: InitialLaw::gaussian(1.0, derive_seed(seed, Purpose::Validation, 6, r as u64)),
                seed: derive_seed(seed, Purpose::Validation, 7, r as u64),
            };
            ParticleState::from_config(&cfg)
                .and_then(|s| run_to_end(&cfg, s))
                .map_or(f64::NAN, |s| s.event_count as f64)
        })
        .collect();
    let lambda = PI * k * n as f64;
    let mean = counts.iter().sum::<f64>() / replicas as f64;
    let sigma = (lambda / replicas as f64).sqrt();
    let mut t = Tally::new();
    t.check((mean - lambda).abs() / sigma, 4.0);
    t.finish(
        "event_count",
        format!("mean {mean:.3} vs pi K N = {lambda:.3} over {replicas} replicas (N = {n}, K = {k}); error in sigmas"),
    )
}

fn alignment_functional(x: Vec3, y: Vec3, psi: f64) -> f64 {
    const NODES: usize = 64;
    let h = TAU / NODES as f64;
    (0..NODES)
        .map(|k| {
            let phi = h * k as f64;
            let gx = gamma_vec(x, phi).expect("nonzero") / x.norm();
            let gy = gamma_vec(y, phi + psi).expect("nonzero") / y.norm();
            (gx - gy).norm_sq() * h
        })
        .sum()
}

/// The alignment angle minimizes the transverse mismatch (grid oracle).
pub fn suite_alignment(seed: u64, pairs: usize) -> SuiteResult {
    let mut rng = suite_rng(seed, 8);
    let mut t = Tally::new();
    for _ in 0..pairs {
        let x = random_velocity(&mut rng);
        let y = random_velocity(&mut rng);
        let Ok(psi) = phi_zero(x, y) else {
            t.check(f64::NAN, 0.0);
            continue;
        };
        let at = alignment_functional(x, y, psi);
        let grid_min = (0..1000)
            .map(|k| alignment_functional(x, y, TAU * k as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        t.check((at - grid_min).max(0.0), 1e-12);
    }
    t.finish("alignment", format!("{pairs} random pairs against a 1000-point grid minimum"))
}

/// Runs every suite at its default size.
pub fn run_validation_suite(seed: u64) -> ValidationReport {
    run_validation_suite_with(seed, &ValidationHooks::default())
}

pub fn run_validation_suite_with(seed: u64, hooks: &ValidationHooks) -> ValidationReport {
    let suites = vec![
        suite_kernel_round_trip(hooks),
        suite_norm_law(seed, 100_000),
        suite_conservation(hooks, seed, 100_000),
        suite_povzner(seed, 20, &[3.0, 4.0]),
        suite_w2_exactness(seed, 200),
        suite_event_count(seed, 64, 4.0, 100),
        suite_alignment(seed, 50),
    ];
    ValidationReport {
        seed,
        all_passed: suites.iter().all(|s| s.passed),
        suites,
    }
}
