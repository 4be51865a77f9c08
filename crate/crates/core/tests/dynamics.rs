use std::f64::consts::PI;

use kac_core::coupling::{run_coupled, Alignment, CoupledConfig};
use kac_core::initial::InitialLaw;
use kac_core::rng::{derive_seed, stream, Purpose};
use kac_core::simulator::{empirical_moment, run, step, Dynamics, EventDraw, ParticleState, SimConfig};
use kac_core::{KernelSpec, Vec3};

fn pl() -> KernelSpec {
    KernelSpec::power_law(0.5, 0.5).unwrap()
}

#[test]
fn relabeling_permutes_the_trajectory() {
    let v = vec![Vec3::new(1.0, 0.2, -0.3), Vec3::new(-0.4, 0.9, 0.1), Vec3::new(0.0, -0.7, 0.8)];
    // sigma maps old labels to new labels.
    let sigma = [2usize, 0, 1];
    let mut w = vec![Vec3::ZERO; 3];
    for (i, &s) in sigma.iter().enumerate() {
        w[s] = v[i];
    }
    for spec in [pl(), KernelSpec::hard_sphere()] {
        let energy: f64 = v.iter().map(|x| x.norm_sq()).sum();
        let dynamics = Dynamics::new(spec, 8.0, 3, energy);
        let mut rng = stream(9, Purpose::Dynamics, 0, 0);
        let (mut a, mut b) = (v.clone(), w.clone());
        for _ in 0..2000 {
            let (_, draw) = dynamics.propose(&mut rng);
            dynamics.apply(&mut a, &draw);
            let relabeled = EventDraw {
                first: sigma[draw.first],
                second: sigma[draw.second],
                ..draw
            };
            dynamics.apply(&mut b, &relabeled);
        }
        for (i, &s) in sigma.iter().enumerate() {
            assert_eq!(a[i], b[s]);
        }
    }
}

#[test]
fn hard_sphere_thinning_rate() {
    // Pairs (1,2), (1,3), (2,3) have speeds 2, 1, 1, so the accepted rate is
    // π² (2 + 1 + 1) / (N - 1) = 2π² while the majorant is 3π².
    let v = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::ZERO];
    let cfg = SimConfig {
        n_particles: 3,
        kernel: KernelSpec::hard_sphere(),
        cutoff_k: f64::INFINITY,
        horizon_t: 1.0,
        snapshot_times: vec![],
        initial: InitialLaw::gaussian(1.0, 0),
        seed: 0,
    };
    let replicas = 200;
    let mut times = Vec::with_capacity(replicas);
    let mut proposals = 0u64;
    for r in 0..replicas {
        let mut s = ParticleState::new(v.clone(), stream(77, Purpose::Dynamics, r as u64, 0)).unwrap();
        while s.event_count == 0 {
            step(&cfg, &mut s);
        }
        proposals += s.proposal_count;
        times.push(s.time);
    }
    let rate = 2.0 * PI * PI;
    let mean = times.iter().sum::<f64>() / replicas as f64;
    let sigma = 1.0 / rate / (replicas as f64).sqrt();
    assert!((mean - 1.0 / rate).abs() <= 3.0 * sigma, "mean {mean} vs {}", 1.0 / rate);
    let per = proposals as f64 / replicas as f64;
    // Geometric(2/3) proposal count: mean 1.5, variance 0.75.
    assert!((per - 1.5).abs() < 3.0 * (0.75 / replicas as f64).sqrt(), "{per}");
}

#[test]
fn power_law_event_count_is_poisson() {
    let (n, k) = (128usize, 8.0);
    let replicas = 200;
    let counts: Vec<f64> = (0..replicas)
        .map(|r| {
            let cfg = SimConfig {
                n_particles: n,
                kernel: pl(),
                cutoff_k: k,
                horizon_t: 1.0,
                snapshot_times: vec![1.0],
                initial: InitialLaw::gaussian(1.0, r),
                seed: 1000 + r,
            };
            run(&cfg).unwrap()[0].event_count as f64
        })
        .collect();
    let lambda = PI * k * n as f64;
    let mean = counts.iter().sum::<f64>() / replicas as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (replicas as f64 - 1.0);
    assert!((mean - lambda).abs() <= 4.0 * (lambda / replicas as f64).sqrt());
    // Dispersion index of a Poisson count is 1.
    assert!((var / lambda - 1.0).abs() < 0.3, "dispersion {}", var / lambda);
}

#[test]
fn coupled_system_b_is_a_valid_simulation() {
    let (n, t, replicas) = (64usize, 0.5, 100u64);
    let mut coupled_m4 = Vec::new();
    let mut plain_m4 = Vec::new();
    for r in 0..replicas {
        let init = InitialLaw::gaussian(1.0, derive_seed(5, Purpose::InitialVelocities, 0, r));
        let run_c = run_coupled(&CoupledConfig {
            n_particles: n,
            kernel: pl(),
            k_a: 2.0,
            k_b: 16.0,
            horizon_t: t,
            record_times: vec![],
            initial: init,
            seed: derive_seed(5, Purpose::Dynamics, 0, r),
            alignment: Alignment::Tanaka,
        })
        .unwrap();
        let v0 = kac_core::initial::sample_initial(&init, n).unwrap();
        // m2 is conserved exactly by both.
        let m2 = empirical_moment(&v0, 2.0);
        assert!((empirical_moment(&run_c.final_b, 2.0) - m2).abs() <= 1e-12 * m2);
        coupled_m4.push(empirical_moment(&run_c.final_b, 4.0));

        // Independent uncoupled runs from a different seed family.
        let plain = run(&SimConfig {
            n_particles: n,
            kernel: pl(),
            cutoff_k: 16.0,
            horizon_t: t,
            snapshot_times: vec![t],
            initial: InitialLaw::gaussian(1.0, derive_seed(6, Purpose::InitialVelocities, 0, r)),
            seed: derive_seed(6, Purpose::Dynamics, 0, r),
        })
        .unwrap();
        plain_m4.push(empirical_moment(&plain[0].velocities, 4.0));
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let se = ((var(&coupled_m4) + var(&plain_m4)) / replicas as f64).sqrt();
    let diff = mean(&coupled_m4) - mean(&plain_m4);
    assert!(diff.abs() <= 3.0 * se, "m4 difference {diff} vs 3 se {}", 3.0 * se);
}
