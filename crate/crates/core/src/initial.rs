//! Initial velocity laws and ensemble normalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{KacError, Result};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    /// Centered Gaussian with `E|v|² = energy_per_particle`.
    IsotropicGaussian { energy_per_particle: f64 },
    /// Uniform on the ball of the given radius.
    UniformBall { radius: f64 },
    /// `w δ_{u1} + (1 - w) δ_{u2}`.
    TwoPointMixture { u1: Vec3, u2: Vec3, w: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialLaw {
    pub kind: InitialKind,
    pub seed: u64,
}

impl InitialLaw {
    pub fn new(kind: InitialKind, seed: u64) -> Result<Self> {
        let law = InitialLaw { kind, seed };
        law.validate()?;
        Ok(law)
    }

    pub fn gaussian(energy_per_particle: f64, seed: u64) -> Self {
        InitialLaw {
            kind: InitialKind::IsotropicGaussian { energy_per_particle },
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        InitialLaw { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            InitialKind::IsotropicGaussian { energy_per_particle: e } if !(e > 0.0 && e.is_finite()) => {
                Err(KacError::Config(format!("gaussian energy must be positive, got {e}")))
            }
            InitialKind::UniformBall { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(KacError::Config(format!("ball radius must be positive, got {radius}")))
            }
            InitialKind::TwoPointMixture { u1, u2, w } => {
                if u1 == u2 {
                    Err(KacError::Config("two-point mixture with u1 == u2 is a Dirac mass".into()))
                } else if !(w > 0.0 && w < 1.0) {
                    Err(KacError::Config(format!("mixture weight must lie in (0, 1), got {w}")))
                } else if !(u1.is_finite() && u2.is_finite()) {
                    Err(KacError::Config("mixture atoms must be finite".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// `n` i.i.d. draws from `law`, determined by `law.seed`.
pub fn sample_initial(law: &InitialLaw, n: usize) -> Result<Vec<Vec3>> {
    if n < 2 {
        return Err(KacError::Config(format!("need at least 2 particles, got {n}")));
    }
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(law.seed);
    let out = match law.kind {
        InitialKind::IsotropicGaussian { energy_per_particle } => {
            let sigma = (energy_per_particle / 3.0).sqrt();
            (0..n)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    let y: f64 = rng.sample(StandardNormal);
                    let z: f64 = rng.sample(StandardNormal);
                    Vec3::new(x, y, z) * sigma
                })
                .collect()
        }
        InitialKind::UniformBall { radius } => (0..n)
            .map(|_| loop {
                let v = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if v.norm_sq() <= 1.0 {
                    break v * radius;
                }
            })
            .collect(),
        InitialKind::TwoPointMixture { u1, u2, w } => (0..n)
            .map(|_| if rng.random::<f64>() < w { u1 } else { u2 })
            .collect(),
    };
    Ok(out)
}

/// Shifts to zero total momentum and rescales to `(1/n) Σ |v|² = 1`.
pub fn normalize_ensemble(velocities: &[Vec3]) -> Result<Vec<Vec3>> {
    let n = velocities.len();
    if n < 2 {
        return Err(KacError::Config(format!("need at least 2 velocities, got {n}")));
    }
    let mean = Vec3::sum(velocities) / n as f64;
    let centered: Vec<Vec3> = velocities.iter().map(|&v| v - mean).collect();
    let energy = centered.iter().map(|v| v.norm_sq()).sum::<f64>() / n as f64;
    if !(energy > 0.0) || velocities.iter().all(|&v| v == velocities[0]) {
        return Err(KacError::Degenerate(
            "all velocities are equal (Dirac mass)".into(),
        ));
    }
    let scale = energy.sqrt().recip();
    Ok(centered.into_iter().map(|v| v * scale).collect())
}
