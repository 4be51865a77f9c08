//! Experiment plans and their flat TOML form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupling::Alignment;
use crate::error::{KacError, Result};
use crate::initial::{InitialKind, InitialLaw};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Converge,
    Couple,
    Validate,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub mode: Mode,
    pub kernel: KernelSpec,
    pub initial: InitialKind,
    pub n_ladder: Vec<usize>,
    /// `None` means no cutoff (hard spheres only).
    pub cutoff_k: Option<f64>,
    pub horizon_t: f64,
    pub replicas: usize,
    pub base_seed: u64,
    /// Not part of the experiment's identity, so not serialized or hashed.
    #[serde(skip)]
    pub output_path: PathBuf,
    /// Reference ensemble size for convergence studies.
    pub reference_n: usize,
    /// Snapshots are taken at `grid_intervals + 1` equally spaced times.
    pub grid_intervals: usize,
    /// Cutoff levels for coupling studies; the last one is the reference.
    pub k_ladder: Vec<f64>,
    pub alignment: Alignment,
    /// Pass threshold on the fitted log-log slope (converge and couple).
    pub slope_ceiling: f64,
}

/// On-disk form. Every key is documented in the README.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    mode: Mode,
    kernel: KernelFamily,
    gamma: Option<f64>,
    nu: Option<f64>,
    #[serde(default = "default_initial")]
    initial: String,
    initial_energy: Option<f64>,
    initial_radius: Option<f64>,
    u1: Option<[f64; 3]>,
    u2: Option<[f64; 3]>,
    weight: Option<f64>,
    n_ladder: Vec<usize>,
    cutoff_k: Option<f64>,
    horizon_t: f64,
    replicas: usize,
    base_seed: u64,
    output_path: Option<PathBuf>,
    reference_n: Option<usize>,
    grid_intervals: Option<usize>,
    k_ladder: Option<Vec<f64>>,
    alignment: Option<Alignment>,
    slope_ceiling: Option<f64>,
}

fn default_initial() -> String {
    "gaussian".into()
}

fn config_err(msg: impl Into<String>) -> KacError {
    KacError::Config(msg.into())
}

impl RawPlan {
    fn into_plan(self) -> Result<ExperimentPlan> {
        let kernel = match self.kernel {
            KernelFamily::HardSphere => {
                if self.gamma.is_some() || self.nu.is_some() {
                    return Err(config_err("gamma and nu are fixed for hard spheres; remove them"));
                }
                KernelSpec::hard_sphere()
            }
            KernelFamily::PowerLaw => KernelSpec::power_law(
                self.gamma.ok_or_else(|| config_err("power_law kernel needs `gamma`"))?,
                self.nu.ok_or_else(|| config_err("power_law kernel needs `nu`"))?,
            )?,
        };
        let initial = match self.initial.as_str() {
            "gaussian" => InitialKind::IsotropicGaussian {
                energy_per_particle: self.initial_energy.unwrap_or(1.0),
            },
            "uniform_ball" => InitialKind::UniformBall {
                radius: self
                    .initial_radius
                    .ok_or_else(|| config_err("uniform_ball needs `initial_radius`"))?,
            },
            "two_point" => InitialKind::TwoPointMixture {
                u1: Vec3::from_array(self.u1.ok_or_else(|| config_err("two_point needs `u1`"))?),
                u2: Vec3::from_array(self.u2.ok_or_else(|| config_err("two_point needs `u2`"))?),
                w: self.weight.ok_or_else(|| config_err("two_point needs `weight`"))?,
            },
            other => {
                return Err(config_err(format!(
                    "unknown initial law `{other}`, expected gaussian, uniform_ball or two_point"
                )))
            }
        };
        let max_n = self.n_ladder.iter().copied().max().unwrap_or(0);
        let default_ceiling = if self.mode == Mode::Couple { -1.5 } else { -0.30 };
        let plan = ExperimentPlan {
            mode: self.mode,
            kernel,
            initial,
            n_ladder: self.n_ladder,
            cutoff_k: self.cutoff_k,
            horizon_t: self.horizon_t,
            replicas: self.replicas,
            base_seed: self.base_seed,
            output_path: self.output_path.unwrap_or_else(|| PathBuf::from("results")),
            reference_n: self.reference_n.unwrap_or(2 * max_n),
            grid_intervals: self.grid_intervals.unwrap_or(4),
            k_ladder: self.k_ladder.unwrap_or_default(),
            alignment: self.alignment.unwrap_or_default(),
            slope_ceiling: self.slope_ceiling.unwrap_or(default_ceiling),
        };
        plan.validate()?;
        Ok(plan)
    }
}

impl ExperimentPlan {
    /// Parses a flat TOML plan; unknown keys are errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawPlan = toml::from_str(text).map_err(|e| KacError::Config(e.message().to_string()))?;
        raw.into_plan()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| KacError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: RawPlan = toml::from_str(&text).map_err(|e| KacError::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        raw.into_plan()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ladder.is_empty() {
            return Err(config_err("n_ladder must not be empty"));
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err(format!(
                "n_ladder must be strictly increasing, got {:?}; a repeated N gives no variation for the slope fit",
                self.n_ladder
            )));
        }
        if self.n_ladder[0] < 2 {
            return Err(config_err("every ladder N must be at least 2"));
        }
        if self.replicas == 0 {
            return Err(config_err("replicas must be at least 1"));
        }
        if !(self.horizon_t >= 0.0 && self.horizon_t.is_finite()) {
            return Err(config_err(format!("horizon_t must be finite and >= 0, got {}", self.horizon_t)));
        }
        if self.grid_intervals == 0 {
            return Err(config_err("grid_intervals must be at least 1"));
        }
        match (self.kernel.family(), self.cutoff_k) {
            (KernelFamily::PowerLaw, None) => {
                return Err(config_err("power_law kernels need a finite `cutoff_k`"));
            }
            (_, Some(k)) if !(k >= 1.0 && k.is_finite()) => {
                return Err(config_err(format!("cutoff_k must be finite and >= 1, got {k}")));
            }
            _ => {}
        }
        InitialLaw::new(self.initial, 0)?;
        let max_n = *self.n_ladder.last().expect("non-empty");
        match self.mode {
            Mode::Converge => {
                if self.n_ladder.len() < 3 {
                    return Err(config_err("converge mode needs at least 3 ladder points"));
                }
                if self.reference_n < 2 * max_n {
                    return Err(config_err(format!(
                        "reference_n = {} must be at least twice the largest ladder N ({})",
                        self.reference_n, max_n
                    )));
                }
            }
            Mode::Couple => {
                if self.kernel.is_hard_sphere() {
                    return Err(config_err("couple mode runs a cutoff ladder and needs a power_law kernel"));
                }
                if self.k_ladder.len() < 2 {
                    return Err(config_err("couple mode needs `k_ladder` with at least two levels"));
                }
                if self.k_ladder.iter().any(|k| !(*k >= 1.0 && k.is_finite())) {
                    return Err(config_err("k_ladder levels must be finite and >= 1"));
                }
                if self.k_ladder.windows(2).any(|w| w[0] > w[1]) {
                    return Err(config_err("k_ladder must be non-decreasing"));
                }
            }
            Mode::Simulate | Mode::Validate => {}
        }
        Ok(())
    }

    /// Cutoff as used by the simulator (`∞` for none).
    pub fn cutoff(&self) -> f64 {
        self.cutoff_k.unwrap_or(f64::INFINITY)
    }

    /// Lowercase hex SHA-256 of the canonical JSON form of the plan.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("plan serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
