//! Kac's N-particle system for the spatially homogeneous Boltzmann equation
//! with hard potentials and hard spheres.
//!
//! * [`kernel`]: angular laws β, H, G and the integrals built on them.
//! * [`geometry`]: collision kinematics, deflection vectors and the azimuthal
//!   alignment angle used by couplings.
//! * [`initial`]: initial velocity laws.
//! * [`simulator`]: exact event-driven simulation (cutoff for power laws,
//!   thinning for hard spheres) with moment and Povzner diagnostics.
//! * [`transport`]: exact and sliced squared Wasserstein-2 distances.
//! * [`coupling`]: shared-noise couplings for cutoff and alignment studies.
//! * [`experiment`]: config files, study drivers and report files.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod experiment;
pub mod farm;
pub mod geometry;
pub mod initial;
pub mod kernel;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod transport;
mod vec3;

pub use error::{KacError, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use vec3::Vec3;
