//! Three-dimensional collision kinematics in the (θ, φ) parameterization.
//!
//! For a relative velocity `X = v - v*` the frame `(X/|X|, I(X)/|X|, J(X)/|X|)` is a
//! right-handed orthonormal basis and `Γ(X, φ) = cos φ I(X) + sin φ J(X)`.
//! The post-collision velocity is `v' = v + a(v, v*, θ, φ)` with
//!
//! ```text
//! a = -(1 - cos θ)/2 (v - v*) + sin θ / 2 Γ(v - v*, φ)
//! ```
//!
//! The frame convention: take the coordinate axis least aligned with `X`
//! (lowest index on ties), Gram–Schmidt it against `X/|X|` to get `e2`, and set
//! `e3 = e1 × e2`.

use std::f64::consts::TAU;

use crate::error::{domain, Result};
use crate::kernel::{one_minus_cos, KernelSpec};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

const AXES: [Vec3; 3] = [
    Vec3::new(1.0, 0.0, 0.0),
    Vec3::new(0.0, 1.0, 0.0),
    Vec3::new(0.0, 0.0, 1.0),
];

#[inline]
fn frame_unchecked(x: Vec3, norm: f64) -> Frame {
    let e1 = x / norm;
    let mags = [e1.x.abs(), e1.y.abs(), e1.z.abs()];
    let mut k = 0;
    for i in 1..3 {
        if mags[i] < mags[k] {
            k = i;
        }
    }
    let axis = AXES[k];
    let t = axis - e1 * axis.dot(e1);
    let e2 = t / t.norm();
    let e3 = e1.cross(e2);
    Frame { e1, e2, e3 }
}

/// Orthonormal right-handed frame with `e1 = x / |x|`.
pub fn frame_of(x: Vec3) -> Result<Frame> {
    let norm = x.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(domain("frame_of", format!("vector {x:?} has no direction")));
    }
    Ok(frame_unchecked(x, norm))
}

/// Γ(X, φ) = |X| (cos φ e2 + sin φ e3).
pub fn gamma_vec(x: Vec3, phi: f64) -> Result<Vec3> {
    let f = frame_of(x)?;
    let (s, c) = phi.sin_cos();
    Ok((f.e2 * c + f.e3 * s) * x.norm())
}

#[inline]
fn deflection_from_relative(rel: Vec3, rel_norm: f64, theta: f64, phi: f64) -> Vec3 {
    let f = frame_unchecked(rel, rel_norm);
    let (sp, cp) = phi.sin_cos();
    let transverse = (f.e2 * cp + f.e3 * sp) * rel_norm;
    rel * (-0.5 * one_minus_cos(theta)) + transverse * (0.5 * theta.sin())
}

/// The deflection vector `a(v, v*, θ, φ)`; zero when `v = v*`.
pub fn deflection_a(v: Vec3, v_star: Vec3, theta: f64, phi: f64) -> Vec3 {
    let rel = v - v_star;
    let n = rel.norm();
    if n == 0.0 || theta == 0.0 {
        return Vec3::ZERO;
    }
    deflection_from_relative(rel, n, theta, phi)
}

/// `c_K(v, v*, z, φ) = a(v, v*, G(z / |v - v*|^γ), φ) 1{z ≤ K}`.
///
/// `cutoff_k` may be `f64::INFINITY`.
pub fn deflection_c(spec: &KernelSpec, v: Vec3, v_star: Vec3, z: f64, phi: f64, cutoff_k: f64) -> Vec3 {
    if z > cutoff_k {
        return Vec3::ZERO;
    }
    let rel = v - v_star;
    let n = rel.norm();
    if n == 0.0 {
        return Vec3::ZERO;
    }
    let theta = spec.deflection_angle(z, n);
    if theta == 0.0 {
        return Vec3::ZERO;
    }
    deflection_from_relative(rel, n, theta, phi)
}

/// Binary collision of the ordered pair `(v_i, v_j)`: `v_i` gains `c` and `v_j`
/// loses it, so momentum and energy are conserved.
#[inline]
pub fn collide_pair(
    spec: &KernelSpec,
    v_i: Vec3,
    v_j: Vec3,
    z: f64,
    phi: f64,
    cutoff_k: f64,
) -> (Vec3, Vec3) {
    let c = deflection_c(spec, v_i, v_j, z, phi, cutoff_k);
    (v_i + c, v_j - c)
}

/// Azimuthal shift `ψ` minimizing `∫_0^{2π} |Γ(X,φ)/|X| - Γ(Y,φ+ψ)/|Y||² dφ`.
///
/// Expanding the square, the functional is `2π - 2π[(A22 + A33) cos ψ + (A23 - A32) sin ψ]`
/// with `Aab = e_a(X) · e_b(Y)`, so the minimizer is an `atan2`. Antipodal
/// directions (and any other case where both coefficients vanish) give 0.
pub fn phi_zero(x: Vec3, y: Vec3) -> Result<f64> {
    let fx = frame_of(x).map_err(|_| domain("phi_zero", "first vector is zero"))?;
    let fy = frame_of(y).map_err(|_| domain("phi_zero", "second vector is zero"))?;
    Ok(phi_zero_frames(&fx, &fy))
}

#[inline]
pub(crate) fn phi_zero_frames(fx: &Frame, fy: &Frame) -> f64 {
    if fx.e1.dot(fy.e1) <= -1.0 + 1e-15 {
        return 0.0;
    }
    let cos_part = fx.e2.dot(fy.e2) + fx.e3.dot(fy.e3);
    let sin_part = fx.e2.dot(fy.e3) - fx.e3.dot(fy.e2);
    if cos_part == 0.0 && sin_part == 0.0 {
        return 0.0;
    }
    let psi = sin_part.atan2(cos_part);
    let psi = if psi < 0.0 { psi + TAU } else { psi };
    if psi >= TAU {
        0.0
    } else {
        psi
    }
}

/// Nonzero relative velocity's frame, or `None` for coincident velocities.
#[inline]
pub(crate) fn frame_of_relative(rel: Vec3) -> Option<Frame> {
    let n = rel.norm();
    (n > 0.0).then(|| frame_unchecked(rel, n))
}
