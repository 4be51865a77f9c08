use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{domain, Result};
use crate::geometry::frame_of_relative;
use crate::kernel::{one_minus_cos, povzner_constant, KernelFamily, KernelSpec};
use crate::quadrature::Quadrature;
use crate::vec3::Vec3;

/// `(1/N) Σ |v_i|^p`.
pub fn empirical_moment(velocities: &[Vec3], p: f64) -> f64 {
    if velocities.is_empty() {
        return 0.0;
    }
    let sum: f64 = if p == 2.0 {
        velocities.iter().map(|v| v.norm_sq()).sum()
    } else {
        velocities.iter().map(|v| v.norm_sq().powf(0.5 * p)).sum()
    };
    sum / velocities.len() as f64
}

/// Outcome of a Povzner check for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovznerAudit {
    /// `∫_0^∞ ∫_0^{2π} (|v'|^p + |v'*|^p - |v|^p - |v*|^p) dφ dz`.
    pub lhs: f64,
    /// `-A_p x^γ (|v|^p + |v*|^p) + Ã_p x^γ (|v|^{p-2}|v*|² + |v*|^{p-2}|v|²)`.
    pub rhs: f64,
    pub holds: bool,
}

const PHI_NODES: usize = 128;

/// `|w + δ|^{p/2} - |w|^{p/2}` for `w = |u|² ≥ 0`, without cancellation.
#[inline]
fn power_increment(w: f64, delta: f64, p: f64) -> f64 {
    if w == 0.0 {
        return delta.max(0.0).powf(0.5 * p);
    }
    let ratio = (delta / w).max(-1.0);
    w.powf(0.5 * p) * (0.5 * p * ratio.ln_1p()).exp_m1()
}

/// φ-integral of the p-th moment increment at deflection angle θ.
///
/// Uses `|v'|² = |v|² + δ`, `|v'*|² = |v*|² - δ` with
/// `δ = (1 - cos θ)(|v*|² - |v|²)/2 + sin θ v·Γ(v - v*, φ)`.
fn phi_integral(v: Vec3, v_star: Vec3, e2: Vec3, e3: Vec3, x: f64, theta: f64, p: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let w = v.norm_sq();
    let w_star = v_star.norm_sq();
    let radial = 0.5 * one_minus_cos(theta) * (w_star - w);
    let s = theta.sin() * x;
    let (a2, a3) = (v.dot(e2), v.dot(e3));
    let h = TAU / PHI_NODES as f64;
    (0..PHI_NODES)
        .map(|k| {
            let (sp, cp) = (h * k as f64).sin_cos();
            let delta = radial + s * (a2 * cp + a3 * sp);
            power_increment(w, delta, p) + power_increment(w_star, -delta, p)
        })
        .sum::<f64>()
        * h
}

/// The left side of the Povzner inequality, by quadrature in `z`.
pub(crate) fn povzner_lhs(spec: &KernelSpec, v: Vec3, v_star: Vec3, p: f64) -> f64 {
    let rel = v - v_star;
    let Some(frame) = frame_of_relative(rel) else {
        return 0.0;
    };
    let x = rel.norm();
    let f = |z: f64| phi_integral(v, v_star, frame.e2, frame.e3, x, spec.deflection_angle(z, x), p);
    let q = Quadrature {
        abs_tol: 1e-11 * (v.norm_sq() + v_star.norm_sq()).powf(0.5 * p).max(1e-300),
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    match spec.family() {
        KernelFamily::HardSphere => q.integrate(f, 0.0, FRAC_PI_2 * x).value,
        KernelFamily::PowerLaw => {
            let scale = spec.speed_factor(x);
            q.integrate(f, 0.0, scale).value + q.integrate_to_infinity(f, scale).value
        }
    }
}

fn moment_terms(v: Vec3, v_star: Vec3, p: f64) -> (f64, f64) {
    let (a, b) = (v.norm(), v_star.norm());
    let s = a.powf(p) + b.powf(p);
    let m = a.powf(p - 2.0) * b * b + b.powf(p - 2.0) * a * a;
    (s, m)
}

/// Calibrates Ã_p: 1.05 times the largest value of
/// `(lhs + A_p x^γ S) / (x^γ M)` over a grid of pairs with `|v| = 1`,
/// `|v*| = r ∈ (0, 1]` and angle `α ∈ [0, π]` between them. Both sides scale
/// like `|v|^{p+γ}` and are symmetric in `(v, v*)`, so the grid covers all pairs.
pub fn calibrate_povzner_tilde(spec: &KernelSpec, p: f64) -> Result<f64> {
    let a_p = povzner_constant(p, spec)?;
    let mut sup = 0.0f64;
    for ir in 1..=20 {
        let r = ir as f64 / 20.0;
        for ia in 0..=24 {
            let alpha = PI * ia as f64 / 24.0;
            let v = Vec3::new(1.0, 0.0, 0.0);
            let vs = Vec3::new(r * alpha.cos(), r * alpha.sin(), 0.0);
            let x = (v - vs).norm();
            if x < 1e-12 {
                continue;
            }
            let lhs = povzner_lhs(spec, v, vs, p);
            let (s, m) = moment_terms(v, vs, p);
            let xg = spec.speed_factor(x);
            sup = sup.max((lhs + a_p * xg * s) / (xg * m));
        }
    }
    Ok(1.05 * sup)
}

/// Povzner audit with precomputed constants.
pub fn povzner_audit_with(
    spec: &KernelSpec,
    v: Vec3,
    v_star: Vec3,
    p: f64,
    a_p: f64,
    a_tilde: f64,
) -> Result<PovznerAudit> {
    if p.is_nan() || p <= 2.0 {
        return Err(domain("povzner_audit", format!("order p = {p} must exceed 2")));
    }
    let lhs = povzner_lhs(spec, v, v_star, p);
    let x = (v - v_star).norm();
    let xg = spec.speed_factor(x);
    let (s, m) = moment_terms(v, v_star, p);
    let rhs = -a_p * xg * s + a_tilde * xg * m;
    let slack = 1e-9 * xg * s;
    Ok(PovznerAudit {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    })
}

/// Povzner audit; computes A_p and calibrates Ã_p on every call.
pub fn povzner_audit(spec: &KernelSpec, v: Vec3, v_star: Vec3, p: f64) -> Result<PovznerAudit> {
    if p.is_nan() || p <= 2.0 {
        return Err(domain("povzner_audit", format!("order p = {p} must exceed 2")));
    }
    let a_p = povzner_constant(p, spec)?;
    let a_tilde = calibrate_povzner_tilde(spec, p)?;
    povzner_audit_with(spec, v, v_star, p, a_p, a_tilde)
}
