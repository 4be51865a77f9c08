//! Angular collision laws β, the tail integral H, its inverse G, and the
//! integrals built on them.
//!
//! Two families are supported. Hard spheres have β ≡ 1 on (0, π/2) and γ = 1.
//! Power laws have β(θ) = θ^(-1-ν) exactly, so H and G have closed forms:
//!
//! ```text
//! H(θ) = (θ^(-ν) - (π/2)^(-ν)) / ν        G(z) = (ν z + (π/2)^(-ν))^(-1/ν)
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, KacError, Result};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    HardSphere,
    PowerLaw,
}

/// Collision kernel `B(|v - v*|, θ) sin θ = |v - v*|^γ β(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: f64,
    nu: f64,
}

impl KernelSpec {
    pub fn hard_sphere() -> Self {
        KernelSpec {
            family: KernelFamily::HardSphere,
            gamma: 1.0,
            nu: 0.0,
        }
    }

    /// Power-law angular singularity `β(θ) = θ^(-1-ν)` with speed exponent γ.
    pub fn power_law(gamma: f64, nu: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(KacError::Config(format!(
                "power-law kernel needs 0 < gamma < 1, got {gamma}"
            )));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(KacError::Config(format!(
                "power-law kernel needs 0 < nu < 1, got {nu}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::PowerLaw,
            gamma,
            nu,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Angular exponent; zero for hard spheres.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_hard_sphere(&self) -> bool {
        self.family == KernelFamily::HardSphere
    }

    pub fn angular_law(&self) -> AngularLaw {
        AngularLaw {
            spec: *self,
            h_at_zero_limit: match self.family {
                KernelFamily::HardSphere => FRAC_PI_2,
                KernelFamily::PowerLaw => f64::INFINITY,
            },
        }
    }

    /// β(θ) for θ in (0, π/2).
    pub fn beta(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(domain("beta", format!("theta = {theta} not in (0, pi/2)")));
        }
        Ok(self.beta_unchecked(theta))
    }

    #[inline]
    fn beta_unchecked(&self, theta: f64) -> f64 {
        match self.family {
            KernelFamily::HardSphere => 1.0,
            KernelFamily::PowerLaw => theta.powf(-1.0 - self.nu),
        }
    }

    /// H(θ) = ∫_θ^{π/2} β.
    pub fn big_h(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(domain("big_h", format!("theta = {theta} not in (0, pi/2]")));
        }
        Ok(match self.family {
            KernelFamily::HardSphere => FRAC_PI_2 - theta,
            KernelFamily::PowerLaw => (theta.powf(-self.nu) - FRAC_PI_2.powf(-self.nu)) / self.nu,
        })
    }

    /// G = H⁻¹ on `[0, ∞)`.
    pub fn big_g(&self, z: f64) -> Result<f64> {
        if z.is_nan() || z < 0.0 {
            return Err(domain("big_g", format!("z = {z} is negative")));
        }
        Ok(self.g_unchecked(z))
    }

    /// G without the domain check; `z = +∞` maps to 0.
    #[inline]
    pub(crate) fn g_unchecked(&self, z: f64) -> f64 {
        match self.family {
            KernelFamily::HardSphere => (FRAC_PI_2 - z).max(0.0),
            KernelFamily::PowerLaw => {
                if z.is_infinite() {
                    0.0
                } else if z == 0.0 {
                    FRAC_PI_2
                } else {
                    (self.nu * z + FRAC_PI_2.powf(-self.nu)).powf(-1.0 / self.nu)
                }
            }
        }
    }

    /// Deflection angle G(z / x^γ) for relative speed `x`; zero when `x = 0`.
    #[inline]
    pub fn deflection_angle(&self, z: f64, rel_speed: f64) -> f64 {
        if rel_speed <= 0.0 {
            return 0.0;
        }
        let scale = match self.family {
            KernelFamily::HardSphere => rel_speed,
            KernelFamily::PowerLaw => rel_speed.powf(self.gamma),
        };
        self.g_unchecked(z / scale)
    }

    /// `x^γ`.
    #[inline]
    pub fn speed_factor(&self, x: f64) -> f64 {
        match self.family {
            KernelFamily::HardSphere => x,
            KernelFamily::PowerLaw => x.powf(self.gamma),
        }
    }
}

/// β together with its tail integral H and inverse G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularLaw {
    pub spec: KernelSpec,
    /// H(0⁺): π/2 for hard spheres, +∞ for power laws.
    pub h_at_zero_limit: f64,
}

impl AngularLaw {
    pub fn beta(&self, theta: f64) -> Result<f64> {
        self.spec.beta(theta)
    }
    pub fn big_h(&self, theta: f64) -> Result<f64> {
        self.spec.big_h(theta)
    }
    pub fn big_g(&self, z: f64) -> Result<f64> {
        self.spec.big_g(z)
    }
}

/// `1 - cos θ` without cancellation.
#[inline]
pub(crate) fn one_minus_cos(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    2.0 * s * s
}

fn quad() -> Quadrature {
    Quadrature::with_abs_tol(1e-12)
}

fn check_speed_and_level(op: &'static str, x: f64, k: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(op, format!("relative speed {x} is negative")));
    }
    if k.is_nan() || k < 1.0 {
        return Err(domain(op, format!("cutoff level {k} below 1")));
    }
    Ok(())
}

/// Φ_K(x) = π ∫_0^K (1 - cos G(z / x^γ)) dz.
pub fn phi_cutoff(spec: &KernelSpec, x: f64, k: f64) -> Result<f64> {
    check_speed_and_level("phi_cutoff", x, k)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let f = |z: f64| one_minus_cos(spec.deflection_angle(z, x));
    let r = match spec.family {
        // G(z/x) hits zero at z = πx/2.
        KernelFamily::HardSphere => {
            let support = FRAC_PI_2 * x;
            quad().integrate(f, 0.0, k.min(support))
        }
        KernelFamily::PowerLaw => quad().integrate(f, 0.0, k),
    };
    Ok(PI * r.value)
}

/// Ψ_K(x) = π ∫_K^∞ (1 - cos G(z / x^γ)) dz.
pub fn psi_cutoff(spec: &KernelSpec, x: f64, k: f64) -> Result<f64> {
    check_speed_and_level("psi_cutoff", x, k)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let f = |z: f64| one_minus_cos(spec.deflection_angle(z, x));
    let r = match spec.family {
        KernelFamily::HardSphere => {
            let support = FRAC_PI_2 * x;
            if k >= support {
                return Ok(0.0);
            }
            quad().integrate(f, k, support)
        }
        KernelFamily::PowerLaw => quad().integrate_to_infinity(f, k),
    };
    Ok(PI * r.value)
}

/// π ∫_0^∞ (1 - cos G(z / x^γ)) dz, evaluated in the angle variable as
/// π x^γ ∫_0^{π/2} (1 - cos θ) β(θ) dθ.
pub fn phi_total(spec: &KernelSpec, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain("phi_total", format!("relative speed {x} is negative")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let angular = integrate_against_beta(spec, one_minus_cos);
    Ok(PI * spec.speed_factor(x) * angular)
}

/// ∫_0^{π/2} g(θ) β(θ) dθ for an integrand with `g(θ) = O(θ²)` at zero.
///
/// Power laws use θ = u^m with m = 1/(1-ν), which turns the `θ^(1-ν)` endpoint
/// behaviour into a smooth one.
fn integrate_against_beta<F: Fn(f64) -> f64>(spec: &KernelSpec, g: F) -> f64 {
    match spec.family {
        KernelFamily::HardSphere => quad().integrate(g, 0.0, FRAC_PI_2).value,
        KernelFamily::PowerLaw => {
            let m = 1.0 / (1.0 - spec.nu);
            let upper = FRAC_PI_2.powf(1.0 - spec.nu);
            quad()
                .integrate(
                    |u: f64| {
                        if u <= 0.0 {
                            return 0.0;
                        }
                        let theta = u.powf(m);
                        g(theta) * spec.beta_unchecked(theta) * m * u.powf(m - 1.0)
                    },
                    0.0,
                    upper,
                )
                .value
        }
    }
}

/// Left side of the tail bound: ∫_0^∞ (G(z/x) - G(z/y))² dz.
pub fn tail_mismatch(spec: &KernelSpec, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(domain("tail_mismatch", format!("speeds ({x}, {y}) must be positive")));
    }
    let f = |z: f64| {
        let d = spec.g_unchecked(z / x) - spec.g_unchecked(z / y);
        d * d
    };
    let q = quad();
    Ok(match spec.family {
        KernelFamily::HardSphere => {
            let (lo, hi) = (FRAC_PI_2 * x.min(y), FRAC_PI_2 * x.max(y));
            q.integrate_split(f, 0.0, hi, &[lo]).value
        }
        KernelFamily::PowerLaw => {
            let split = x.max(y);
            q.integrate(f, 0.0, split).value + q.integrate_to_infinity(f, split).value
        }
    })
}

/// Constant for `∫(G(z/x) - G(z/y))² dz ≤ c₄ (x-y)²/(x+y)`.
///
/// The ratio depends on `y/x` only and is symmetric under `x ↔ y`, so a log grid
/// of `r = y/x ∈ [1e-6, 1)` covers it. The grid supremum carries a 5% margin.
pub fn calibrate_c4(spec: &KernelSpec) -> f64 {
    let points = 241;
    let sup = (0..points)
        .map(|i| {
            let log_r = -6.0 + 6.0 * (i as f64) / (points as f64);
            let r = 10f64.powf(log_r);
            let lhs = tail_mismatch(spec, 1.0, r).expect("positive speeds");
            lhs * (1.0 + r) / ((1.0 - r) * (1.0 - r))
        })
        .fold(0.0, f64::max);
    1.05 * sup
}

/// Checks the tail bound at `(x, y)` against `c4`.
pub fn tail_bound_holds(spec: &KernelSpec, x: f64, y: f64, c4: f64) -> Result<bool> {
    let lhs = tail_mismatch(spec, x, y)?;
    let rhs = c4 * (x - y) * (x - y) / (x + y);
    Ok(lhs <= rhs + 1e-12 * (x + y))
}

/// Tail bound check with a freshly calibrated c₄. Calibration runs a few
/// hundred quadratures, so loops should call [`calibrate_c4`] once and use
/// [`tail_bound_holds`].
pub fn tanaka_tail_bound_check(spec: &KernelSpec, x: f64, y: f64) -> Result<bool> {
    if !(x > 0.0 && y > 0.0) {
        return Err(domain(
            "tanaka_tail_bound_check",
            format!("speeds ({x}, {y}) must be positive"),
        ));
    }
    tail_bound_holds(spec, x, y, calibrate_c4(spec))
}

/// `κ(p, θ) = 1 - cos^p(θ/2) - sin^p(θ/2)`, accurate for small θ.
pub(crate) fn povzner_kappa(p: f64, theta: f64) -> f64 {
    // cos(θ/2) = 1 - 2 sin²(θ/4)
    let s4 = (0.25 * theta).sin();
    let ln_cos = (-2.0 * s4 * s4).ln_1p();
    -(p * ln_cos).exp_m1() - (0.5 * theta).sin().powf(p)
}

/// A_p = ∫_0^{π/2} [1 - cos^p(θ/2) - sin^p(θ/2)] β(θ) dθ.
pub fn povzner_constant(p: f64, spec: &KernelSpec) -> Result<f64> {
    if p.is_nan() || p <= 2.0 {
        return Err(domain("povzner_constant", format!("order p = {p} must exceed 2")));
    }
    Ok(integrate_against_beta(spec, |theta| povzner_kappa(p, theta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(gamma: f64, nu: f64) -> KernelSpec {
        KernelSpec::power_law(gamma, nu).unwrap()
    }

    #[test]
    fn beta_values() {
        assert_eq!(KernelSpec::hard_sphere().beta(0.3).unwrap(), 1.0);
        assert_eq!(pl(0.5, 0.5).beta(1.0).unwrap(), 1.0);
        assert!((pl(0.5, 0.5).beta(0.25).unwrap() - 8.0).abs() < 1e-14);
        assert!(pl(0.5, 0.5).beta(0.0).is_err());
        assert!(KernelSpec::hard_sphere().beta(FRAC_PI_2).is_err());
    }

    #[test]
    fn h_values() {
        let hs = KernelSpec::hard_sphere();
        assert_eq!(hs.big_h(FRAC_PI_2).unwrap(), 0.0);
        assert!(pl(0.5, 0.5).big_h(FRAC_PI_2).unwrap().abs() < 1e-15);
        assert!((hs.big_h(0.5).unwrap() - 1.070_796_326_794_896_6).abs() < 1e-15);
        // 2 (0.25^{-1/2} - (π/2)^{-1/2})
        assert!((pl(0.5, 0.5).big_h(0.25).unwrap() - 2.404_230_878_394_269).abs() < 1e-12);
        assert!(hs.big_h(0.0).is_err());
    }

    #[test]
    fn h_matches_quadrature_of_beta() {
        for spec in [KernelSpec::hard_sphere(), pl(0.5, 0.5), pl(0.3, 0.75)] {
            for theta in [0.05, 0.25, 0.5, 1.2] {
                let q = Quadrature::with_abs_tol(1e-13)
                    .integrate(|x| spec.beta(x).unwrap(), theta, FRAC_PI_2 - 1e-300)
                    .value;
                assert!((q - spec.big_h(theta).unwrap()).abs() < 1e-9, "{spec:?} {theta}");
            }
        }
    }

    #[test]
    fn g_values() {
        let hs = KernelSpec::hard_sphere();
        assert_eq!(hs.big_g(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(pl(0.5, 0.5).big_g(0.0).unwrap(), FRAC_PI_2);
        assert!((hs.big_g(1.0).unwrap() - 0.570_796_326_794_896_6).abs() < 1e-15);
        assert_eq!(hs.big_g(2.0).unwrap(), 0.0);
        assert!((pl(0.5, 0.5).big_g(2.0).unwrap() - 0.309_368_715_461_332_2).abs() < 1e-12);
        assert!(hs.big_g(-1e-9).is_err());
    }

    #[test]
    fn power_law_validation() {
        assert!(KernelSpec::power_law(1.0, 0.5).is_err());
        assert!(KernelSpec::power_law(0.5, 1.0).is_err());
        assert!(KernelSpec::power_law(0.5, 0.0).is_err());
        assert_eq!(KernelSpec::hard_sphere().gamma(), 1.0);
        assert_eq!(pl(0.5, 0.5).angular_law().h_at_zero_limit, f64::INFINITY);
        assert_eq!(KernelSpec::hard_sphere().angular_law().h_at_zero_limit, FRAC_PI_2);
    }

    #[test]
    fn phi_examples() {
        let hs = KernelSpec::hard_sphere();
        assert_eq!(phi_cutoff(&hs, 0.0, 3.0).unwrap(), 0.0);
        let v = phi_cutoff(&hs, 1.0, FRAC_PI_2).unwrap();
        assert!((v - PI * (FRAC_PI_2 - 1.0)).abs() < 1e-10, "{v}");
        assert!(phi_cutoff(&hs, 1.0, 0.5).is_err());
    }

    #[test]
    fn phi_power_law_matches_riemann_sum() {
        let spec = pl(0.5, 0.5);
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        // midpoint rule, error O(h²)
        let riemann: f64 = (0..n)
            .map(|i| one_minus_cos(spec.big_g((i as f64 + 0.5) * h).unwrap()))
            .sum::<f64>()
            * h
            * PI;
        let v = phi_cutoff(&spec, 1.0, 1.0).unwrap();
        assert!((v - riemann).abs() < 1e-8, "{v} vs {riemann}");
    }

    #[test]
    fn phi_psi_split_matches_angle_form() {
        for spec in [KernelSpec::hard_sphere(), pl(0.5, 0.5), pl(0.8, 0.25), pl(0.2, 0.75)] {
            for x in [0.1, 1.0, 3.7] {
                for k in [1.0, 2.5, 20.0] {
                    let split = phi_cutoff(&spec, x, k).unwrap() + psi_cutoff(&spec, x, k).unwrap();
                    let total = phi_total(&spec, x).unwrap();
                    assert!((split - total).abs() < 1e-8, "{spec:?} x={x} k={k}: {split} {total}");
                }
            }
        }
    }

    #[test]
    fn povzner_hard_sphere_p4() {
        let a4 = povzner_constant(4.0, &KernelSpec::hard_sphere()).unwrap();
        assert!((a4 - PI / 8.0).abs() < 1e-12);
        assert!(povzner_constant(2.0, &KernelSpec::hard_sphere()).is_err());
    }

    #[test]
    fn povzner_constants_positive() {
        for spec in [KernelSpec::hard_sphere(), pl(0.5, 0.5)] {
            for p in [2.5, 3.0, 4.0, 6.0, 8.0] {
                assert!(povzner_constant(p, &spec).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn kappa_small_angle() {
        // κ(p, θ) ≈ p θ² / 8 for small θ and p > 2
        let k = povzner_kappa(4.0, 1e-6);
        assert!((k / (4.0 * 1e-12 / 8.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tail_bound_examples() {
        let hs = KernelSpec::hard_sphere();
        assert!(tanaka_tail_bound_check(&hs, 1.0, 1.0).unwrap());
        assert!(tanaka_tail_bound_check(&hs, 1.0, 2.0).unwrap());
        assert!(tanaka_tail_bound_check(&pl(0.5, 0.5), 0.5, 4.0).unwrap());
        assert!(tanaka_tail_bound_check(&hs, 0.0, 1.0).is_err());
    }
}
