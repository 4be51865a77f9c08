//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Integral {
        if a == b {
            return Integral {
                value: 0.0,
                error: 0.0,
            };
        }
        if b < a {
            let r = self.integrate(f, b, a);
            return Integral {
                value: -r.value,
                error: r.error,
            };
        }
        let first = kronrod15(&f, a, b);
        let mut total = first.value;
        let mut total_err = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) && heap.len() < self.max_intervals {
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval at machine resolution
                heap.push(worst);
                break;
            }
            let left = kronrod15(&f, worst.a, mid);
            let right = kronrod15(&f, mid, worst.b);
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        // Re-sum to shed the drift from incremental updates.
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        Integral { value, error }
    }

    /// Integrates `f` over `[a, b]` after splitting at the given interior breakpoints.
    pub fn integrate_split<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Integral {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
        pts.sort_by(f64::total_cmp);
        let mut value = 0.0;
        let mut error = 0.0;
        let mut lo = a;
        for hi in pts.into_iter().chain(std::iter::once(b)) {
            let r = self.integrate(&f, lo, hi);
            value += r.value;
            error += r.error;
            lo = hi;
        }
        Integral { value, error }
    }

    /// Integrates `f` over `[a, ∞)` through the map `x = a + s / (1 - s)`.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Integral {
        self.integrate(
            |s: f64| {
                let one_minus = 1.0 - s;
                let x = a + s / one_minus;
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx / (one_minus * one_minus)
                }
            },
            0.0,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0);
        // antiderivative x^6/6 - x^3 + x
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let q = Quadrature::default();
        let r = q.integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0);
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn infinite_tail() {
        let q = Quadrature::default();
        let r = q.integrate_to_infinity(|x: f64| (-x).exp(), 1.0);
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-12);
        let r = q.integrate_to_infinity(|x: f64| 1.0 / (x * x * x * x), 2.0);
        assert!((r.value - 1.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn kinks_need_breakpoints() {
        let q = Quadrature::default();
        let r = q.integrate_split(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3]);
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }
}
