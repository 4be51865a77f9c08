//! Squared Wasserstein-2 distances between equally weighted point clouds.

pub mod assignment;
mod sliced;

pub use sliced::{w2_squared_sliced, w2_squared_sliced_along};

use crate::error::{KacError, Result};
use crate::simulator::empirical_moment;
use crate::vec3::Vec3;

/// Equally weighted atoms `(1/n) Σ δ_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Vec3>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(KacError::Degenerate("empirical measure needs at least one point".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(KacError::Degenerate("non-finite point in empirical measure".into()));
        }
        Ok(EmpiricalMeasure { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(1/n) Σ |x_i|²`.
    pub fn second_moment(&self) -> f64 {
        empirical_moment(&self.points, 2.0)
    }

    /// Concatenation; the result weights each part by its share of atoms.
    pub fn concat(&self, other: &EmpiricalMeasure) -> EmpiricalMeasure {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        EmpiricalMeasure { points }
    }

    pub fn translated(&self, shift: Vec3) -> EmpiricalMeasure {
        EmpiricalMeasure {
            points: self.points.iter().map(|&p| p + shift).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> EmpiricalMeasure {
        EmpiricalMeasure {
            points: self.points.iter().map(|&p| p * s).collect(),
        }
    }
}

fn check_sizes(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<usize> {
    if a.len() != b.len() {
        return Err(KacError::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.len())
}

/// Squared-distance cost matrix, row-major, unnormalized.
fn cost_matrix(a: &[Vec3], b: &[Vec3]) -> Vec<f64> {
    let mut cost = Vec::with_capacity(a.len() * b.len());
    for &p in a {
        cost.extend(b.iter().map(|&q| (p - q).norm_sq()));
    }
    cost
}

/// Exact `W_2²` between equal-size uniform measures via optimal assignment.
pub fn w2_squared_exact(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    let n = check_sizes(a, b)?;
    let cost = cost_matrix(&a.points, &b.points);
    let perm = assignment::solve(&cost, n)?;
    let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(total / n as f64)
}

/// `W_2²` by enumerating all `n!` permutations. Only for tiny `n` (≤ 9).
pub fn w2_squared_brute_force(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    let n = check_sizes(a, b)?;
    if n > 9 {
        return Err(KacError::Config(format!("brute force limited to n <= 9, got {n}")));
    }
    let cost = cost_matrix(&a.points, &b.points);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let eval = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum() };
    best = best.min(eval(&perm));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best / n as f64)
}

/// Both sides of the mixture convexity inequality
/// `W_2²(λf + (1-λ)g, λf' + (1-λ)g') ≤ λ W_2²(f, f') + (1-λ) W_2²(g, g')`
/// with `λ = |f| / (|f| + |g|)` realized by concatenation.
pub fn mixture_convexity_sides(
    f: &EmpiricalMeasure,
    f_prime: &EmpiricalMeasure,
    g: &EmpiricalMeasure,
    g_prime: &EmpiricalMeasure,
) -> Result<(f64, f64)> {
    check_sizes(f, f_prime)?;
    check_sizes(g, g_prime)?;
    let lambda = f.len() as f64 / (f.len() + g.len()) as f64;
    let lhs = w2_squared_exact(&f.concat(g), &f_prime.concat(g_prime))?;
    let rhs = lambda * w2_squared_exact(f, f_prime)? + (1.0 - lambda) * w2_squared_exact(g, g_prime)?;
    Ok((lhs, rhs))
}

/// Whether the mixture convexity inequality holds (it always should).
///
/// `lambda` must equal `|f| / (|f| + |g|)` to within 1e-12.
pub fn mixture_convexity_check(
    f: &EmpiricalMeasure,
    f_prime: &EmpiricalMeasure,
    g: &EmpiricalMeasure,
    g_prime: &EmpiricalMeasure,
    lambda: f64,
) -> Result<bool> {
    let implied = f.len() as f64 / (f.len() + g.len()) as f64;
    if (lambda - implied).abs() > 1e-12 {
        return Err(KacError::Config(format!(
            "lambda {lambda} incompatible with sizes {} and {} (needs {implied})",
            f.len(),
            g.len()
        )));
    }
    let (lhs, rhs) = mixture_convexity_sides(f, f_prime, g, g_prime)?;
    Ok(lhs <= rhs + 1e-12 * rhs.abs().max(1.0))
}

/// Block average of exact `W_2²` of a large cloud against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleComparison {
    /// Mean of `W_2²(block_r, reference)` over the disjoint blocks.
    pub mean_w2_squared: f64,
    pub blocks: usize,
    /// Leftover points `l = m mod k` that were not used.
    pub dropped: usize,
    /// `(l/m)(2 m₂(reference) + 2 m₂(big))`.
    pub bias_bound: f64,
}

/// Splits `big` (size `m`) into `⌊m/k⌋` consecutive blocks of size `k` and
/// averages their exact `W_2²` to `reference` (size `k`).
pub fn subsample_compare(
    big: &EmpiricalMeasure,
    reference: &EmpiricalMeasure,
    block_k: usize,
) -> Result<SubsampleComparison> {
    let m = big.len();
    if block_k == 0 || block_k > m {
        return Err(KacError::Config(format!("block size {block_k} must lie in [1, {m}]")));
    }
    if reference.len() != block_k {
        return Err(KacError::SizeMismatch {
            left: reference.len(),
            right: block_k,
        });
    }
    let blocks = m / block_k;
    let dropped = m % block_k;
    let mut sum = 0.0;
    for chunk in big.points.chunks_exact(block_k) {
        let block = EmpiricalMeasure {
            points: chunk.to_vec(),
        };
        sum += w2_squared_exact(&block, reference)?;
    }
    let bias_bound =
        dropped as f64 / m as f64 * (2.0 * reference.second_moment() + 2.0 * big.second_moment());
    Ok(SubsampleComparison {
        mean_w2_squared: sum / blocks as f64,
        blocks,
        dropped,
        bias_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(points: &[[f64; 3]]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(points.iter().map(|&p| Vec3::from_array(p)).collect()).unwrap()
    }

    #[test]
    fn exact_examples() {
        let a = m(&[[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]]);
        let b = m(&[[-1.0, 0.5, 0.0], [0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]);
        assert_eq!(w2_squared_exact(&a, &b).unwrap(), 0.0);
        assert_eq!(w2_squared_exact(&m(&[[0.0; 3]]), &m(&[[1.0, 0.0, 0.0]])).unwrap(), 1.0);
        assert!(matches!(
            w2_squared_exact(&a, &m(&[[0.0; 3]])),
            Err(KacError::SizeMismatch { left: 3, right: 1 })
        ));
        assert!(EmpiricalMeasure::new(vec![]).is_err());
        assert!(EmpiricalMeasure::new(vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn convexity_examples() {
        let f = m(&[[0.0, 0.0, 0.0]]);
        let g = m(&[[1.0, 1.0, 0.0]]);
        assert!(mixture_convexity_check(&f, &f, &g, &g, 0.5).unwrap());
        // singletons: lhs = min over the two pairings, rhs = the straight pairing
        let fp = m(&[[1.0, 1.0, 0.0]]);
        let gp = m(&[[0.0, 0.0, 0.0]]);
        let (lhs, rhs) = mixture_convexity_sides(&f, &fp, &g, &gp).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 2.0);
        assert!(mixture_convexity_check(&f, &fp, &g, &gp, 0.3).is_err());
    }

    #[test]
    fn subsample_examples() {
        let r = m(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let b = m(&[[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]);
        let s = subsample_compare(&b, &r, 2).unwrap();
        assert_eq!(s.mean_w2_squared, 1.0);
        assert_eq!((s.blocks, s.dropped, s.bias_bound), (1, 0, 0.0));

        let big = b.concat(&b);
        let s2 = subsample_compare(&big, &r, 2).unwrap();
        assert_eq!(s2.mean_w2_squared, 1.0);
        assert_eq!(s2.blocks, 2);

        assert!(subsample_compare(&r, &r, 3).is_err());
        assert!(subsample_compare(&big, &r, 3).is_err());
    }

    #[test]
    fn subsample_bias_with_leftover() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        let big = m(&pts);
        let reference = m(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        let s = subsample_compare(&big, &reference, 4).unwrap();
        assert_eq!((s.blocks, s.dropped), (2, 2));
        // m₂(ref) = 14/4, m₂(big) = 285/10
        let expected = 0.2 * (2.0 * 3.5 + 2.0 * 28.5);
        assert!((s.bias_bound - expected).abs() < 1e-12);
        let b0 = m(&pts[0..4]);
        let b1 = m(&pts[4..8]);
        let direct =
            0.5 * (w2_squared_exact(&b0, &reference).unwrap() + w2_squared_exact(&b1, &reference).unwrap());
        assert!((s.mean_w2_squared - direct).abs() < 1e-12);
    }
}
