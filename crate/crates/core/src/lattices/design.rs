//! Spherical t-design verification against exact sphere moments.

use super::PointSet;
use crate::randsrc::RandomStream;
use crate::specfun::sphere_moment;

/// Largest deviation `|mean over V of x^α − E[u^α]|` over every monomial of
/// degree `1..=t`.
///
/// Monomials are enumerated as non-decreasing index sequences, so each level
/// of the search multiplies the running products by one more coordinate and
/// every monomial costs one pass over the points.
pub fn verify_t_design(ps: &PointSet, t: u32) -> f64 {
    assert!(t >= 1, "design order must be at least 1");
    let n = ps.len();
    let d = ps.dim();
    let t = t as usize;
    // Coordinate-major copy so each factor is a contiguous slice.
    let mut by_coord = vec![0.0; n * d];
    for (p, v) in ps.iter().enumerate() {
        for (k, &x) in v.iter().enumerate() {
            by_coord[k * n + p] = x;
        }
    }
    let mut products = vec![vec![1.0; n]; t + 1];
    let mut alpha = vec![0u32; d];
    let mut worst = 0.0f64;
    descend(&by_coord, n, 0, 0, t, &mut products, &mut alpha, &mut worst);
    worst
}

#[allow(clippy::too_many_arguments)]
fn descend(
    by_coord: &[f64],
    n: usize,
    depth: usize,
    first: usize,
    t: usize,
    products: &mut [Vec<f64>],
    alpha: &mut [u32],
    worst: &mut f64,
) {
    if depth == t {
        return;
    }
    let d = alpha.len();
    for k in first..d {
        let (done, rest) = products.split_at_mut(depth + 1);
        let parent = &done[depth];
        let child = &mut rest[0];
        let col = &by_coord[k * n..(k + 1) * n];
        let mut sum = 0.0;
        for ((c, &p), &x) in child.iter_mut().zip(parent).zip(col) {
            *c = p * x;
            sum += *c;
        }
        alpha[k] += 1;
        let dev = (sum / n as f64 - sphere_moment(alpha)).abs();
        if dev > *worst || dev.is_nan() {
            *worst = if dev.is_nan() { f64::INFINITY } else { dev };
        }
        descend(by_coord, n, depth + 1, k, t, products, alpha, worst);
        alpha[k] -= 1;
    }
}

/// Largest deviation over an explicit list of exponent vectors.
pub fn verify_t_design_on(ps: &PointSet, monomials: &[Vec<u32>]) -> f64 {
    let n = ps.len() as f64;
    monomials
        .iter()
        .map(|alpha| {
            assert_eq!(alpha.len(), ps.dim(), "exponent vector has the wrong length");
            let mean: f64 = ps
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(alpha)
                        .filter(|(_, &a)| a > 0)
                        .map(|(x, &a)| x.powi(a as i32))
                        .product::<f64>()
                })
                .sum::<f64>()
                / n;
            let dev = (mean - sphere_moment(alpha)).abs();
            if dev.is_nan() {
                f64::INFINITY
            } else {
                dev
            }
        })
        .fold(0.0, f64::max)
}

/// Fixed monomial list for sets too large for the exhaustive search: every
/// monomial of degree `1..=t` in the first three coordinates, then `extra`
/// pseudo-random monomials of degree `t` or `t − 1` spread over all
/// coordinates (half of them with all exponents even). The list depends only
/// on `(d, t, extra)`.
pub fn sampled_monomials(d: usize, t: u32, extra: usize) -> Vec<Vec<u32>> {
    let lead = d.min(3);
    let mut out = Vec::new();
    let mut alpha = vec![0u32; d];
    fn leading(k: usize, lead: usize, left: u32, alpha: &mut [u32], out: &mut Vec<Vec<u32>>) {
        if k == lead {
            if alpha.iter().any(|&a| a > 0) {
                out.push(alpha.to_vec());
            }
            return;
        }
        for a in 0..=left {
            alpha[k] = a;
            leading(k + 1, lead, left - a, alpha, out);
        }
        alpha[k] = 0;
    }
    leading(0, lead, t, &mut alpha, &mut out);

    let mut s = RandomStream::new(0x5eed_de51, (d as u64) << 8 | u64::from(t));
    for i in 0..extra {
        let degree = if i % 4 < 2 { t } else { t.saturating_sub(1).max(1) };
        let mut alpha = vec![0u32; d];
        if i % 2 == 0 {
            for _ in 0..degree / 2 {
                alpha[(s.uniform() * d as f64) as usize % d] += 2;
            }
            if degree % 2 == 1 {
                alpha[(s.uniform() * d as f64) as usize % d] += 1;
            }
        } else {
            for _ in 0..degree {
                alpha[(s.uniform() * d as f64) as usize % d] += 1;
            }
        }
        out.push(alpha);
    }
    out
}
