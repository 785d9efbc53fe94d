//! Rotated-set estimator of a spherical cap's measure, and explicit
//! decompositions of caps into pieces of small diameter.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{summarize, EstimateResult, EstimatorKind};
use crate::error::{Error, Result};
use crate::lattices::PointSet;
use crate::linalg;
use crate::randsrc::{RandomStream, GENERATOR};

/// Per-replicate value `|V|⁻¹ #{v : (Tv)·axis ≥ cos θ}` for Haar `T`.
pub fn estimate_g_sphere_region(
    v: &PointSet,
    cap_axis: &[f64],
    theta: f64,
    m: usize,
    stream: &RandomStream,
) -> Result<EstimateResult> {
    let d = v.dim();
    if cap_axis.len() != d {
        return Err(Error::param("cap axis dimension differs from the point set"));
    }
    let n = linalg::norm(cap_axis);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::param("cap axis must be a nonzero vector"));
    }
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::param(format!("cap angle {theta} is outside (0, pi]")));
    }
    if m < 2 {
        return Err(Error::param("at least two replicates are needed"));
    }
    let axis: Vec<f64> = cap_axis.iter().map(|x| x / n).collect();
    let cos_t = theta.cos();
    let full = theta >= PI;
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .with_min_len(64)
        .map_init(
            || (vec![0.0; d * d], vec![0.0; d]),
            |(cols, a), i| {
                if full {
                    return 1.0;
                }
                let mut s = stream.substream(i as u64);
                s.fill_haar_columns(cols, d);
                // (Tv)·axis = v·(T'axis)
                for (j, aj) in a.iter_mut().enumerate() {
                    *aj = linalg::dot(&cols[j * d..(j + 1) * d], &axis);
                }
                let hits = v.iter().filter(|u| linalg::dot(u, a) >= cos_t).count();
                hits as f64 / v.len() as f64
            },
        )
        .collect();
    let (estimate, sample_variance, variance_se) = summarize(&values);
    Ok(EstimateResult {
        estimator: "g-cap".into(),
        estimate,
        sample_variance,
        variance_se,
        replicates: m,
        cost_per_replicate: EstimatorKind::SphStar.cost(d, v.len()),
        chi_cdf_uncounted: false,
        card_v: Some(v.len()),
        seed: stream.seed(),
        stream_id: stream.stream_id(),
        generator: GENERATOR,
    })
}

/// Safety factor keeping piece diameters strictly below the limit.
const STRICT: f64 = 1.0 - 1e-9;

/// Number of pieces in an explicit partition of the cap of angular radius
/// `theta` on `S^{d−1}` (`d ∈ {2, 3}`) into sets of chordal diameter below
/// `diameter`.
///
/// On the circle the cap is an arc of angle `2θ`, cut into equal arcs of
/// angle below `α = 2 arcsin(diameter/2)`. On the 2-sphere the cap is cut
/// into a polar cap of angular radius below `α/2` and polar bands split into
/// azimuthal sectors; a sector with polar range `[a, b]` and azimuth width
/// `Δ` has angular diameter at most `(b − a) + Δ·max sin` over the band. The
/// band count is chosen to minimize the total.
pub fn cap_decomposition_count(d: usize, theta: f64, diameter: f64) -> Result<usize> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::param(format!("cap angle {theta} is outside (0, pi]")));
    }
    if !(diameter > 0.0) {
        return Err(Error::param("diameter limit must be positive"));
    }
    // geodesic angle below which the chord is below `diameter`
    let alpha = if diameter >= 2.0 {
        PI
    } else {
        2.0 * (diameter / 2.0).asin()
    } * STRICT;
    match d {
        2 => Ok((2.0 * theta / alpha).floor() as usize + 1),
        3 => {
            let rho0 = 0.5 * alpha;
            if theta < rho0 {
                return Ok(1);
            }
            let span = theta - rho0;
            let mut best = usize::MAX;
            for bands in 1..=400 {
                let h = span / bands as f64;
                if h >= alpha {
                    continue;
                }
                let mut total = 1usize;
                for k in 0..bands {
                    let a = rho0 + k as f64 * h;
                    let b = a + h;
                    let max_sin = if a <= PI / 2.0 && b >= PI / 2.0 {
                        1.0
                    } else {
                        a.sin().max(b.sin())
                    };
                    let width = alpha - h;
                    let sectors = (2.0 * PI * max_sin / width).floor() as usize + 1;
                    total += sectors;
                }
                best = best.min(total);
            }
            Ok(best)
        }
        _ => Err(Error::Unsupported(format!(
            "explicit cap decompositions are implemented for d = 2, 3, not {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::{build_pointset, LatticeFamily};
    use crate::randsrc::RandomStream;

    #[test]
    fn circle_counts() {
        // arcs below 60°: a 2θ = 100° arc needs 2
        assert_eq!(cap_decomposition_count(2, 50f64.to_radians(), 1.0).unwrap(), 2);
        assert_eq!(cap_decomposition_count(2, 0.1, 1.0).unwrap(), 1);
        // exactly 60° needs a second piece because diameters must be strict
        assert_eq!(cap_decomposition_count(2, 30f64.to_radians(), 1.0).unwrap(), 2);
        assert!(cap_decomposition_count(5, 0.3, 1.0).is_err());
    }

    #[test]
    fn sphere_counts_grow_with_angle() {
        let mut last = 0;
        for k in 1..=12 {
            let n = cap_decomposition_count(3, k as f64 * PI / 36.0, 1.0).unwrap();
            assert!(n >= last);
            last = n;
        }
        assert_eq!(cap_decomposition_count(3, 0.2, 1.0).unwrap(), 1);
    }

    /// Sample pairs of points in each piece of the d = 3 construction and
    /// check their chord against the limit.
    #[test]
    fn sphere_pieces_have_small_diameter() {
        let alpha = 2.0 * (0.5f64).asin() * STRICT;
        let theta = PI / 3.0;
        let rho0 = 0.5 * alpha;
        let bands = 3;
        let h = (theta - rho0) / bands as f64;
        let mut s = RandomStream::new(1, 0);
        for k in 0..bands {
            let a = rho0 + k as f64 * h;
            let b = a + h;
            let sectors = (2.0 * PI * b.sin() / (alpha - h)).floor() as usize + 1;
            let width = 2.0 * PI / sectors as f64;
            for _ in 0..2000 {
                let p = |s: &mut RandomStream| {
                    let psi = a + h * s.uniform();
                    let phi = width * s.uniform();
                    [psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()]
                };
                let (x, y) = (p(&mut s), p(&mut s));
                let chord: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                assert!(chord < 1.0);
            }
        }
    }

    #[test]
    fn full_sphere_is_always_hit() {
        let v = build_pointset(LatticeFamily::Ad, 3).unwrap();
        let r = estimate_g_sphere_region(&v, &[0.0, 0.0, 1.0], PI, 50, &RandomStream::new(2, 0)).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.sample_variance, 0.0);
    }

    #[test]
    fn small_caps_hold_at_most_one_point() {
        let v = build_pointset(LatticeFamily::E8, 8).unwrap();
        let mut axis = vec![0.0; 8];
        axis[0] = 1.0;
        let stream = RandomStream::new(3, 0);
        let theta = PI / 12.0;
        let values: Vec<f64> = (0..200)
            .map(|i| {
                let r = estimate_g_sphere_region(&v, &axis, theta, 2, &stream.substream(i)).unwrap();
                r.estimate
            })
            .collect();
        // every replicate mean of two values is in {0, 1/480, 1/240}
        for m in values {
            let k = m * 480.0;
            assert!((k - k.round()).abs() < 1e-9 && k.round() <= 2.0);
        }
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let v = build_pointset(LatticeFamily::Ad, 2).unwrap();
        let s = RandomStream::new(4, 0);
        assert!(estimate_g_sphere_region(&v, &[0.0, 0.0], 0.5, 10, &s).is_err());
        assert!(estimate_g_sphere_region(&v, &[1.0, 0.0, 0.0], 0.5, 10, &s).is_err());
        assert!(estimate_g_sphere_region(&v, &[1.0, 0.0], 0.0, 10, &s).is_err());
        assert!(estimate_g_sphere_region(&v, &[1.0, 0.0], 0.5, 1, &s).is_err());
    }
}
