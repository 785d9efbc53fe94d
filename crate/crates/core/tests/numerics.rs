use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use sphmc::linalg::{build_covariance, cholesky, gram_schmidt, CovarianceModel, Matrix};
use sphmc::randsrc::{key_of, RandomStream};
use sphmc::specfun::{cap_measure, chi_cdf, reg_lower_gamma, sphere_moment};

fn model() -> impl Strategy<Value = (CovarianceModel, usize)> {
    (2usize..12, -0.45f64..0.95, any::<bool>()).prop_map(|(d, rho, ar)| {
        if ar {
            (CovarianceModel::Ar1(rho), d)
        } else {
            // one-factor needs ρ > −1/(d − 1)
            let floor = -1.0 / (d as f64 - 1.0) + 1e-3;
            (CovarianceModel::OneFactor(rho.max(floor)), d)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reproduces_the_model((m, d) in model()) {
        let sigma = build_covariance(m, d).unwrap();
        let l = cholesky(&sigma).unwrap();
        prop_assert!(l.matmul(&l.transpose()).max_abs_diff(&sigma) < 1e-12);
        for i in 0..d {
            for j in i + 1..d {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn gram_schmidt_gives_orthonormal_columns(d in 2usize..10, seed in any::<u64>()) {
        let mut s = RandomStream::new(seed, 0);
        let data: Vec<f64> = (0..d * d).map(|_| s.normal()).collect();
        let q = gram_schmidt(&Matrix::from_row_major(d, d, data).unwrap()).unwrap();
        prop_assert!(q.transpose().matmul(&q).max_abs_diff(&Matrix::identity(d)) < 1e-12);
    }

    #[test]
    fn chi_cdf_matches_chi_squared(d in 1usize..40, r in 0.01f64..12.0) {
        let oracle = ChiSquared::new(d as f64).unwrap().cdf(r * r);
        prop_assert!((chi_cdf(r, d) - oracle).abs() < 1e-12, "d={} r={}", d, r);
    }

    #[test]
    fn regularized_gamma_matches_chi_squared(a in 0.5f64..30.0, x in 0.0f64..60.0) {
        let oracle = ChiSquared::new(2.0 * a).unwrap().cdf(2.0 * x);
        prop_assert!((reg_lower_gamma(a, x) - oracle).abs() < 1e-12);
    }

    #[test]
    fn cap_measure_closed_forms(theta in 0.0f64..std::f64::consts::PI) {
        prop_assert!((cap_measure(theta, 2) - theta / std::f64::consts::PI).abs() < 1e-14);
        prop_assert!((cap_measure(theta, 3) - (1.0 - theta.cos()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn haar_matrices_are_orthogonal(d in 2usize..12, seed in any::<u64>(), id in any::<u64>()) {
        let q = RandomStream::new(seed, id).haar_orthogonal(d);
        prop_assert!(q.transpose().matmul(&q).max_abs_diff(&Matrix::identity(d)) < 1e-12);
    }

    #[test]
    fn substreams_replay(seed in any::<u64>(), id in any::<u64>(), i in any::<u64>()) {
        let base = RandomStream::new(seed, id);
        let draw = |k: u64| {
            let mut s = base.substream(k);
            (0..4).map(|_| s.uniform()).collect::<Vec<f64>>()
        };
        prop_assert_eq!(draw(i), draw(i));
        prop_assert_ne!(draw(i), draw(i.wrapping_add(1)));
    }
}

#[test]
fn sphere_moments_closed_forms() {
    for d in 2..10u32 {
        let df = d as f64;
        let mut a2 = vec![0; d as usize];
        a2[0] = 2;
        let mut a4 = a2.clone();
        a4[0] = 4;
        let mut a22 = a2.clone();
        a22[1] = 2;
        assert!((sphere_moment(&a2) - 1.0 / df).abs() < 1e-14);
        assert!((sphere_moment(&a4) - 3.0 / (df * (df + 2.0))).abs() < 1e-14);
        assert!((sphere_moment(&a22) - 1.0 / (df * (df + 2.0))).abs() < 1e-14);
        a2[0] = 1;
        assert_eq!(sphere_moment(&a2), 0.0);
    }
}

#[test]
fn stream_keys_separate_labels() {
    assert_eq!(key_of("8|identity|O1|0|sph|max"), key_of("8|identity|O1|0|sph|max"));
    assert_ne!(key_of("8|identity|O1|0|sph|max"), key_of("8|identity|O1|1|sph|max"));
    let mut a = RandomStream::new(1, key_of("a"));
    let mut b = RandomStream::new(1, key_of("b"));
    assert_ne!(a.uniform(), b.uniform());
}

#[test]
fn chi_draws_follow_the_chi_law() {
    let mut s = RandomStream::new(9, 0);
    for d in [1usize, 3, 8, 24] {
        let n = 40_000;
        let below = (0..n).filter(|_| s.chi(d) <= (d as f64).sqrt()).count() as f64 / n as f64;
        let exact = chi_cdf((d as f64).sqrt(), d);
        assert!((below - exact).abs() < 4.0 * (exact * (1.0 - exact) / n as f64).sqrt(), "d={d}");
    }
}
