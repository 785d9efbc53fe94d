//! Spherical Monte Carlo estimation of multivariate normal probabilities.
//!
//! A probability `P{X ∈ A}` with `X ~ N_d(μ, Σ)` is split into a radial part,
//! distributed `χ(d)`, and a direction on the unit sphere. Directions come from
//! a fixed point set (normalized shortest vectors of a lattice) that is
//! randomly rotated by a Haar orthogonal matrix for every replicate, and the
//! radial part is either sampled, sampled antithetically, or integrated in
//! closed form through the `χ(d)` CDF.
//!
//! Module map:
//!
//! * [`linalg`]: dense matrices, covariance models, Cholesky, Gram–Schmidt.
//! * [`randsrc`]: seeded, splittable random streams.
//! * [`specfun`]: incomplete gamma, `χ` CDF, cap measures, sphere moments.
//! * [`lattices`]: shortest-vector point sets and their geometric checks.
//! * [`regions`]: integration regions and ray/region intersection.
//! * [`estimators`]: the estimator registry and variance accounting.
//! * [`bench`]: experiment grids, aggregation and table output.

pub mod bench;
pub mod error;
pub mod estimators;
pub mod lattices;
pub mod linalg;
pub mod randsrc;
pub mod regions;
pub mod specfun;

pub use error::{Error, Result};
