//! Monte Carlo estimators of `P{X ∈ A}` for `X ~ N(μ, Σ)`.
//!
//! Every estimator is a strategy behind the [`Estimator`] trait and is looked
//! up by name in an [`EstimatorRegistry`]. The driver [`run`] gives replicate
//! `i` its own substream of the caller's stream and reduces the values in
//! replicate order, so results do not depend on the thread count.

mod cap;
mod kinds;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattices::PointSet;
use crate::linalg::{build_covariance, cholesky, CovarianceModel, Matrix};
use crate::randsrc::{ChiSampler, RandomStream, GENERATOR};
use crate::regions::{IntervalList, Region};
use crate::specfun::ChiCdf;

pub use cap::{cap_decomposition_count, estimate_g_sphere_region};
pub use kinds::{antipodal_pair_histogram, Crude, CrudeAntithetic, Spherical, SphericalAntithetic, SphericalStar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Crude,
    CrudeAt,
    Sph,
    SphAt,
    SphStar,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Crude,
        EstimatorKind::CrudeAt,
        EstimatorKind::Sph,
        EstimatorKind::SphAt,
        EstimatorKind::SphStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Crude => "crude",
            EstimatorKind::CrudeAt => "crude-at",
            EstimatorKind::Sph => "sph",
            EstimatorKind::SphAt => "sph-at",
            EstimatorKind::SphStar => "sph-star",
        }
    }

    pub fn uses_point_set(self) -> bool {
        matches!(self, EstimatorKind::Sph | EstimatorKind::SphAt | EstimatorKind::SphStar)
    }

    /// Random numbers per replicate: `d` for the crude kinds;
    /// `(d+2)(d−1)/2` for the rotation plus one radius per point (`sph`) or
    /// per antipodal pair (`sph-at`). `sph-star` draws no radii, and its
    /// χ CDF evaluations are not counted.
    pub fn cost(self, d: usize, card_v: usize) -> u64 {
        let rotation = ((d + 2) * (d - 1) / 2) as u64;
        match self {
            EstimatorKind::Crude | EstimatorKind::CrudeAt => d as u64,
            EstimatorKind::Sph => rotation + card_v as u64,
            EstimatorKind::SphAt => rotation + (card_v / 2) as u64,
            EstimatorKind::SphStar => rotation,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::param(format!("unknown estimator '{s}'")))
    }
}

/// Per-replicate cost of `kind`; `card_v` is ignored by the crude kinds.
pub fn replicate_cost(kind: EstimatorKind, d: usize, card_v: usize) -> u64 {
    kind.cost(d, card_v)
}

/// `X ~ N(μ, Σ)` with `Σ = ΓΓ'`, and the event region `A`.
#[derive(Debug, Clone)]
pub struct Problem {
    mu: Vec<f64>,
    sigma: Matrix,
    gamma: Matrix,
    region: Region,
}

impl Problem {
    pub fn new(mu: Vec<f64>, sigma: Matrix, region: Region) -> Result<Self> {
        let d = mu.len();
        if d == 0 || sigma.rows() != d || sigma.cols() != d || region.dim() != d {
            return Err(Error::param(format!(
                "inconsistent dimensions: mean {d}, covariance {}x{}, region {}",
                sigma.rows(),
                sigma.cols(),
                region.dim()
            )));
        }
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::param("mean must be finite"));
        }
        let gamma = cholesky(&sigma)?;
        Ok(Problem {
            mu,
            sigma,
            gamma,
            region,
        })
    }

    /// Zero mean and the covariance `model` in the region's dimension.
    pub fn centered(model: CovarianceModel, region: Region) -> Result<Self> {
        let d = region.dim();
        Problem::new(vec![0.0; d], build_covariance(model, d)?, region)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }

    pub fn region(&self) -> &Region {
        &self.region
    }
}

/// Summary of `M` per-replicate values.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub estimator: String,
    pub estimate: f64,
    /// Unbiased (`M − 1`) variance of the per-replicate values.
    pub sample_variance: f64,
    /// Standard error of `sample_variance`, from the fourth central moment.
    pub variance_se: f64,
    pub replicates: usize,
    pub cost_per_replicate: u64,
    /// Set when part of the work (χ CDF evaluations) is not in the cost.
    pub chi_cdf_uncounted: bool,
    pub card_v: Option<usize>,
    pub seed: u64,
    pub stream_id: u64,
    pub generator: &'static str,
}

impl EstimateResult {
    /// Standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.sample_variance / self.replicates as f64).sqrt()
    }

    pub fn is_zero_variance(&self) -> bool {
        self.sample_variance == 0.0
    }
}

/// Mean, unbiased variance and the standard error of that variance.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for &v in values {
        let dv = v - mean;
        let sq = dv * dv;
        s2 += sq;
        s4 += sq * sq;
    }
    let var = s2 / (m - 1.0);
    // unbiased estimate of Var(s²) = (μ₄ − σ⁴)/M + 2σ⁴/(M(M − 1)), held at
    // or above the second term since μ₄ ≥ σ⁴
    let (m2, m4) = (s2 / m, s4 / m);
    let floor = 2.0 * var * var / (m * (m - 1.0));
    let var_of_var = if m > 3.0 {
        let a = m / ((m - 3.0) * (m - 2.0));
        let b = m * (m * m - 3.0) / ((m - 3.0) * (m - 2.0) * (m - 1.0) * (m - 1.0));
        (a * m4 - b * m2 * m2).max(floor)
    } else {
        (m4 - m2 * m2) / m + floor
    };
    (mean, var, var_of_var.sqrt())
}

/// Variance ratio with its zero-variance flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    /// `+∞` when the target variance is zero.
    pub value: f64,
    pub zero_variance: bool,
}

/// `Var(baseline) / Var(target)`.
pub fn variance_ratio(target: &EstimateResult, baseline: &EstimateResult) -> Result<Ratio> {
    ratio(target.sample_variance, baseline.sample_variance)
}

/// `(Var(baseline)·cost(baseline)) / (Var(target)·cost(target))`.
pub fn penalized_variance_ratio(target: &EstimateResult, baseline: &EstimateResult) -> Result<Ratio> {
    ratio(
        target.sample_variance * target.cost_per_replicate as f64,
        baseline.sample_variance * baseline.cost_per_replicate as f64,
    )
}

fn ratio(target: f64, baseline: f64) -> Result<Ratio> {
    if !(baseline > 0.0) {
        return Err(Error::Degeneracy("baseline variance is zero".into()));
    }
    Ok(if target == 0.0 {
        Ratio {
            value: f64::INFINITY,
            zero_variance: true,
        }
    } else {
        Ratio {
            value: baseline / target,
            zero_variance: false,
        }
    })
}

/// Read-only data shared by all replicates of one run.
pub struct Context<'a> {
    problem: &'a Problem,
    points: Option<&'a PointSet>,
    positive_half: Vec<usize>,
    chi: ChiSampler,
    chi_cdf: ChiCdf,
}

impl<'a> Context<'a> {
    fn new(problem: &'a Problem, points: Option<&'a PointSet>, need_half: bool) -> Result<Self> {
        let positive_half = match (points, need_half) {
            (Some(v), true) => v.positive_half_indices()?,
            _ => Vec::new(),
        };
        Ok(Context {
            problem,
            points,
            positive_half,
            chi: ChiSampler::new(problem.dim()),
            chi_cdf: ChiCdf::new(problem.dim()),
        })
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    /// The point set; only valid for estimators that declared they need one.
    pub fn points(&self) -> &PointSet {
        self.points.expect("point set checked by validate")
    }

    /// Indices of `V⁺`; empty unless requested.
    pub fn positive_half(&self) -> &[usize] {
        &self.positive_half
    }

    pub fn chi_sampler(&self) -> &ChiSampler {
        &self.chi
    }

    pub fn chi_cdf(&self) -> &ChiCdf {
        &self.chi_cdf
    }
}

/// Per-worker buffers, reused across replicates.
pub struct Scratch {
    /// `d²`: Haar matrix, column-major.
    pub rotation: Vec<f64>,
    /// `d²`: `Γ T`, row-major.
    pub map: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub intervals: IntervalList,
}

impl Scratch {
    pub fn new(d: usize) -> Self {
        Scratch {
            rotation: vec![0.0; d * d],
            map: vec![0.0; d * d],
            z: vec![0.0; d],
            w: vec![0.0; d],
            x: vec![0.0; d],
            y: vec![0.0; d],
            intervals: IntervalList::default(),
        }
    }

    /// Draw a Haar `T` and store `Γ T` in `map`.
    pub fn draw_rotation(&mut self, gamma: &Matrix, s: &mut RandomStream) {
        let d = gamma.rows();
        s.fill_haar_columns(&mut self.rotation, d);
        for i in 0..d {
            let grow = gamma.row(i);
            for j in 0..d {
                let col = &self.rotation[j * d..(j + 1) * d];
                // Γ is lower triangular
                self.map[i * d + j] = grow[..=i].iter().zip(col).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// `w = Γ T v`.
    #[inline]
    pub fn apply_map(&mut self, v: &[f64]) {
        let d = v.len();
        for (i, wi) in self.w.iter_mut().enumerate() {
            let row = &self.map[i * d..(i + 1) * d];
            *wi = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// One estimation strategy.
pub trait Estimator: Send + Sync {
    fn kind(&self) -> EstimatorKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn needs_point_set(&self) -> bool {
        self.kind().uses_point_set()
    }

    fn needs_positive_half(&self) -> bool {
        false
    }

    fn chi_cdf_uncounted(&self) -> bool {
        false
    }

    fn cost_per_replicate(&self, d: usize, card_v: usize) -> u64 {
        self.kind().cost(d, card_v)
    }

    /// Check that the problem and point set are acceptable.
    fn validate(&self, problem: &Problem, points: Option<&PointSet>) -> Result<()> {
        if self.needs_point_set() {
            check_point_set(self.name(), problem, points)?;
        }
        Ok(())
    }

    /// One per-replicate value in `[0, 1]`.
    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, scratch: &mut Scratch) -> f64;
}

fn check_point_set(name: &str, problem: &Problem, points: Option<&PointSet>) -> Result<()> {
    let v = points.ok_or_else(|| Error::param(format!("{name} needs a point set")))?;
    if v.dim() != problem.dim() {
        return Err(Error::param(format!(
            "point set dimension {} differs from problem dimension {}",
            v.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

/// The `m` per-replicate values of `est`; replicate `i` draws from
/// `stream.substream(i)`.
pub fn replicate_values(
    est: &dyn Estimator,
    problem: &Problem,
    points: Option<&PointSet>,
    m: usize,
    stream: &RandomStream,
) -> Result<Vec<f64>> {
    est.validate(problem, points)?;
    let ctx = Context::new(problem, points, est.needs_positive_half())?;
    let d = problem.dim();
    Ok((0..m)
        .into_par_iter()
        .with_min_len(64)
        .map_init(
            || Scratch::new(d),
            |scratch, i| {
                let mut s = stream.substream(i as u64);
                est.replicate(&ctx, &mut s, scratch)
            },
        )
        .collect())
}

/// Run `m` replicates of `est` and summarize them.
pub fn run(
    est: &dyn Estimator,
    problem: &Problem,
    points: Option<&PointSet>,
    m: usize,
    stream: &RandomStream,
) -> Result<EstimateResult> {
    if m < 2 {
        return Err(Error::param("at least two replicates are needed"));
    }
    let values = replicate_values(est, problem, points, m, stream)?;
    let d = problem.dim();
    let (estimate, sample_variance, variance_se) = summarize(&values);
    let card_v = points.filter(|_| est.needs_point_set()).map(PointSet::len);
    Ok(EstimateResult {
        estimator: est.name().to_string(),
        estimate,
        sample_variance,
        variance_se,
        replicates: m,
        cost_per_replicate: est.cost_per_replicate(d, card_v.unwrap_or(0)),
        chi_cdf_uncounted: est.chi_cdf_uncounted(),
        card_v,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
        generator: GENERATOR,
    })
}

/// Name-keyed collection of estimators.
#[derive(Clone, Default)]
pub struct EstimatorRegistry {
    entries: Vec<Arc<dyn Estimator>>,
}

impl EstimatorRegistry {
    pub fn new() -> Self {
        EstimatorRegistry::default()
    }

    /// The five built-in estimators.
    pub fn standard() -> Self {
        let mut r = EstimatorRegistry::new();
        let builtins: [Arc<dyn Estimator>; 5] = [
            Arc::new(Crude),
            Arc::new(CrudeAntithetic),
            Arc::new(Spherical),
            Arc::new(SphericalAntithetic),
            Arc::new(SphericalStar),
        ];
        for e in builtins {
            r.register(e).expect("built-in names are distinct");
        }
        r
    }

    pub fn register(&mut self, est: Arc<dyn Estimator>) -> Result<()> {
        if self.entries.iter().any(|e| e.name() == est.name()) {
            return Err(Error::param(format!("estimator '{}' is already registered", est.name())));
        }
        self.entries.push(est);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Estimator>> {
        let norm = name.trim().to_ascii_lowercase().replace('_', "-");
        self.entries
            .iter()
            .find(|e| e.name() == norm)
            .cloned()
            .ok_or_else(|| Error::param(format!("unknown estimator '{name}'")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

pub fn estimate_crude(p: &Problem, m: usize, s: &RandomStream) -> Result<EstimateResult> {
    run(&Crude, p, None, m, s)
}

pub fn estimate_crude_at(p: &Problem, m: usize, s: &RandomStream) -> Result<EstimateResult> {
    run(&CrudeAntithetic, p, None, m, s)
}

pub fn estimate_spherical(p: &Problem, v: &PointSet, m: usize, s: &RandomStream) -> Result<EstimateResult> {
    run(&Spherical, p, Some(v), m, s)
}

pub fn estimate_spherical_at(p: &Problem, v: &PointSet, m: usize, s: &RandomStream) -> Result<EstimateResult> {
    run(&SphericalAntithetic, p, Some(v), m, s)
}

pub fn estimate_spherical_star(p: &Problem, v: &PointSet, m: usize, s: &RandomStream) -> Result<EstimateResult> {
    run(&SphericalStar, p, Some(v), m, s)
}
