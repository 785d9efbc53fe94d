//! Experiment grids: every combination of dimension, covariance, region,
//! point set and estimator, with variance ratios against crude Monte Carlo.
//!
//! Each cell draws from streams keyed by its identifiers and the
//! macro-replication index, so a sub-grid reproduces the corresponding rows
//! of a larger grid exactly, and rows do not depend on scheduling.

mod aggregate;
mod config;
mod emit;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    run, variance_ratio, Estimator, EstimateResult, EstimatorKind,
    EstimatorRegistry, Problem,
};
use crate::lattices::{build_pointset, load_pointset, LatticeFamily, PointSet};
use crate::linalg::CovarianceModel;
use crate::randsrc::{key_of, RandomStream};
use crate::regions::{parse_region, Region, STANDARD_LABELS};

pub use aggregate::{aggregate, emit_aggregate, AggregateRow, Grouping, ANTISYMMETRIC_LABELS};
pub use config::{parse_config, DEFAULT_REDUCED_COVARIANCES};
pub use emit::{emit, parse_csv, OutputFormat, CSV_COLUMNS};

/// Source of the spherical estimators' point set in one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeChoice {
    /// The largest-kissing construction available for the dimension.
    Max,
    Family(LatticeFamily),
    File(PathBuf),
}

impl LatticeChoice {
    /// The family or file this choice stands for in dimension `d`.
    pub fn resolve(&self, d: usize) -> LatticeChoice {
        match self {
            LatticeChoice::Max => {
                LatticeChoice::Family(LatticeFamily::max_kissing(d).unwrap_or(if d >= 2 {
                    LatticeFamily::Dd
                } else {
                    LatticeFamily::Zd
                }))
            }
            other => other.clone(),
        }
    }

    pub fn load(&self, d: usize) -> Result<PointSet> {
        match self.resolve(d) {
            LatticeChoice::Family(f) => build_pointset(f, d),
            LatticeChoice::File(p) => {
                let ps = load_pointset(&p)?;
                if ps.dim() != d {
                    return Err(Error::param(format!(
                        "point set file {} has dimension {}, expected {d}",
                        p.display(),
                        ps.dim()
                    )));
                }
                Ok(ps)
            }
            LatticeChoice::Max => unreachable!("resolved above"),
        }
    }
}

impl fmt::Display for LatticeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeChoice::Max => f.write_str("max"),
            LatticeChoice::Family(fam) => write!(f, "{fam}"),
            LatticeChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for LatticeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("max") {
            Ok(LatticeChoice::Max)
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(LatticeChoice::File(PathBuf::from(path)))
        } else {
            Ok(LatticeChoice::Family(s.parse()?))
        }
    }
}

/// How the crude Monte Carlo variance in variance ratios is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Sample variance of a crude run with the same sample size.
    Empirical,
    /// `p(1 − p)`, the exact crude variance, at a precise reference estimate
    /// of `p` (sph-star on the default point set when the region allows it,
    /// sph otherwise).
    Bernoulli,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Empirical => "empirical",
            Baseline::Bernoulli => "bernoulli",
        })
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "empirical" => Ok(Baseline::Empirical),
            "bernoulli" => Ok(Baseline::Bernoulli),
            _ => Err(Error::param(format!("unknown baseline '{s}'"))),
        }
    }
}

/// One experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    pub estimators: Vec<EstimatorKind>,
    pub covariances: Vec<CovarianceModel>,
    /// Standard labels or region specs accepted by `parse_region`.
    pub regions: Vec<String>,
    pub samples: usize,
    pub macro_reps: usize,
    pub seed: u64,
    /// Point sets used in every dimension without an override.
    pub lattices: Vec<LatticeChoice>,
    pub lattice_overrides: BTreeMap<usize, Vec<LatticeChoice>>,
    pub baseline: Baseline,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for GridConfig {
    /// d = 2..8, all five estimators, nine covariances, the nine E/O/R
    /// regions, M = 10⁴, one macro-replication.
    fn default() -> Self {
        GridConfig {
            dims: (2..=8).collect(),
            estimators: EstimatorKind::ALL.to_vec(),
            covariances: CovarianceModel::benchmark_set(),
            regions: STANDARD_LABELS[..9].iter().map(|s| s.to_string()).collect(),
            samples: 10_000,
            macro_reps: 1,
            seed: 20_240_601,
            lattices: vec![LatticeChoice::Max],
            lattice_overrides: BTreeMap::new(),
            baseline: Baseline::Bernoulli,
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::param("samples must be at least 2"));
        }
        if self.macro_reps < 1 {
            return Err(Error::param("macro must be at least 1"));
        }
        for (name, empty) in [
            ("dims", self.dims.is_empty()),
            ("estimators", self.estimators.is_empty()),
            ("covariances", self.covariances.is_empty()),
            ("regions", self.regions.is_empty()),
            ("lattices", self.lattices.is_empty()),
        ] {
            if empty {
                return Err(Error::param(format!("{name} must not be empty")));
            }
        }
        for &d in &self.dims {
            if d < 2 {
                return Err(Error::param("dimensions must be at least 2"));
            }
            for label in &self.regions {
                region_for(label, d)?;
            }
            for c in &self.covariances {
                c.validate(d)?;
            }
        }
        Ok(())
    }

    /// Point sets used in dimension `d`.
    pub fn lattices_for(&self, d: usize) -> Vec<LatticeChoice> {
        let list = self.lattice_overrides.get(&d).unwrap_or(&self.lattices);
        let mut out: Vec<LatticeChoice> = Vec::new();
        for c in list {
            let r = c.resolve(d);
            if !out.contains(&r) {
                out.push(r);
            }
        }
        out
    }

    /// Cells in output order: dimension, covariance, region, point set,
    /// estimator. Crude estimators get one cell per (d, Σ, A).
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &d in &self.dims {
            let lattices = self.lattices_for(d);
            for cov in &self.covariances {
                for region in &self.regions {
                    let mut push = |estimator, lattice| {
                        out.push(Cell {
                            dim: d,
                            covariance: *cov,
                            region: region.clone(),
                            estimator,
                            lattice,
                        })
                    };
                    for &e in self.estimators.iter().filter(|e| !e.uses_point_set()) {
                        push(e, None);
                    }
                    for l in &lattices {
                        for &e in self.estimators.iter().filter(|e| e.uses_point_set()) {
                            push(e, Some(l.clone()));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Region from a standard label or a region spec.
pub fn region_for(label: &str, d: usize) -> Result<Region> {
    parse_region(label, d)
}

/// Identifiers of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dim: usize,
    pub covariance: CovarianceModel,
    pub region: String,
    pub estimator: EstimatorKind,
    pub lattice: Option<LatticeChoice>,
}

impl Cell {
    /// Stream key of the problem instance `(d, Σ, A)` for one macro-replication.
    fn problem_key(&self, k: usize) -> String {
        format!("{}|{}|{}|{k}", self.dim, self.covariance.label(), self.region)
    }

    fn stream(&self, seed: u64, k: usize) -> RandomStream {
        let lattice = self.lattice.as_ref().map(|l| l.to_string()).unwrap_or_default();
        RandomStream::new(
            seed,
            key_of(&format!("{}|{}|{lattice}", self.problem_key(k), self.estimator)),
        )
    }
}

/// One output row: a cell's estimates averaged over macro-replications, and
/// ratios of the pooled crude and estimator variances.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dim: usize,
    pub covariance: String,
    pub region: String,
    pub estimator: String,
    pub lattice: Option<String>,
    pub card_v: Option<usize>,
    pub samples: usize,
    pub macro_reps: usize,
    /// Mean of the macro-replication estimates.
    pub estimate: f64,
    /// Mean per-replicate sample variance.
    pub variance: f64,
    /// Mean crude variance over mean estimator variance, with its standard
    /// error across macro-replications.
    pub vr: Option<f64>,
    pub vr_se: Option<f64>,
    /// `vr` scaled by the crude-to-estimator cost ratio; absent for sph-star.
    pub pvr: Option<f64>,
    pub pvr_se: Option<f64>,
    pub cost: u64,
    /// Every macro-replication had zero sample variance (infinite ratio).
    pub zero_variance: bool,
    /// Exact central-antisymmetry verdict of the region.
    pub antisymmetric: Option<bool>,
    /// Macro-replications whose ratio was undefined (zero crude variance).
    pub undefined: usize,
    /// Wall time in seconds; not part of the emitted tables.
    pub wall_seconds: f64,
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(cell: &Cell, cfg: &GridConfig, err: &Error) -> BenchRow {
        BenchRow {
            dim: cell.dim,
            covariance: cell.covariance.label(),
            region: cell.region.clone(),
            estimator: cell.estimator.to_string(),
            lattice: cell.lattice.as_ref().map(LatticeChoice::to_string),
            card_v: None,
            samples: cfg.samples,
            macro_reps: cfg.macro_reps,
            estimate: f64::NAN,
            variance: f64::NAN,
            vr: None,
            vr_se: None,
            pvr: None,
            pvr_se: None,
            cost: 0,
            zero_variance: false,
            antisymmetric: None,
            undefined: 0,
            wall_seconds: 0.0,
            error: Some(err.to_string()),
        }
    }
}

/// Ratio `Σb / Σv` of paired per-macro variances with its standard error.
/// Pooling before dividing keeps runs of a rare event that saw no hits from
/// making the whole cell infinite. `None` when there are no pairs.
fn pooled_ratio(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let b = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let v = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    if v == 0.0 {
        return Some((f64::INFINITY, 0.0));
    }
    let r = b / v;
    let se = if pairs.len() > 1 {
        let s = pairs.iter().map(|&(bk, vk)| (bk - r * vk).powi(2)).sum::<f64>() / (n - 1.0);
        (s / n).sqrt() / v
    } else {
        0.0
    };
    Some((r, se))
}

/// Shared, immutable inputs of a grid run.
struct Prepared {
    problems: BTreeMap<(usize, String, String), Arc<Problem>>,
    points: BTreeMap<(usize, LatticeChoice), std::result::Result<Arc<PointSet>, String>>,
    registry: EstimatorRegistry,
}

impl Prepared {
    fn new(cfg: &GridConfig) -> Result<Self> {
        let mut problems = BTreeMap::new();
        let mut points = BTreeMap::new();
        for &d in &cfg.dims {
            for c in &cfg.covariances {
                for label in &cfg.regions {
                    let p = Problem::centered(*c, region_for(label, d)?)?;
                    problems.insert((d, c.label(), label.clone()), Arc::new(p));
                }
            }
            let mut sets = cfg.lattices_for(d);
            sets.push(LatticeChoice::Max.resolve(d));
            for l in sets {
                if let std::collections::btree_map::Entry::Vacant(e) = points.entry((d, l.clone())) {
                    e.insert(l.load(d).map(Arc::new).map_err(|err| format!("point set {l}: {err}")));
                }
            }
        }
        Ok(Prepared {
            problems,
            points,
            registry: EstimatorRegistry::standard(),
        })
    }

    fn problem(&self, cell: &Cell) -> Arc<Problem> {
        self.problems[&(cell.dim, cell.covariance.label(), cell.region.clone())].clone()
    }

    fn points(&self, d: usize, l: &LatticeChoice) -> Result<Arc<PointSet>> {
        self.points[&(d, l.clone())].clone().map_err(Error::Parameter)
    }
}

type ProblemKey = (usize, String, String, usize);

/// Crude variance used as the numerator of variance ratios, for one problem
/// instance and macro-replication.
fn baseline_result(cfg: &GridConfig, prep: &Prepared, cell: &Cell, k: usize) -> Result<EstimateResult> {
    let problem = prep.problem(cell);
    let crude = Cell {
        estimator: EstimatorKind::Crude,
        lattice: None,
        ..cell.clone()
    };
    let mut base = run(
        prep.registry.get("crude")?.as_ref(),
        &problem,
        None,
        cfg.samples,
        &crude.stream(cfg.seed, k),
    )?;
    if cfg.baseline == Baseline::Bernoulli {
        let kind = if problem.region().has_radial_form() {
            EstimatorKind::SphStar
        } else {
            EstimatorKind::Sph
        };
        let reference = Cell {
            estimator: kind,
            lattice: Some(LatticeChoice::Max.resolve(cell.dim)),
            ..cell.clone()
        };
        let v = prep.points(cell.dim, reference.lattice.as_ref().expect("set above"))?;
        let est = prep.registry.get(kind.name())?;
        let stream = reference.stream(cfg.seed ^ REFERENCE_SALT, k);
        let r = run(est.as_ref(), &problem, Some(&v), cfg.samples, &stream)?;
        let p = r.estimate.clamp(0.0, 1.0);
        base.sample_variance = p * (1.0 - p);
        base.variance_se = 0.0;
    }
    Ok(base)
}

/// Seed offset of the reference runs behind the Bernoulli baseline.
const REFERENCE_SALT: u64 = 0x00ba_5e11;

fn problem_key(cell: &Cell, k: usize) -> ProblemKey {
    (cell.dim, cell.covariance.label(), cell.region.clone(), k)
}

fn run_cell(
    cfg: &GridConfig,
    prep: &Prepared,
    baselines: &BTreeMap<ProblemKey, std::result::Result<EstimateResult, String>>,
    cell: &Cell,
) -> Result<BenchRow> {
    let start = Instant::now();
    let problem = prep.problem(cell);
    let est: Arc<dyn Estimator> = prep.registry.get(cell.estimator.name())?;
    let points = cell.lattice.as_ref().map(|l| prep.points(cell.dim, l)).transpose()?;
    let mut estimates = Vec::with_capacity(cfg.macro_reps);
    let mut variances = Vec::with_capacity(cfg.macro_reps);
    let mut pairs = Vec::with_capacity(cfg.macro_reps);
    let mut undefined = 0;
    let mut cost = 0;
    let mut base_cost = 0;
    let mut card_v = None;
    for k in 0..cfg.macro_reps {
        let r = run(est.as_ref(), &problem, points.as_deref(), cfg.samples, &cell.stream(cfg.seed, k))?;
        let base = baselines[&problem_key(cell, k)]
            .as_ref()
            .map_err(|e| Error::Degeneracy(format!("crude baseline failed: {e}")))?;
        match variance_ratio(&r, base) {
            Ok(_) => pairs.push((base.sample_variance, r.sample_variance)),
            Err(Error::Degeneracy(_)) => undefined += 1,
            Err(e) => return Err(e),
        }
        estimates.push(r.estimate);
        variances.push(r.sample_variance);
        cost = r.cost_per_replicate;
        base_cost = base.cost_per_replicate;
        card_v = r.card_v;
    }
    let pooled = pooled_ratio(&pairs);
    let penalty = base_cost as f64 / cost as f64;
    let show_pvr = !est.chi_cdf_uncounted();
    let m = cfg.macro_reps as f64;
    Ok(BenchRow {
        dim: cell.dim,
        covariance: cell.covariance.label(),
        region: cell.region.clone(),
        estimator: cell.estimator.to_string(),
        lattice: points.as_ref().map(|p| p.name().to_string()),
        card_v,
        samples: cfg.samples,
        macro_reps: cfg.macro_reps,
        estimate: estimates.iter().sum::<f64>() / m,
        variance: variances.iter().sum::<f64>() / m,
        vr: pooled.map(|p| p.0),
        vr_se: pooled.map(|p| p.1),
        pvr: pooled.filter(|_| show_pvr).map(|p| p.0 * penalty),
        pvr_se: pooled.filter(|_| show_pvr).map(|p| p.1 * penalty),
        cost,
        zero_variance: pooled.is_some_and(|p| p.0.is_infinite()),
        antisymmetric: problem.region().is_centrally_antisymmetric().ok(),
        undefined,
        wall_seconds: start.elapsed().as_secs_f64(),
        error: None,
    })
}

/// Run every cell of `cfg`. A failing cell yields a row carrying the error
/// and the run continues.
pub fn run_grid(cfg: &GridConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let cells = cfg.cells();
    let mut instances: Vec<(ProblemKey, &Cell)> = Vec::new();
    for cell in &cells {
        for k in 0..cfg.macro_reps {
            let key = problem_key(cell, k);
            if !instances.iter().any(|(q, _)| *q == key) {
                instances.push((key, cell));
            }
        }
    }
    let baselines: BTreeMap<ProblemKey, std::result::Result<EstimateResult, String>> = instances
        .par_iter()
        .map(|(key, cell)| {
            let r = baseline_result(cfg, &prep, cell, key.3).map_err(|e| e.to_string());
            (key.clone(), r)
        })
        .collect();
    Ok(cells
        .par_iter()
        .map(|cell| {
            run_cell(cfg, &prep, &baselines, cell).unwrap_or_else(|e| BenchRow::failed(cell, cfg, &e))
        })
        .collect())
}
