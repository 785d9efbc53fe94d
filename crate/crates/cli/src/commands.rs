use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use sphmc::bench::{self, aggregate, emit, emit_aggregate, Grouping, LatticeChoice, OutputFormat};
use sphmc::estimators::{cap_decomposition_count, estimate_g_sphere_region, run, EstimateResult, EstimatorRegistry, Problem};
use sphmc::lattices::{
    build_pointset, load_pointset, min_distance, parse_family_spec, sampled_monomials, save_pointset, variance_upper_bound,
    verify_t_design, verify_t_design_on, LatticeFamily, PointSet,
};
use sphmc::linalg::{build_covariance, CovarianceModel};
use sphmc::randsrc::RandomStream;
use sphmc::regions::parse_region;
use sphmc::specfun::cap_measure;
use sphmc::{Error, Result};

use crate::{BenchArgs, CapTestArgs, EstimateArgs, LatticeBuildArgs, LatticeVerifyArgs};

/// Design checks above this many points in 24 or more dimensions use the
/// fixed sampled monomial list.
const EXHAUSTIVE_DIM_LIMIT: usize = 24;

/// Dimension from a family spec (`e8`, `d16`) and `--dim`, which must agree.
fn family_dim(spec: &str, dim: Option<usize>) -> Result<(LatticeFamily, usize)> {
    let (family, implied) = parse_family_spec(spec)?;
    match (implied, dim) {
        (Some(f), None) => Ok((family, f)),
        (Some(f), Some(d)) if d == f => Ok((family, f)),
        (Some(f), Some(d)) => Err(Error::Parameter(format!("{spec} lives in dimension {f}, not {d}"))),
        (None, Some(d)) => Ok((family, d)),
        (None, None) => Err(Error::Parameter(format!("--dim is required for {family}"))),
    }
}

/// Point set from `--family`/`--dim` or `--lattice FILE`.
fn point_set(family: Option<&str>, dim: Option<usize>, file: Option<&Path>) -> Result<(PointSet, Option<LatticeFamily>)> {
    match (family, file) {
        (Some(f), None) => {
            let (fam, d) = family_dim(f, dim)?;
            Ok((build_pointset(fam, d)?, Some(fam)))
        }
        (None, Some(p)) => {
            let ps = load_pointset(p)?;
            if let Some(d) = dim.filter(|&d| d != ps.dim()) {
                return Err(Error::Parameter(format!("{} has dimension {}, not {d}", p.display(), ps.dim())));
            }
            Ok((ps, None))
        }
        _ => Err(Error::Parameter("give either --family or --lattice".into())),
    }
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn lattice_build(a: LatticeBuildArgs) -> Result<ExitCode> {
    let (ps, _) = point_set(Some(&a.family), a.dim, None)?;
    save_pointset(&ps, &a.out)?;
    println!("name {}", ps.name());
    println!("dim {}", ps.dim());
    println!("points {}", ps.len());
    println!("d_min {}", min_distance(&ps)?);
    println!("out {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn design_deviation(ps: &PointSet, t: u32) -> (f64, String) {
    if ps.dim() >= EXHAUSTIVE_DIM_LIMIT {
        let list = sampled_monomials(ps.dim(), t, 200);
        let n = list.len();
        (verify_t_design_on(ps, &list), format!("sampled {n} monomials"))
    } else {
        (verify_t_design(ps, t), "exhaustive".into())
    }
}

pub fn lattice_verify(a: LatticeVerifyArgs) -> Result<ExitCode> {
    const TOL: f64 = 1e-10;
    let (ps, fam) = point_set(a.family.as_deref(), a.dim, a.lattice.as_deref())?;
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    if let Some(f) = fam {
        let expected = f.kissing_number(ps.dim());
        check("cardinality", ps.len() == expected, format!("{} (expected {expected})", ps.len()));
    } else {
        println!("INFO cardinality: {}", ps.len());
    }
    let symmetric = ps.is_centrally_symmetric();
    let detail = if symmetric { "every point has its negative" } else { "some points lack their negative" };
    check("central symmetry", symmetric, detail.to_string());
    let dm = min_distance(&ps)?;
    println!("INFO d_min: {dm}");
    let t = match (a.t, fam) {
        (Some(t), _) => t,
        (None, Some(f)) => f.design_strength(ps.dim()),
        (None, None) => {
            println!("INFO design: skipped, pass --t to check a point-set file");
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
    };
    let (dev, how) = design_deviation(&ps, t);
    check(&format!("{t}-design"), dev <= TOL, format!("max deviation {dev:e} ({how})"));
    if a.sharp {
        let (dev, how) = design_deviation(&ps, t + 1);
        check(&format!("not a {}-design", t + 1), dev > TOL, format!("max deviation {dev:e} ({how})"));
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

/// `max`, a family spec, `file:PATH`, or an existing file.
fn lattice_choice(text: &str, dim: usize) -> Result<LatticeChoice> {
    if let Ok(c) = text.parse::<LatticeChoice>() {
        return Ok(c);
    }
    let p = PathBuf::from(text);
    if p.exists() {
        return Ok(LatticeChoice::File(p));
    }
    let (family, _) = family_dim(text, Some(dim))?;
    Ok(LatticeChoice::Family(family))
}

const ESTIMATE_COLUMNS: [&str; 14] = [
    "estimator",
    "lattice",
    "card_v",
    "samples",
    "macro",
    "seed",
    "stream_id",
    "estimate",
    "std_error",
    "variance",
    "variance_se",
    "cost",
    "chi_cdf_uncounted",
    "generator",
];

fn estimate_fields(r: &EstimateResult, lattice: &str, k: usize) -> Vec<String> {
    vec![
        r.estimator.clone(),
        lattice.to_string(),
        r.card_v.map(|v| v.to_string()).unwrap_or_default(),
        r.replicates.to_string(),
        k.to_string(),
        r.seed.to_string(),
        r.stream_id.to_string(),
        r.estimate.to_string(),
        r.std_error().to_string(),
        r.sample_variance.to_string(),
        r.variance_se.to_string(),
        r.cost_per_replicate.to_string(),
        r.chi_cdf_uncounted.to_string(),
        r.generator.to_string(),
    ]
}

pub fn estimate(a: EstimateArgs) -> Result<ExitCode> {
    if a.macro_reps == 0 {
        return Err(Error::Parameter("--macro must be at least 1".into()));
    }
    let region = parse_region(&a.region, a.dim)?;
    let cov: CovarianceModel = a.cov.parse()?;
    let mu = a.mean.clone().unwrap_or_else(|| vec![0.0; a.dim]);
    let problem = Problem::new(mu, build_covariance(cov, a.dim)?, region)?;
    let est = EstimatorRegistry::standard().get(&a.estimator)?;
    let points = if est.needs_point_set() {
        Some(lattice_choice(&a.lattice, a.dim)?.load(a.dim)?)
    } else {
        None
    };
    let lattice = points.as_ref().map(|p| p.name().to_string()).unwrap_or_default();
    let results = (0..a.macro_reps)
        .map(|k| run(est.as_ref(), &problem, points.as_ref(), a.samples, &RandomStream::new(a.seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;

    let text = match a.format.as_deref().map(str::parse::<OutputFormat>).transpose()? {
        Some(OutputFormat::Csv) => {
            let mut s = ESTIMATE_COLUMNS.join(",") + "\n";
            for (k, r) in results.iter().enumerate() {
                s += &(estimate_fields(r, &lattice, k).join(",") + "\n");
            }
            s
        }
        Some(OutputFormat::Markdown) => {
            let mut s = format!("| {} |\n{}|\n", ESTIMATE_COLUMNS.join(" | "), "|---".repeat(ESTIMATE_COLUMNS.len()));
            for (k, r) in results.iter().enumerate() {
                s += &format!("| {} |\n", estimate_fields(r, &lattice, k).join(" | "));
            }
            s
        }
        None => {
            let k = results.len() as f64;
            let mean = results.iter().map(|r| r.estimate).sum::<f64>() / k;
            let var = results.iter().map(|r| r.sample_variance).sum::<f64>() / k;
            let se = (var / (a.samples as f64 * k)).sqrt();
            let r0 = &results[0];
            let mut s = String::new();
            s += &format!("estimator {}\n", r0.estimator);
            if !lattice.is_empty() {
                s += &format!("lattice {lattice}\ncard_v {}\n", r0.card_v.unwrap_or(0));
            }
            s += &format!("samples {}\nmacro {}\nseed {}\ngenerator {}\n", a.samples, a.macro_reps, a.seed, r0.generator);
            s += &format!("estimate {mean}\nstd_error {se}\nvariance {var}\n");
            s += &format!("cost {}\nchi_cdf_uncounted {}\n", r0.cost_per_replicate, r0.chi_cdf_uncounted);
            s
        }
    };
    write_or_print(&text, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn grouping(text: &str) -> Result<Grouping> {
    match text.trim().to_ascii_lowercase().as_str() {
        "region-type" | "type" => Ok(Grouping::RegionType),
        "antisymmetric" => Ok(Grouping::Antisymmetric),
        "region" => Ok(Grouping::Region),
        "dim" => Ok(Grouping::Dim),
        "estimator" => Ok(Grouping::Estimator),
        other => Err(Error::Parameter(format!("unknown grouping '{other}'"))),
    }
}

pub fn bench(a: BenchArgs) -> Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(p) => bench::parse_config(&fs::read_to_string(p)?)?,
        None => bench::GridConfig::default(),
    };
    if let Some(out) = a.out {
        cfg.out = Some(out);
    }
    if let Some(f) = &a.format {
        cfg.format = f.parse()?;
    }
    if let Some(m) = a.samples {
        cfg.samples = m;
    }
    if let Some(k) = a.macro_reps {
        cfg.macro_reps = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let group = a.aggregate.as_deref().map(grouping).transpose()?;
    cfg.validate()?;
    let rows = bench::run_grid(&cfg)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: cell d={} {} {} {} failed: {}",
            r.dim,
            r.covariance,
            r.region,
            r.estimator,
            r.error.as_deref().unwrap_or("")
        );
    }
    let text = emit(&rows, cfg.format);
    write_or_print(&text, cfg.out.as_deref())?;
    if let Some(g) = group {
        let (agg, warnings) = aggregate(&rows, g)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        if cfg.out.is_none() {
            println!();
        }
        print!("{}", emit_aggregate(&agg, cfg.format));
    }
    Ok(ExitCode::SUCCESS)
}

/// Angle in radians: a number, `pi`, `pi/k`, `m*pi/k` or `mpi/k`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || Error::Parameter(format!("cannot read angle '{text}'"));
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
    Ok(coef * std::f64::consts::PI / den)
}

pub fn cap_test(a: CapTestArgs) -> Result<ExitCode> {
    let (ps, _) = point_set(a.family.as_deref(), a.dim, a.lattice.as_deref())?;
    let theta = parse_angle(&a.theta)?;
    let d = ps.dim();
    let dmin = min_distance(&ps)?;
    let mut axis = vec![0.0; d];
    axis[0] = 1.0;
    let r = estimate_g_sphere_region(&ps, &axis, theta, a.samples, &RandomStream::new(a.seed, 0))?;
    let pi = cap_measure(theta, d);
    let card = ps.len();
    println!("set {} (d = {d}, |V| = {card}, d_min = {dmin})", ps.name());
    println!("theta {theta}");
    println!("cap_measure {pi}");
    println!("estimate {} (std error {})", r.estimate, r.std_error());
    println!("variance {} (std error {})", r.sample_variance, r.variance_se);
    let single_point = 2.0 * theta.sin() < dmin && theta < std::f64::consts::FRAC_PI_2;
    let pass = if single_point {
        let exact = pi / card as f64 - pi * pi;
        let z = (r.sample_variance - exact).abs() / r.variance_se;
        println!("regime single-point (2 sin theta < d_min)");
        println!("exact_variance {exact}");
        println!("deviation {z} standard errors");
        z <= 3.0
    } else {
        eprintln!("warning: 2 sin(theta) >= d_min; checking the upper bound instead of the exact variance");
        let n = match a.pieces {
            Some(n) => n,
            None => cap_decomposition_count(d, theta, dmin).map_err(|_| {
                Error::Parameter(format!("--pieces is required for d = {d}"))
            })?,
        };
        let bound = variance_upper_bound(pi, n, card);
        println!("regime bound (N = {n} pieces)");
        println!("variance_bound {bound}");
        r.sample_variance <= bound + 3.0 * r.variance_se
    };
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
