//! `sphmc`: build and check lattice point sets, estimate multivariate normal
//! probabilities, run benchmark grids and cap-variance checks.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on numerical or
//! integrity failures (including failed checks).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "sphmc", version, about = "Spherical Monte Carlo for multivariate normal probabilities")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a shortest-vector point set and write it to a file.
    LatticeBuild(LatticeBuildArgs),
    /// Check cardinality, symmetry, minimal distance and design strength.
    LatticeVerify(LatticeVerifyArgs),
    /// Point-set commands in two-word form (`lattice build`, `lattice verify`).
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Estimate P{X in A} for X ~ N(mu, Sigma).
    Estimate(EstimateArgs),
    /// Run an experiment grid from a config file.
    Bench(BenchArgs),
    /// Compare the variance of the rotated-set cap estimator with theory.
    CapTest(CapTestArgs),
}

#[derive(Subcommand, Debug)]
enum LatticeCommand {
    /// Same as `lattice-build`.
    Build(LatticeBuildArgs),
    /// Same as `lattice-verify`.
    Verify(LatticeVerifyArgs),
}

#[derive(Args, Debug)]
struct LatticeBuildArgs {
    /// Lattice family: zd, ad, dd, e6, e7, e8, bw16, leech.
    #[arg(long)]
    family: String,
    /// Dimension (implied for e6, e7, e8, bw16, leech).
    #[arg(long)]
    dim: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LatticeVerifyArgs {
    /// Lattice family to build and check.
    #[arg(long, conflicts_with = "lattice")]
    family: Option<String>,
    /// Dimension (implied for fixed-dimension families).
    #[arg(long)]
    dim: Option<usize>,
    /// Point-set file to check instead of a family.
    #[arg(long)]
    lattice: Option<PathBuf>,
    /// Design strength to verify (default: the family's known strength).
    #[arg(long)]
    t: Option<u32>,
    /// Also check that the set is not a (t+1)-design.
    #[arg(long)]
    sharp: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Region label (E1..E3, O1..O3, R1..R3, S) or spec (box:lo,hi;..., ell:c1,...;r, union:box:...|box:...).
    #[arg(long)]
    region: String,
    /// Covariance: identity, one-factor:RHO, ar1:RHO.
    #[arg(long, default_value = "identity")]
    cov: String,
    /// Dimension of the problem.
    #[arg(long)]
    dim: usize,
    /// Mean vector, comma separated (default: zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mean: Option<Vec<f64>>,
    /// crude, crude-at, sph, sph-at, sph-star.
    #[arg(long, default_value = "sph-star")]
    estimator: String,
    /// Point set: a family name, `max`, or a point-set file.
    #[arg(long, default_value = "max")]
    lattice: String,
    /// Replicates per run.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Independent runs; more than one also reports their spread.
    #[arg(long = "macro", default_value_t = 1)]
    macro_reps: usize,
    /// Seed of the random streams; output is a function of it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output format: csv or md (default: key-value lines).
    #[arg(long)]
    format: Option<String>,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Grid config file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's output format: csv or md.
    #[arg(long)]
    format: Option<String>,
    /// Override the replicates per cell.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the macro-replications per cell.
    #[arg(long = "macro")]
    macro_reps: Option<usize>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also print averaged ratios: region-type, antisymmetric, region, dim, estimator.
    #[arg(long)]
    aggregate: Option<String>,
}

#[derive(Args, Debug)]
struct CapTestArgs {
    /// Lattice family of the point set.
    #[arg(long, conflicts_with = "lattice")]
    family: Option<String>,
    /// Dimension (implied for fixed-dimension families).
    #[arg(long)]
    dim: Option<usize>,
    /// Point-set file instead of a family.
    #[arg(long)]
    lattice: Option<PathBuf>,
    /// Cap angular radius in radians; accepts forms like `pi/12` or `2pi/3`.
    #[arg(long)]
    theta: String,
    /// Number of pieces of diameter below d_min covering the cap, for the
    /// bound outside the single-point regime (computed when d is 2 or 3).
    #[arg(long)]
    pieces: Option<usize>,
    /// Random rotations of the point set.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Seed of the random stream.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::LatticeBuild(a) | Command::Lattice(LatticeCommand::Build(a)) => commands::lattice_build(a),
        Command::LatticeVerify(a) | Command::Lattice(LatticeCommand::Verify(a)) => commands::lattice_verify(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Bench(a) => commands::bench(a),
        Command::CapTest(a) => commands::cap_test(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
