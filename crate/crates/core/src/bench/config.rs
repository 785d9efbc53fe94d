//! `key = value` grid files.
//!
//! ```text
//! # comment
//! dims = 2-8            # or 2,4,8
//! estimators = all      # or crude, sph-at, ...
//! covariances = default # nine models, `reduced` for three, or a list
//! regions = default     # E1..R3, or labels / region specs separated by `;;`
//! samples = 10000
//! macro = 10
//! seed = 1
//! lattices = max        # or zd, ad, dd, file:path.pts
//! lattice.16 = zd, ad, dd
//! baseline = bernoulli  # or empirical
//! format = csv          # or md
//! out = table3.csv
//! ```

use std::path::PathBuf;

use super::{GridConfig, LatticeChoice};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::linalg::CovarianceModel;
use crate::regions::STANDARD_LABELS;

/// The three covariance models of the reduced grid.
pub const DEFAULT_REDUCED_COVARIANCES: [CovarianceModel; 3] = [
    CovarianceModel::Identity,
    CovarianceModel::OneFactor(0.2),
    CovarianceModel::Ar1(0.2),
];

fn parse_dims(v: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let a: usize = a.trim().parse().map_err(|_| format!("bad dimension range '{part}'"))?;
            let b: usize = b.trim().parse().map_err(|_| format!("bad dimension range '{part}'"))?;
            if a > b {
                return Err(format!("empty dimension range '{part}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad dimension '{part}'"))?);
        }
    }
    Ok(out)
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| f(p).map_err(|e| e.to_string()))
        .collect()
}

fn parse_number<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.replace('_', "").parse().map_err(|_| format!("bad value '{v}' for {key}"))
}

/// Parse a grid file; keys not given keep their [`GridConfig::default`]
/// values.
pub fn parse_config(text: &str) -> Result<GridConfig> {
    let mut cfg = GridConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key = value, got '{line}'")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let res: std::result::Result<(), String> = (|| {
            match key.as_str() {
                "dims" => cfg.dims = parse_dims(value)?,
                "estimators" => {
                    cfg.estimators = if value.eq_ignore_ascii_case("all") {
                        EstimatorKind::ALL.to_vec()
                    } else {
                        parse_list(value, |s| s.parse())?
                    }
                }
                "covariances" => {
                    cfg.covariances = match value.to_ascii_lowercase().as_str() {
                        "default" => CovarianceModel::benchmark_set(),
                        "reduced" => DEFAULT_REDUCED_COVARIANCES.to_vec(),
                        _ => parse_list(value, |s| s.parse())?,
                    }
                }
                "regions" => {
                    cfg.regions = if value.eq_ignore_ascii_case("default") {
                        STANDARD_LABELS[..9].iter().map(|s| s.to_string()).collect()
                    } else {
                        value
                            .split(";;")
                            .flat_map(|chunk| {
                                // plain labels may also be comma separated
                                if chunk.contains(':') {
                                    vec![chunk.trim().to_string()]
                                } else {
                                    chunk.split(',').map(|s| s.trim().to_string()).collect()
                                }
                            })
                            .filter(|s| !s.is_empty())
                            .collect()
                    }
                }
                "samples" => cfg.samples = parse_number(&key, value)?,
                "macro" => cfg.macro_reps = parse_number(&key, value)?,
                "seed" => cfg.seed = parse_number(&key, value)?,
                "lattices" => cfg.lattices = parse_list(value, |s| s.parse::<LatticeChoice>())?,
                "baseline" => cfg.baseline = value.parse().map_err(|e: Error| e.to_string())?,
                "format" => cfg.format = value.parse().map_err(|e: Error| e.to_string())?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                k if k.starts_with("lattice.") => {
                    let d: usize = parse_number(k, &k["lattice.".len()..])?;
                    let list = parse_list(value, |s| s.parse::<LatticeChoice>())?;
                    cfg.lattice_overrides.insert(d, list);
                }
                other => return Err(format!("unknown key '{other}'")),
            }
            Ok(())
        })();
        res.map_err(|msg| Error::parse(lineno, msg))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl std::fmt::Display for GridConfig {
    /// The grid in the file format read by [`parse_config`].
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |items: Vec<String>, sep: &str| items.join(sep);
        writeln!(f, "dims = {}", join(self.dims.iter().map(|d| d.to_string()).collect(), ", "))?;
        writeln!(f, "estimators = {}", join(self.estimators.iter().map(|e| e.to_string()).collect(), ", "))?;
        writeln!(f, "covariances = {}", join(self.covariances.iter().map(|c| c.label()).collect(), ", "))?;
        writeln!(f, "regions = {}", self.regions.join(" ;; "))?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "macro = {}", self.macro_reps)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "lattices = {}", join(self.lattices.iter().map(|l| l.to_string()).collect(), ", "))?;
        for (d, list) in &self.lattice_overrides {
            writeln!(f, "lattice.{d} = {}", join(list.iter().map(|l| l.to_string()).collect(), ", "))?;
        }
        writeln!(f, "baseline = {}", self.baseline)?;
        writeln!(f, "format = {}", self.format)?;
        if let Some(out) = &self.out {
            writeln!(f, "out = {}", out.display())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{Baseline, OutputFormat};
    use crate::lattices::LatticeFamily;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = parse_config("# nothing\n\n").unwrap();
        assert_eq!(cfg, GridConfig::default());
        assert_eq!(cfg.cells().len(), 2835);
    }

    #[test]
    fn full_file() {
        let text = "dims = 2-4, 8\nestimators = crude, sph_star\ncovariances = identity, ar1:0.2\n\
                    regions = O1, R2\nsamples = 1_000\nmacro = 3\nseed = 7\n\
                    lattices = ad\nlattice.8 = e8, dd\nbaseline = empirical\nformat = md\nout = x.md\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.dims, vec![2, 3, 4, 8]);
        assert_eq!(cfg.estimators, vec![EstimatorKind::Crude, EstimatorKind::SphStar]);
        assert_eq!(cfg.covariances, vec![CovarianceModel::Identity, CovarianceModel::Ar1(0.2)]);
        assert_eq!(cfg.regions, vec!["O1", "R2"]);
        assert_eq!((cfg.samples, cfg.macro_reps, cfg.seed), (1000, 3, 7));
        assert_eq!(cfg.lattices, vec![LatticeChoice::Family(LatticeFamily::Ad)]);
        assert_eq!(cfg.lattices_for(8).len(), 2);
        assert_eq!(cfg.baseline, Baseline::Empirical);
        assert_eq!(cfg.format, OutputFormat::Markdown);
        assert_eq!(cfg.out, Some(PathBuf::from("x.md")));
        // 4 dims × 2 covariances × 2 regions × (1 crude + sets × 1)
        assert_eq!(cfg.cells().len(), 3 * 2 * 2 * 2 + 2 * 2 * 3);
        assert_eq!(parse_config(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn region_specs_are_kept_whole() {
        let cfg = parse_config("dims = 2\nregions = O1, S ;; box:0,1;0,1 ;; ell:0,0;1").unwrap();
        assert_eq!(cfg.regions, vec!["O1", "S", "box:0,1;0,1", "ell:0,0;1"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("dims = 2\nbogus = 1", 2),
            ("samples = lots", 1),
            ("\n\ndims = 5-3", 3),
            ("dims = 2\nestimators = sph, nope", 2),
            ("no equals sign", 1),
        ] {
            match parse_config(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("samples = 1"), Err(Error::Parameter(_))));
        assert!(parse_config("dims = 3\ncovariances = one-factor:-0.9").is_err());
    }
}
