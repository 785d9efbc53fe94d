//! CSV and markdown output of bench rows.
//!
//! Reals are written with 17 significant digits, so parsing the CSV gives
//! back the same values bit for bit. Wall time is not written, which keeps
//! output identical across runs.

use std::fmt;
use std::str::FromStr;

use super::BenchRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "md",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            _ => Err(Error::param(format!("unknown format '{s}'"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 19] = [
    "dim",
    "covariance",
    "region",
    "estimator",
    "lattice",
    "card_v",
    "samples",
    "macro",
    "estimate",
    "variance",
    "vr",
    "vr_se",
    "pvr",
    "pvr_se",
    "cost",
    "zero_variance",
    "antisymmetric",
    "undefined",
    "error",
];

/// Real with 17 significant digits.
pub(crate) fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn record(r: &BenchRow) -> Vec<String> {
    vec![
        r.dim.to_string(),
        r.covariance.clone(),
        r.region.clone(),
        r.estimator.clone(),
        r.lattice.clone().unwrap_or_default(),
        opt(r.card_v, |v| v.to_string()),
        r.samples.to_string(),
        r.macro_reps.to_string(),
        real(r.estimate),
        real(r.variance),
        opt(r.vr, real),
        opt(r.vr_se, real),
        opt(r.pvr, real),
        opt(r.pvr_se, real),
        r.cost.to_string(),
        r.zero_variance.to_string(),
        opt(r.antisymmetric, |b| b.to_string()),
        r.undefined.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

fn short(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x != 0.0 && (x.abs() >= 1e7 || x.abs() < 1e-3) {
        format!("{x:.4e}")
    } else {
        format!("{x:.4}")
    }
}

fn markdown(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "| d | covariance | region | estimator | V | \\|V\\| | estimate | variance | VR | PVR | cost | flags |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let mut flags = Vec::new();
        if r.zero_variance {
            flags.push("zero-variance".to_string());
        }
        if r.undefined > 0 {
            flags.push(format!("undefined×{}", r.undefined));
        }
        if let Some(e) = &r.error {
            flags.push(format!("error: {e}"));
        }
        let ratio = |v: Option<f64>, se: Option<f64>| match (v, se) {
            (Some(v), Some(se)) if se > 0.0 => format!("{} ± {}", short(v), short(se)),
            (Some(v), _) => short(v),
            _ => "".into(),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.dim,
            r.covariance,
            r.region.replace('|', "\\|"),
            r.estimator,
            r.lattice.as_deref().unwrap_or(""),
            opt(r.card_v, |v| v.to_string()),
            short(r.estimate),
            short(r.variance),
            ratio(r.vr, r.vr_se),
            ratio(r.pvr, r.pvr_se),
            r.cost,
            flags.join("; ").replace('|', "\\|"),
        ));
    }
    out
}

/// Rows as CSV (header line always present) or as a markdown table.
pub fn emit(rows: &[BenchRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => markdown(rows),
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).expect("writing to memory");
            for r in rows {
                w.write_record(record(r)).expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV of UTF-8 fields")
        }
    }
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let s = rec.get(i).unwrap_or("");
    s.parse()
        .map_err(|_| Error::parse(line, format!("bad {} value '{s}'", CSV_COLUMNS[i])))
}

fn opt_field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<Option<T>> {
    if rec.get(i).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        field(rec, i, line).map(Some)
    }
}

fn opt_text(rec: &csv::StringRecord, i: usize) -> Option<String> {
    Some(rec.get(i).unwrap_or("")).filter(|s| !s.is_empty()).map(str::to_string)
}

/// Rows from CSV written by [`emit`]; wall time reads back as zero.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::parse(1, "unexpected CSV header"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        rows.push(BenchRow {
            dim: field(&rec, 0, line)?,
            covariance: rec[1].to_string(),
            region: rec[2].to_string(),
            estimator: rec[3].to_string(),
            lattice: opt_text(&rec, 4),
            card_v: opt_field(&rec, 5, line)?,
            samples: field(&rec, 6, line)?,
            macro_reps: field(&rec, 7, line)?,
            estimate: field(&rec, 8, line)?,
            variance: field(&rec, 9, line)?,
            vr: opt_field(&rec, 10, line)?,
            vr_se: opt_field(&rec, 11, line)?,
            pvr: opt_field(&rec, 12, line)?,
            pvr_se: opt_field(&rec, 13, line)?,
            cost: field(&rec, 14, line)?,
            zero_variance: field(&rec, 15, line)?,
            antisymmetric: opt_field(&rec, 16, line)?,
            undefined: field(&rec, 17, line)?,
            wall_seconds: 0.0,
            error: opt_text(&rec, 18),
        });
    }
    Ok(rows)
}
