//! Text format for point sets: a `d m` header line followed by `m` lines of
//! `d` whitespace-separated coordinates.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{PointSet, UNIT_TOL};
use crate::error::{Error, Result};
use crate::linalg;

/// Vectors whose norm is within this distance of 1 are accepted on load and
/// rescaled when they miss unit length by more than [`UNIT_TOL`].
pub const LOAD_NORM_TOL: f64 = 1e-9;

/// Write `ps` with 17 significant digits per coordinate.
pub fn write_pointset<W: Write>(ps: &PointSet, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{} {}", ps.dim(), ps.len())?;
    for v in ps.iter() {
        let mut first = true;
        for x in v {
            if !first {
                w.write_all(b" ")?;
            }
            first = false;
            write!(w, "{x:.16e}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_pointset(ps: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    write_pointset(ps, fs::File::create(path)?)
}

pub fn load_pointset(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".to_string());
    parse_pointset(&text, name)
}

/// Parse the text format. Blank lines are ignored; line numbers in errors
/// are 1-based positions in `text`.
pub fn parse_pointset(text: &str, name: impl Into<String>) -> Result<PointSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::parse(hline, "header must be 'd m'"));
    }
    let parse_count = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(hline, format!("invalid {what} '{s}'")))
    };
    let d = parse_count(fields[0], "dimension")?;
    let m = parse_count(fields[1], "count")?;
    if d == 0 || m == 0 {
        return Err(Error::parse(hline, "dimension and count must be positive"));
    }

    let mut coords = Vec::with_capacity(d * m);
    let mut rows = 0;
    for (lineno, line) in lines {
        if rows == m {
            return Err(Error::parse(lineno, format!("more than {m} rows")));
        }
        let start = coords.len();
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid number '{tok}'")))?;
            if !x.is_finite() {
                return Err(Error::parse(lineno, "non-finite coordinate"));
            }
            coords.push(x);
        }
        let got = coords.len() - start;
        if got != d {
            return Err(Error::parse(lineno, format!("expected {d} entries, found {got}")));
        }
        let v = &mut coords[start..];
        let n = linalg::norm(v);
        if (n - 1.0).abs() > LOAD_NORM_TOL {
            return Err(Error::parse(lineno, format!("vector norm {n} is not 1")));
        }
        if (n - 1.0).abs() > UNIT_TOL {
            v.iter_mut().for_each(|x| *x /= n);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("expected {m} rows, found {rows}"),
        ));
    }
    PointSet::new(name, d, coords)
}
