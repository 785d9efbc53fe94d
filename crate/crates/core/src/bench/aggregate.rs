//! Averages of variance ratios over groups of bench rows.

use std::collections::BTreeMap;

use super::emit::real;
use super::{BenchRow, OutputFormat};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;

/// Regions averaged together in the antisymmetric-set table.
pub const ANTISYMMETRIC_LABELS: [&str; 4] = ["R2", "O1", "O3", "E2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Per dimension and region type (E, O, R, S; other regions by name).
    RegionType,
    /// Per dimension over R2, O1, O3 and E2.
    Antisymmetric,
    /// Per dimension and region.
    Region,
    /// Per dimension over all regions.
    Dim,
    /// Per estimator over everything.
    Estimator,
}

/// Mean ratios of one group, per estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dim: Option<usize>,
    pub group: String,
    pub estimator: String,
    /// Rows averaged.
    pub n: usize,
    /// Rows left out: failed cells, undefined ratios, zero-variance cells.
    pub excluded: usize,
    pub zero_variance: usize,
    pub vr: Option<f64>,
    /// Standard error of the mean from the rows' macro-replication errors.
    pub vr_se: Option<f64>,
    pub pvr: Option<f64>,
    pub pvr_se: Option<f64>,
    /// Some averaged region fails the exact antisymmetry check although the
    /// grouping treats it as antisymmetric.
    pub flagged: bool,
}

/// Grouping key of a region label.
fn region_type(label: &str) -> String {
    let up = label.to_ascii_uppercase();
    let standard = matches!(up.as_str(), "E1" | "E2" | "E3" | "O1" | "O2" | "O3" | "R1" | "R2" | "R3");
    if standard {
        up[..1].to_string()
    } else {
        up
    }
}

fn estimator_order(name: &str) -> usize {
    name.parse::<EstimatorKind>()
        .map(|k| k as usize)
        .unwrap_or(EstimatorKind::ALL.len())
}

/// Average the rows' VR and PVR within groups. Groups whose rows are all
/// excluded are omitted and named in the returned warnings.
pub fn aggregate(rows: &[BenchRow], grouping: Grouping) -> Result<(Vec<AggregateRow>, Vec<String>)> {
    if rows.is_empty() {
        return Err(Error::param("no rows to aggregate"));
    }
    type Key = (Option<usize>, String, usize, String);
    let mut groups: BTreeMap<Key, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        let (dim, group) = match grouping {
            Grouping::RegionType => (Some(r.dim), region_type(&r.region)),
            Grouping::Antisymmetric => {
                if !ANTISYMMETRIC_LABELS.iter().any(|l| l.eq_ignore_ascii_case(&r.region)) {
                    continue;
                }
                (Some(r.dim), "antisymmetric".to_string())
            }
            Grouping::Region => (Some(r.dim), r.region.clone()),
            Grouping::Dim => (Some(r.dim), "all".to_string()),
            Grouping::Estimator => (None, "all".to_string()),
        };
        groups
            .entry((dim, group, estimator_order(&r.estimator), r.estimator.clone()))
            .or_default()
            .push(r);
    }
    let mut warnings = Vec::new();
    if groups.is_empty() {
        warnings.push(format!("no rows match grouping {grouping:?}"));
    }
    let mut out = Vec::new();
    for ((dim, group, _, estimator), members) in groups {
        let usable: Vec<&&BenchRow> = members
            .iter()
            .filter(|r| r.error.is_none() && r.vr.is_some_and(f64::is_finite))
            .collect();
        let zero_variance = members.iter().filter(|r| r.zero_variance).count();
        if usable.is_empty() {
            warnings.push(format!(
                "group d={} {group} {estimator}: no usable rows",
                dim.map(|d| d.to_string()).unwrap_or_else(|| "*".into())
            ));
            continue;
        }
        let n = usable.len() as f64;
        let mean = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = usable.iter().filter_map(|r| f(r)).collect();
            (vals.len() == usable.len()).then(|| vals.iter().sum::<f64>() / n)
        };
        let pooled_se = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = usable.iter().filter_map(|r| f(r)).collect();
            (vals.len() == usable.len()).then(|| vals.iter().map(|s| s * s).sum::<f64>().sqrt() / n)
        };
        out.push(AggregateRow {
            dim,
            group,
            estimator,
            n: usable.len(),
            excluded: members.len() - usable.len(),
            zero_variance,
            vr: mean(&|r| r.vr),
            vr_se: pooled_se(&|r| r.vr_se),
            pvr: mean(&|r| r.pvr.filter(|v| v.is_finite())),
            pvr_se: pooled_se(&|r| r.pvr_se),
            flagged: grouping == Grouping::Antisymmetric
                && usable.iter().any(|r| r.antisymmetric == Some(false)),
        });
    }
    Ok((out, warnings))
}

fn csv_text(rows: &[AggregateRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header = [
        "dim", "group", "estimator", "n", "excluded", "zero_variance", "vr", "vr_se", "pvr", "pvr_se", "flagged",
    ];
    w.write_record(header).expect("writing to memory");
    let opt = |x: Option<f64>| x.map(real).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.dim.map(|d| d.to_string()).unwrap_or_default(),
            r.group.clone(),
            r.estimator.clone(),
            r.n.to_string(),
            r.excluded.to_string(),
            r.zero_variance.to_string(),
            opt(r.vr),
            opt(r.vr_se),
            opt(r.pvr),
            opt(r.pvr_se),
            r.flagged.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV of UTF-8 fields")
}

/// Wide layout: one line per (dimension, group), VR columns for every
/// non-crude estimator, then PVR columns for those that report one.
fn markdown(rows: &[AggregateRow]) -> String {
    let mut ests: Vec<&str> = rows
        .iter()
        .map(|r| r.estimator.as_str())
        .filter(|e| *e != "crude")
        .collect();
    ests.sort_by_key(|e| (estimator_order(e), e.to_string()));
    ests.dedup();
    let pvr_ests: Vec<&str> = ests
        .iter()
        .copied()
        .filter(|e| rows.iter().any(|r| r.estimator == *e && r.pvr.is_some()))
        .collect();
    let mut out = String::from("| d | group |");
    for e in &ests {
        out.push_str(&format!(" VR {e} |"));
    }
    for e in &pvr_ests {
        out.push_str(&format!(" PVR {e} |"));
    }
    out.push('\n');
    out.push_str(&"|---".repeat(2 + ests.len() + pvr_ests.len()));
    out.push_str("|\n");
    let mut lines: Vec<(Option<usize>, &str)> = rows.iter().map(|r| (r.dim, r.group.as_str())).collect();
    lines.dedup();
    let cell = |dim: Option<usize>, group: &str, est: &str, pick: fn(&AggregateRow) -> Option<f64>| {
        rows.iter()
            .find(|r| r.dim == dim && r.group == group && r.estimator == est)
            .and_then(pick)
            .map(|v| format!("{v:.2}"))
            .unwrap_or_default()
    };
    for (dim, group) in lines {
        let flag = rows
            .iter()
            .any(|r| r.dim == dim && r.group == group && r.flagged);
        out.push_str(&format!(
            "| {} | {}{} |",
            dim.map(|d| d.to_string()).unwrap_or_else(|| "all".into()),
            group,
            if flag { " (flagged)" } else { "" }
        ));
        for e in &ests {
            out.push_str(&format!(" {} |", cell(dim, group, e, |r| r.vr)));
        }
        for e in &pvr_ests {
            out.push_str(&format!(" {} |", cell(dim, group, e, |r| r.pvr)));
        }
        out.push('\n');
    }
    out
}

pub fn emit_aggregate(rows: &[AggregateRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv_text(rows),
        OutputFormat::Markdown => markdown(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dim: usize, region: &str, est: &str, vr: Option<f64>) -> BenchRow {
        BenchRow {
            dim,
            covariance: "identity".into(),
            region: region.into(),
            estimator: est.into(),
            lattice: None,
            card_v: None,
            samples: 10,
            macro_reps: 1,
            estimate: 0.5,
            variance: 0.1,
            vr,
            vr_se: Some(0.5),
            pvr: vr.map(|v| v / 2.0),
            pvr_se: Some(0.25),
            cost: 2,
            zero_variance: vr == Some(f64::INFINITY),
            antisymmetric: Some(region != "E2"),
            undefined: 0,
            wall_seconds: 0.0,
            error: None,
        }
    }

    #[test]
    fn identical_rows_average_to_themselves() {
        let rows = vec![row(2, "O1", "sph", Some(7.0)); 4];
        let (agg, warn) = aggregate(&rows, Grouping::RegionType).unwrap();
        assert!(warn.is_empty());
        assert_eq!(agg.len(), 1);
        assert_eq!((agg[0].vr, agg[0].pvr, agg[0].n), (Some(7.0), Some(3.5), 4));
        assert_eq!(agg[0].vr_se, Some(0.25));
        assert_eq!(agg[0].group, "O");
    }

    #[test]
    fn groupings() {
        let rows = vec![
            row(2, "O1", "sph", Some(2.0)),
            row(2, "O2", "sph", Some(4.0)),
            row(2, "E2", "sph", Some(6.0)),
            row(2, "R1", "sph", Some(8.0)),
            row(3, "S", "sph-at", Some(1.0)),
            row(2, "O3", "sph", Some(f64::INFINITY)),
            row(2, "R2", "sph", None),
        ];
        let (t, _) = aggregate(&rows, Grouping::RegionType).unwrap();
        let o = t.iter().find(|r| r.group == "O").unwrap();
        assert_eq!((o.vr, o.excluded, o.zero_variance), (Some(3.0), 1, 1));
        assert!(t.iter().any(|r| r.group == "S" && r.dim == Some(3)));

        let (a, _) = aggregate(&rows, Grouping::Antisymmetric).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!((a[0].vr, a[0].n, a[0].excluded), (Some(4.0), 2, 2));
        assert!(a[0].flagged);

        let (d, _) = aggregate(&rows, Grouping::Dim).unwrap();
        assert_eq!(d.len(), 2);
        let (e, _) = aggregate(&rows, Grouping::Estimator).unwrap();
        assert_eq!(e.iter().map(|r| r.estimator.as_str()).collect::<Vec<_>>(), ["sph", "sph-at"]);
        let (r, _) = aggregate(&rows, Grouping::Region).unwrap();
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn empty_groups_are_reported() {
        assert!(aggregate(&[], Grouping::Dim).is_err());
        let (agg, warn) = aggregate(&[row(2, "O2", "sph", None)], Grouping::Dim).unwrap();
        assert!(agg.is_empty());
        assert_eq!(warn.len(), 1);
        let (agg, warn) = aggregate(&[row(2, "O2", "sph", Some(1.0))], Grouping::Antisymmetric).unwrap();
        assert!(agg.is_empty() && warn.len() == 1);
    }

    #[test]
    fn markdown_layout() {
        let rows = vec![
            row(2, "O1", "crude-at", Some(2.0)),
            row(2, "O1", "sph", Some(9.0)),
            row(2, "E1", "sph", Some(5.0)),
        ];
        let (agg, _) = aggregate(&rows, Grouping::RegionType).unwrap();
        let md = emit_aggregate(&agg, OutputFormat::Markdown);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| d | group | VR crude-at | VR sph | PVR crude-at | PVR sph |");
        assert_eq!(lines[2], "| 2 | E |  | 5.00 |  | 2.50 |");
        assert_eq!(lines[3], "| 2 | O | 2.00 | 9.00 | 1.00 | 4.50 |");
        let csv = emit_aggregate(&agg, OutputFormat::Csv);
        assert_eq!(csv.lines().count(), 4);
    }
}
