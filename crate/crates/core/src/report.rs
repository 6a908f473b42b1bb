//! Text renderings of reports and path matrices.
//!
//! The machine format is tab-separated with one record per randomization
//! point and a fixed column order; numbers use six significant digits so the
//! output is byte-stable across platforms.

use std::fmt::Write as _;

use crate::path::{MeanPathMatrix, PathMatrix};
use crate::significance::SignificanceReport;

/// Six significant digits, `%g` style: trailing zeros trimmed, scientific
/// notation below 1e-4 and from 1e6 up.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const MACHINE_COLUMNS: [&str; 10] = [
    "point",
    "original",
    "mean",
    "std",
    "p_value",
    "excluded",
    "degenerate",
    "label",
    "equivalent_to",
    "null_values",
];

/// Tab-separated report. Null values are included (comma-separated) only
/// when `with_null_values` is set; the column is then the last one.
pub fn machine_report(report: &SignificanceReport, with_null_values: bool) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# statistic={} semantics={} tail={} samples={} seed={} alpha={} attempts_multiplier={}",
        report.statistic,
        report.semantics,
        report.tail,
        report.samples,
        report.master_seed,
        format_g6(report.alpha),
        report.attempts_multiplier
    )
    .unwrap();
    let columns = if with_null_values {
        &MACHINE_COLUMNS[..]
    } else {
        &MACHINE_COLUMNS[..MACHINE_COLUMNS.len() - 1]
    };
    out.push_str(&columns.join("\t"));
    out.push('\n');
    for p in &report.points {
        let fields = [
            p.point.to_string(),
            format_g6(p.original),
            format_g6(p.null_mean),
            format_g6(p.null_std),
            format_g6(p.p_value),
            p.excluded.to_string(),
            p.degenerate.to_string(),
            p.label.clone(),
            p.equivalent_to.map_or_else(|| "-".to_string(), |e| e.to_string()),
        ];
        out.push_str(&fields.join("\t"));
        if with_null_values {
            out.push('\t');
            let values: Vec<String> = p.null_values.iter().map(|&v| format_g6(v)).collect();
            out.push_str(&values.join(","));
        }
        out.push('\n');
    }
    out
}

/// Aligned table for reading; `*` marks p-values at or below alpha.
pub fn human_report(report: &SignificanceReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "statistic {} ({}), {} tail, {} samples, seed {}, alpha {}",
        report.statistic,
        report.semantics,
        report.tail,
        report.samples,
        report.master_seed,
        format_g6(report.alpha)
    )
    .unwrap();
    let header = ["randomization", "original", "null mean", "null std", "p-value", "excluded", "note"];
    let mut rows: Vec<[String; 7]> = vec![header.map(String::from)];
    for p in &report.points {
        let mut note = Vec::new();
        if p.degenerate {
            note.push("degenerate null".to_string());
        }
        if let Some(e) = p.equivalent_to {
            note.push(format!("same null as {e}"));
        }
        let mark = if p.is_significant(report.alpha) { " *" } else { "" };
        rows.push([
            p.label.clone(),
            format_g6(p.original),
            format_g6(p.null_mean),
            format_g6(p.null_std),
            format!("{}{mark}", format_g6(p.p_value)),
            p.excluded.to_string(),
            note.join("; "),
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn matrix_text(
    title: &str,
    row_name: &str,
    cols: &[String],
    rows: &[String],
    cell: impl Fn(usize, usize) -> String,
) -> String {
    let mut out = format!("# {title}\n{row_name}");
    for c in cols {
        out.push('\t');
        out.push_str(c);
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        out.push_str(r);
        for k in 0..cols.len() {
            out.push('\t');
            out.push_str(&cell(i, k));
        }
        out.push('\n');
    }
    out
}

/// Tab-separated path counts with a title line and label headers.
pub fn path_matrix_text(title: &str, p: &PathMatrix) -> String {
    matrix_text(title, p.row_domain().name(), p.col_domain().labels(), p.row_domain().labels(), |i, k| {
        p.get(i, k).to_string()
    })
}

/// As [`path_matrix_text`] for real-valued matrices.
pub fn mean_matrix_text(title: &str, m: &MeanPathMatrix) -> String {
    matrix_text(title, m.row_domain().name(), m.col_domain().labels(), m.row_domain().labels(), |i, k| {
        format_g6(m.get(i, k))
    })
}
