//! Metric output: `t,algorithm,seed,metric` CSV, seed-mean aggregation, and
//! the bounds-check verdict table.

use std::io::{BufRead, Write};

use club_cascade::bounds::empirical::CheckReport;
use thiserror::Error;

use crate::config::AlgorithmKind;
use crate::runner::RunRecord;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("records line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub const RECORDS_HEADER: &str = "t,algorithm,seed,metric";

/// `f64` text that round-trips exactly (Rust's shortest representation).
fn fmt_metric(v: f64) -> String {
    format!("{v}")
}

pub fn write_records(out: &mut impl Write, records: &[RunRecord]) -> Result<(), ReportError> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.t, r.algorithm, r.seed, fmt_metric(r.metric))?;
    }
    Ok(())
}

pub fn read_records(input: impl BufRead) -> Result<Vec<RunRecord>, ReportError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (idx == 0 && trimmed == RECORDS_HEADER) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(ReportError::Parse {
                line: line_no,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse = |what: &str, raw: &str| -> Result<f64, ReportError> {
            raw.parse().map_err(|e| ReportError::Parse {
                line: line_no,
                message: format!("bad {what} {raw:?}: {e}"),
            })
        };
        records.push(RunRecord {
            t: parse("round", fields[0])? as u64,
            algorithm: fields[1].parse().map_err(|e| ReportError::Parse {
                line: line_no,
                message: e,
            })?,
            seed: parse("seed", fields[2])? as u64,
            metric: parse("metric", fields[3])?,
        });
    }
    Ok(records)
}

/// Mean metric over seeds per (algorithm, round), sorted by algorithm then
/// round.
pub fn aggregate(records: &[RunRecord]) -> Vec<(AlgorithmKind, u64, f64)> {
    let mut groups: std::collections::BTreeMap<(AlgorithmKind, u64), (f64, usize)> =
        Default::default();
    for r in records {
        let entry = groups.entry((r.algorithm, r.t)).or_insert((0.0, 0));
        entry.0 += r.metric;
        entry.1 += 1;
    }
    groups
        .into_iter()
        .map(|((algorithm, t), (sum, n))| (algorithm, t, sum / n as f64))
        .collect()
}

pub fn write_aggregate(
    out: &mut impl Write,
    rows: &[(AlgorithmKind, u64, f64)],
) -> Result<(), ReportError> {
    writeln!(out, "t,algorithm,mean_metric")?;
    for (algorithm, t, mean) in rows {
        writeln!(out, "{t},{algorithm},{}", fmt_metric(*mean))?;
    }
    Ok(())
}

/// Human-readable verdict table, one row per suite plus a footer line.
pub fn render_bounds_table(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>6} {:>11} {:>8}  {:>12}  {:>12}  verdict\n",
        "check", "trials", "violations", "allowed", "empirical", "bound"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<24} {:>6} {:>11} {:>8}  {:>12.5e}  {:>12.5e}  {}\n",
            r.name,
            r.trials,
            r.violations,
            r.allowed,
            r.tightest_empirical,
            r.tightest_bound,
            if r.passed() { "pass" } else { "FAIL" }
        ));
    }
    let overall = reports.iter().all(|r| r.passed());
    out.push_str(&format!(
        "overall: {}\n",
        if overall { "pass" } else { "FAIL" }
    ));
    out
}
