//! Plain-text learner snapshots for resume and debugging.
//!
//! Format, versioned by the header line `club-state v1`:
//!
//! ```text
//! club-state v1
//! users <u> dim <d>
//! user <i> t <feedback count>
//! s <d(d+1)/2 lower-triangle entries, row-major>
//! b <d entries>
//! ...one user block per user...
//! edges <count>
//! <a> <b>
//! ...
//! ```
//!
//! Floats carry 17 significant digits so values round-trip bit-exactly; the
//! per-user estimate is recomputed from `S`, `b` on load. Only the linear
//! learner is snapshotable — the generalized-linear variant's raw sample
//! store is not part of the format.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::linalg::{ridge_estimate, SymMatrix, Vector};

use super::{ClubCascade, ClubConfig, RewardModel, UserGraph, UserStats};

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("snapshot is for {found} users / dim {found_dim}, learner config wants {want} / {want_dim}")]
    ConfigMismatch {
        found: usize,
        found_dim: usize,
        want: usize,
        want_dim: usize,
    },
    #[error("the generalized-linear learner's sample store is not snapshotable")]
    UnsupportedModel,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ClubCascade {
    /// Serialize the linear learner's state.
    pub fn write_snapshot(&self, out: &mut impl Write) -> Result<(), SnapshotError> {
        if !matches!(self.model, RewardModel::Linear) {
            return Err(SnapshotError::UnsupportedModel);
        }
        let d = self.cfg.d;
        writeln!(out, "club-state v1")?;
        writeln!(out, "users {} dim {}", self.stats.len(), d)?;
        for (i, stats) in self.stats.iter().enumerate() {
            writeln!(out, "user {} t {}", i, stats.feedback_count)?;
            let mut tri = Vec::with_capacity(d * (d + 1) / 2);
            for row in 0..d {
                for col in 0..=row {
                    tri.push(fmt_float(stats.gramian.get(row, col)));
                }
            }
            writeln!(out, "s {}", tri.join(" "))?;
            let b: Vec<String> = (0..d).map(|j| fmt_float(stats.moment[j])).collect();
            writeln!(out, "b {}", b.join(" "))?;
        }
        let edges = self.graph.edges();
        writeln!(out, "edges {}", edges.len())?;
        for (a, b) in edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }

    /// Rebuild a linear learner from a snapshot, recomputing each per-user
    /// estimate from the restored statistics.
    pub fn read_snapshot(cfg: ClubConfig, input: impl BufRead) -> Result<Self, SnapshotError> {
        let mut lines = input.lines().enumerate();
        let mut next_line = |expect: &str| -> Result<(usize, String), SnapshotError> {
            match lines.next() {
                Some((idx, Ok(line))) => Ok((idx + 1, line)),
                Some((idx, Err(e))) => Err(SnapshotError::Format {
                    line: idx + 1,
                    message: e.to_string(),
                }),
                None => Err(SnapshotError::Format {
                    line: 0,
                    message: format!("unexpected end of snapshot, wanted {expect}"),
                }),
            }
        };
        let bad = |line: usize, message: String| SnapshotError::Format { line, message };

        let (line_no, header) = next_line("header")?;
        if header.trim() != "club-state v1" {
            return Err(bad(line_no, format!("unknown header {header:?}")));
        }
        let (line_no, sizes) = next_line("users/dim line")?;
        let parts: Vec<&str> = sizes.split_whitespace().collect();
        let (users, dim) = match parts.as_slice() {
            ["users", u, "dim", d] => (
                u.parse::<usize>()
                    .map_err(|e| bad(line_no, e.to_string()))?,
                d.parse::<usize>()
                    .map_err(|e| bad(line_no, e.to_string()))?,
            ),
            _ => return Err(bad(line_no, format!("malformed size line {sizes:?}"))),
        };
        if dim != cfg.d || users == 0 {
            return Err(SnapshotError::ConfigMismatch {
                found: users,
                found_dim: dim,
                want: users,
                want_dim: cfg.d,
            });
        }

        let parse_floats = |line_no: usize, line: &str, tag: &str, count: usize| {
            let mut it = line.split_whitespace();
            if it.next() != Some(tag) {
                return Err(bad(line_no, format!("expected `{tag}` line, got {line:?}")));
            }
            let values: Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| bad(line_no, e.to_string()))?;
            if values.len() != count {
                return Err(bad(
                    line_no,
                    format!("`{tag}` line has {} entries, wanted {count}", values.len()),
                ));
            }
            Ok(values)
        };

        let mut stats = Vec::with_capacity(users);
        for expect_user in 0..users {
            let (line_no, head) = next_line("user line")?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            let feedback_count = match parts.as_slice() {
                ["user", idx, "t", t] => {
                    let idx: usize = idx.parse().map_err(|e: std::num::ParseIntError| {
                        bad(line_no, e.to_string())
                    })?;
                    if idx != expect_user {
                        return Err(bad(line_no, format!("user {idx}, wanted {expect_user}")));
                    }
                    t.parse::<u64>().map_err(|e| bad(line_no, e.to_string()))?
                }
                _ => return Err(bad(line_no, format!("malformed user line {head:?}"))),
            };
            let (line_no, s_line) = next_line("s line")?;
            let tri = parse_floats(line_no, &s_line, "s", dim * (dim + 1) / 2)?;
            let mut gramian = SymMatrix::zeros(dim);
            let mut at = 0;
            for row in 0..dim {
                for col in 0..=row {
                    gramian.set_sym(row, col, tri[at]);
                    at += 1;
                }
            }
            let (line_no, b_line) = next_line("b line")?;
            let b = parse_floats(line_no, &b_line, "b", dim)?;
            let moment = Vector::from_slice(&b);
            let theta_hat = ridge_estimate(&gramian, &moment, cfg.lambda)
                .map_err(|e| bad(line_no, format!("estimate recompute failed: {e}")))?;
            stats.push(UserStats {
                gramian,
                moment,
                feedback_count,
                theta_hat,
            });
        }

        let (line_no, edge_head) = next_line("edges line")?;
        let parts: Vec<&str> = edge_head.split_whitespace().collect();
        let edge_count = match parts.as_slice() {
            ["edges", n] => n
                .parse::<usize>()
                .map_err(|e| bad(line_no, e.to_string()))?,
            _ => return Err(bad(line_no, format!("malformed edges line {edge_head:?}"))),
        };
        let mut graph = UserGraph::empty(users);
        for _ in 0..edge_count {
            let (line_no, edge) = next_line("edge pair")?;
            let parts: Vec<&str> = edge.split_whitespace().collect();
            match parts.as_slice() {
                [a, b] => {
                    let a: usize = a.parse().map_err(|e: std::num::ParseIntError| {
                        bad(line_no, e.to_string())
                    })?;
                    let b: usize = b.parse().map_err(|e: std::num::ParseIntError| {
                        bad(line_no, e.to_string())
                    })?;
                    if a >= users || b >= users || !graph.add_edge(a, b) {
                        return Err(bad(line_no, format!("bad edge {a} {b}")));
                    }
                }
                _ => return Err(bad(line_no, format!("malformed edge pair {edge:?}"))),
            }
        }

        Ok(ClubCascade {
            cfg,
            model: RewardModel::Linear,
            samples: vec![Vec::new(); stats.len()],
            stats,
            graph,
        })
    }
}
