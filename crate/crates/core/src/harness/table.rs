//! Result rows, CSV round-tripping and per-cell quartiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ica::ContrastFunction;
use crate::orthogonalize::OrthMethod;

pub const CSV_HEADER: &str =
    "N,trial,method,contrast,damping,frob,amari,sigma_min,cond,R,accept_rate,runtime_ms";

/// One pipeline run. `None` fields are written as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n_samples: usize,
    pub trial: usize,
    pub method: OrthMethod,
    pub contrast: ContrastFunction,
    pub damping: bool,
    pub frob: Option<f64>,
    pub amari: Option<f64>,
    pub sigma_min: Option<f64>,
    pub cond: Option<f64>,
    pub radius: Option<f64>,
    pub accept_rate: Option<f64>,
    pub runtime_ms: Option<f64>,
}

impl ResultRow {
    /// FastICA produced no usable estimate.
    pub fn failed(&self) -> bool {
        self.frob.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Frobenius-error quartiles for one (method, contrast, damping, N).
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: OrthMethod,
    pub contrast: ContrastFunction,
    pub damping: bool,
    pub n_samples: usize,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
    pub runs: usize,
    pub failures: usize,
}

fn field(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "NA".to_string(),
    }
}

/// Linear interpolation between order statistics: position `(n − 1) p` of
/// the sorted values. `None` for an empty slice.
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    match sorted.len() {
        0 => None,
        1 => Some(sorted[0]),
        n => {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
        }
    }
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        ResultTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stable sort by (N, trial); rows of one trial keep pipeline order.
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| (r.n_samples, r.trial));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n_samples,
                r.trial,
                r.method,
                r.contrast,
                if r.damping { "on" } else { "off" },
                field(r.frob),
                field(r.amari),
                field(r.sigma_min),
                field(r.cond),
                field(r.radius),
                field(r.accept_rate),
                field(r.runtime_ms),
            );
        }
        out
    }

    /// Quartiles of the Frobenius error per (method, contrast, damping, N),
    /// ignoring failed runs.
    pub fn summarize(&self) -> Vec<CellSummary> {
        type Key = (OrthMethod, ContrastFunction, bool, usize);
        let mut cells: BTreeMap<Key, (Vec<f64>, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = cells
                .entry((r.method, r.contrast, r.damping, r.n_samples))
                .or_default();
            e.1 += 1;
            if let Some(f) = r.frob {
                e.0.push(f);
            }
        }
        cells
            .into_iter()
            .map(|((method, contrast, damping, n_samples), (mut v, runs))| {
                v.sort_by(f64::total_cmp);
                CellSummary {
                    method,
                    contrast,
                    damping,
                    n_samples,
                    median: quantile(&v, 0.5),
                    q25: quantile(&v, 0.25),
                    q75: quantile(&v, 0.75),
                    runs,
                    failures: runs - v.len(),
                }
            })
            .collect()
    }
}

fn parse_opt(tok: &str, line: usize) -> Result<Option<f64>> {
    if tok == "NA" {
        return Ok(None);
    }
    tok.parse().map(Some).map_err(|e| Error::Parse {
        line,
        message: format!("`{tok}`: {e}"),
    })
}

/// Inverse of [`ResultTable::to_csv`].
pub fn parse_csv(text: &str) -> Result<ResultTable> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing or wrong CSV header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 12 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 12 fields, found {}", f.len()),
            });
        }
        let bad = |m: String| Error::Parse {
            line: line_no,
            message: m,
        };
        rows.push(ResultRow {
            n_samples: f[0].parse().map_err(|e| bad(format!("N: {e}")))?,
            trial: f[1].parse().map_err(|e| bad(format!("trial: {e}")))?,
            method: f[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            contrast: f[3].parse().map_err(|e: Error| bad(e.to_string()))?,
            damping: match f[4] {
                "on" => true,
                "off" => false,
                other => return Err(bad(format!("damping `{other}`"))),
            },
            frob: parse_opt(f[5], line_no)?,
            amari: parse_opt(f[6], line_no)?,
            sigma_min: parse_opt(f[7], line_no)?,
            cond: parse_opt(f[8], line_no)?,
            radius: parse_opt(f[9], line_no)?,
            accept_rate: parse_opt(f[10], line_no)?,
            runtime_ms: parse_opt(f[11], line_no)?,
        });
    }
    Ok(ResultTable { rows })
}
