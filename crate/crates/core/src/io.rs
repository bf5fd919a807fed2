//! Plain-text sample and matrix files.
//!
//! Both formats are whitespace-delimited rows of decimal floats printed at
//! full round-trip precision, with an optional first line of
//! `# key=value` pairs:
//!
//! ```text
//! # n=2 N=3 seed=7
//! 0.25 -1.5
//! 3 0.125
//! -2 4
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sampling::SampleMatrix;

/// Ordered `key=value` pairs from a header line.
pub type Header = Vec<(String, String)>;

/// Looks up `key` in a header.
pub fn header_value<'a>(header: &'a Header, key: &str) -> Option<&'a str> {
    header
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn write_header<W: Write>(w: &mut W, header: &[(&str, String)]) -> Result<()> {
    if header.is_empty() {
        return Ok(());
    }
    write!(w, "#")?;
    for (k, v) in header {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)?;
    Ok(())
}

fn write_row<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            write!(w, " ")?;
        }
        first = false;
        write!(w, "{v}")?;
    }
    writeln!(w)?;
    Ok(())
}

fn parse_header(line: &str) -> Header {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Reads the header (if any) and all numeric rows.
fn read_table<R: Read>(reader: R) -> Result<(Header, Vec<Vec<f64>>)> {
    let mut header = Header::new();
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if rows.is_empty() && header.is_empty() {
                header = parse_header(trimmed);
            }
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("`{tok}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Writes samples with a `# n=… N=… seed=…` header (seed omitted when
/// unknown).
pub fn write_samples<W: Write>(w: W, samples: &SampleMatrix, seed: Option<u64>) -> Result<()> {
    let mut w = BufWriter::new(w);
    let mut header = vec![
        ("n", samples.dim().to_string()),
        ("N", samples.len().to_string()),
    ];
    if let Some(s) = seed {
        header.push(("seed", s.to_string()));
    }
    write_header(&mut w, &header)?;
    for row in samples.rows() {
        write_row(&mut w, row.iter().copied())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(reader: R) -> Result<(SampleMatrix, Header)> {
    let (header, rows) = read_table(reader)?;
    if rows.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let samples = SampleMatrix::from_rows(&rows)?;
    if let Some(n) = header_value(&header, "n") {
        if n.parse::<usize>().ok() != Some(samples.dim()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("header says n={n} but rows have {} values", samples.dim()),
            });
        }
    }
    Ok((samples, header))
}

pub fn save_samples(path: &Path, samples: &SampleMatrix, seed: Option<u64>) -> Result<()> {
    write_samples(File::create(path)?, samples, seed)
}

pub fn load_samples(path: &Path) -> Result<(SampleMatrix, Header)> {
    read_samples(File::open(path)?)
}

/// Writes a matrix row by row under a header built from `header`.
pub fn write_matrix<W: Write>(w: W, m: &DMatrix<f64>, header: &[(&str, String)]) -> Result<()> {
    let mut w = BufWriter::new(w);
    write_header(&mut w, header)?;
    for row in m.row_iter() {
        write_row(&mut w, row.iter().copied())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(reader: R) -> Result<(DMatrix<f64>, Header)> {
    let (header, rows) = read_table(reader)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no matrix rows".into(),
        });
    }
    let cols = rows[0].len();
    let m = DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten());
    Ok((m, header))
}

pub fn save_matrix(path: &Path, m: &DMatrix<f64>, header: &[(&str, String)]) -> Result<()> {
    write_matrix(File::create(path)?, m, header)
}

pub fn load_matrix(path: &Path) -> Result<(DMatrix<f64>, Header)> {
    read_matrix(File::open(path)?)
}
