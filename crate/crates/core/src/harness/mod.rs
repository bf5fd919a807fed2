//! Sample-size sweeps over several pipelines, with CSV and plot-data output.
//!
//! For each sample size and trial, one instance and one data set are drawn
//! and every configured pipeline runs on that same data. Each trial has its
//! own seed derived from the master seed, so the table does not depend on
//! how trials are scheduled across threads.

mod config;
mod table;

pub use config::{parse_list, ConfigBuilder, DampingChoice, ExperimentConfig, MixingSpec};
pub use table::{parse_csv, quantile, CellSummary, ResultRow, ResultTable, CSV_HEADER};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval;
use crate::ica::{fit_orthogonalizer, run_pipeline, PipelineConfig};
use crate::orthogonalize::{OrthMethod, Orthogonalizer};
use crate::sampling::{derive_seed, IcaInstance};

/// Seed of trial `trial` at grid position `grid_idx`.
pub fn trial_seed(master: u64, grid_idx: usize, trial: usize) -> u64 {
    derive_seed(master, &[grid_idx as u64, trial as u64])
}

fn pipeline_rng(trial_seed: u64, pipeline: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, &[u64::MAX, pipeline as u64]))
}

fn instance(config: &ExperimentConfig, seed: u64) -> Result<IcaInstance> {
    let eta = config.eta.clone();
    let inst = match (&config.mixing, config.mixing.kind()) {
        (MixingSpec::Fixed(m), _) => IcaInstance::new(m.clone(), eta, seed)?,
        (_, Some(kind)) => IcaInstance::random(eta, kind, seed)?,
        (_, None) => unreachable!("non-fixed mixing always has a kind"),
    };
    inst.with_normalized_first_moment(config.normalize)
}

fn failed_row(n_samples: usize, trial: usize, p: &PipelineConfig) -> ResultRow {
    ResultRow {
        n_samples,
        trial,
        method: p.orthogonalizer,
        contrast: p.contrast,
        damping: p.damping.is_some(),
        frob: None,
        amari: None,
        sigma_min: None,
        cond: None,
        radius: None,
        accept_rate: None,
        runtime_ms: None,
    }
}

/// All rows for one (N, trial) cell. Failures become `NA` fields.
fn run_trial(config: &ExperimentConfig, grid_idx: usize, trial: usize) -> Vec<ResultRow> {
    let n_samples = config.n_grid[grid_idx];
    let seed = trial_seed(config.seed, grid_idx, trial);
    let data = instance(config, seed).and_then(|inst| {
        let x = inst.generate(n_samples)?;
        Ok((inst, x))
    });
    let Ok((inst, x)) = data else {
        return config
            .pipelines
            .iter()
            .map(|p| failed_row(n_samples, trial, p))
            .collect();
    };
    let truth = inst.mixing();

    // one orthogonalizer per distinct (method, body), shared by pipelines
    let mut cache: BTreeMap<(OrthMethod, String), (Option<Orthogonalizer>, f64)> = BTreeMap::new();
    let mut rows = Vec::with_capacity(config.pipelines.len());
    for (idx, p) in config.pipelines.iter().enumerate() {
        let key = (p.orthogonalizer, format!("{:?}/{:?}", p.body, p.fit_rows));
        let (b, orth_ms) = cache.entry(key).or_insert_with(|| {
            let t = Instant::now();
            let b = fit_orthogonalizer(&x, p, Some(truth)).ok();
            (b, t.elapsed().as_secs_f64() * 1e3)
        });
        let mut row = failed_row(n_samples, trial, p);
        let Some(b) = b.as_ref() else {
            rows.push(row);
            continue;
        };
        let diag = b.diagnostics(truth);
        row.sigma_min = Some(diag.sigma_min_normalized);
        row.cond = Some(diag.condition_number).filter(|c| c.is_finite());

        let start = Instant::now();
        let mut rng = pipeline_rng(seed, idx);
        if let Ok(out) = run_pipeline(&x, b, p, &mut rng) {
            if let Some(d) = out.damping {
                row.radius = Some(d.radius);
                row.accept_rate = Some(d.acceptance_rate);
            }
            if out.estimate.all_converged() {
                if let Ok(r) = eval::evaluate(truth, &out.estimate.a_hat) {
                    row.frob = Some(r.frobenius_error);
                    row.amari = Some(r.amari_index);
                }
            }
        }
        if config.timing {
            row.runtime_ms = Some(*orth_ms + start.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(row);
    }
    rows
}

/// Runs every pipeline on every (N, trial) and returns the sorted table.
/// Trials run in parallel; the result is identical for any thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let units: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|g| (0..config.trials).map(move |t| (g, t)))
        .collect();
    let rows: Vec<ResultRow> = units
        .par_iter()
        .flat_map_iter(|&(g, t)| run_trial(config, g, t))
        .collect();
    let mut table = ResultTable::new(rows);
    table.sort();
    Ok(table)
}

/// Writes the table as CSV.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    fs::write(path, table.to_csv())?;
    Ok(())
}

/// File name of the plot data for one pipeline.
pub fn plot_file_name(method: OrthMethod, contrast: &str, damping: bool) -> String {
    format!(
        "{method}_{contrast}_{}.dat",
        if damping { "damped" } else { "undamped" }
    )
}

/// Writes one whitespace-delimited file per (method, contrast, damping)
/// into `dir`, with columns `N median q25 q75` of the Frobenius error over
/// trials. Returns the paths written.
pub fn emit_plot_data(table: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    fs::create_dir_all(dir)?;
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for cell in table.summarize() {
        let name = plot_file_name(cell.method, cell.contrast.as_str(), cell.damping);
        let text = files
            .entry(name)
            .or_insert_with(|| "# N median q25 q75\n".to_string());
        match (cell.median, cell.q25, cell.q75) {
            (Some(m), Some(a), Some(b)) => {
                text.push_str(&format!("{} {m} {a} {b}\n", cell.n_samples))
            }
            _ => text.push_str(&format!("{} NA NA NA\n", cell.n_samples)),
        }
    }
    let mut paths = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}
