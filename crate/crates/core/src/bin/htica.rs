use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use htica::damping::{self, DampingParams};
use htica::eval;
use htica::harness::{self, ConfigBuilder};
use htica::ica::{self, ContrastFunction, PipelineConfig};
use htica::io;
use htica::orthogonalize::{BodySource, OrthMethod};
use htica::sampling::{substream, IcaInstance, MixingKind, TailExponents};
use htica::Error;

/// Heavy-tailed ICA: synthetic data, orthogonalization, damping, FastICA
/// and sample-size sweeps.
#[derive(Parser)]
#[command(name = "htica", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples X = AS from a synthetic instance.
    Gen(GenArgs),
    /// Compute an orthogonalization matrix B for a sample file.
    Orth(OrthArgs),
    /// Gaussian damping by rejection sampling.
    Damp(DampArgs),
    /// Run one pipeline on a sample file.
    Run(RunArgs),
    /// Sample-size sweep over several pipelines.
    Sweep(SweepArgs),
    /// Compare an estimated mixing matrix with the truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Tail exponents, e.g. `6*8,2.1,2.1`.
    #[arg(long)]
    eta: String,
    /// Number of samples.
    #[arg(short = 'N', long = "samples")]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// `random` (unit columns) or `orthogonal`.
    #[arg(long, default_value = "random")]
    mixing: String,
    /// Rescale sources to unit first absolute moment.
    #[arg(long)]
    normalize: bool,
    #[arg(short, long)]
    out: PathBuf,
    /// Also write the mixing matrix here.
    #[arg(long)]
    mixing_out: Option<PathBuf>,
}

#[derive(Args)]
struct OrthArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value = "centroid")]
    method: OrthMethod,
    /// True mixing matrix (required by `oracle`).
    #[arg(long)]
    mixing: Option<PathBuf>,
    /// Build the centroid body from only the first k rows.
    #[arg(long)]
    body_rows: Option<usize>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct DampArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Fixed radius; chosen by bisection when absent.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    target_rejection: f64,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value = "centroid")]
    method: OrthMethod,
    #[arg(long, default_value = "pow3")]
    contrast: ContrastFunction,
    /// `on` or `off`.
    #[arg(long, default_value = "on")]
    damping: String,
    #[arg(long)]
    body_rows: Option<usize>,
    #[arg(long)]
    fit_rows: Option<usize>,
    #[arg(long, default_value_t = 10)]
    max_restarts: usize,
    #[arg(long)]
    seed: u64,
    /// True mixing matrix; enables scoring and the oracle method.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write the estimated mixing matrix here.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// `key = value` experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    eta: Option<String>,
    /// Sample sizes, e.g. `1000,10000`.
    #[arg(long = "n-grid")]
    n_grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    mixing: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    contrasts: Option<String>,
    /// `on`, `off` or `both`.
    #[arg(long)]
    damping: Option<String>,
    #[arg(long)]
    body_rows: Option<usize>,
    #[arg(long)]
    fit_rows: Option<usize>,
    /// Record wall-clock time per pipeline (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// CSV output path; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Directory for per-pipeline quartile files.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
}

fn parse_on_off(s: &str) -> Result<bool, Error> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        other => Err(Error::InvalidParameter(format!(
            "expected on/off, got `{other}`"
        ))),
    }
}

fn parse_eta(s: &str) -> Result<TailExponents, Error> {
    let v = harness::parse_list::<f64>(s).map_err(Error::InvalidParameter)?;
    TailExponents::new(v)
}

fn gen(a: GenArgs) -> Result<(), Error> {
    let kind = match a.mixing.as_str() {
        "random" | "random-unit-columns" => MixingKind::RandomUnitColumns,
        "orthogonal" => MixingKind::Orthogonal,
        other => return Err(Error::InvalidParameter(format!("unknown mixing `{other}`"))),
    };
    let inst = IcaInstance::random(parse_eta(&a.eta)?, kind, a.seed)?
        .with_normalized_first_moment(a.normalize)?;
    let x = inst.generate(a.samples)?;
    io::save_samples(&a.out, &x, Some(a.seed))?;
    if let Some(p) = a.mixing_out {
        io::save_matrix(
            &p,
            inst.mixing(),
            &[("kind", "mixing".into()), ("seed", a.seed.to_string())],
        )?;
    }
    Ok(())
}

fn load_truth(path: Option<&Path>) -> Result<Option<nalgebra::DMatrix<f64>>, Error> {
    path.map(|p| io::load_matrix(p).map(|(m, _)| m)).transpose()
}

fn orth(a: OrthArgs) -> Result<(), Error> {
    let (x, _) = io::load_samples(&a.input)?;
    let truth = load_truth(a.mixing.as_deref())?;
    let body = a
        .body_rows
        .map_or(BodySource::SameSamples, BodySource::FirstRows);
    let b = htica::orthogonalize::orthogonalize(&x, a.method, body, truth.as_ref())?;
    io::save_matrix(&a.out, b.matrix(), &[("method", a.method.to_string())])?;
    if let Some(t) = &truth {
        let d = b.diagnostics(t);
        println!(
            "sigma_min={} cond={}",
            d.sigma_min_normalized, d.condition_number
        );
    }
    Ok(())
}

fn damp(a: DampArgs) -> Result<(), Error> {
    let (x, _) = io::load_samples(&a.input)?;
    let params = DampingParams::new(a.target_rejection, a.tolerance)?;
    let r = match a.radius {
        Some(r) => r,
        None => damping::choose_radius(&x, &params)?,
    };
    let mut rng = substream(a.seed, 0);
    let report = damping::damp(&x, r, &mut rng)?;
    println!(
        "R={} acceptance_rate={} K_estimate={}",
        report.radius, report.acceptance_rate, report.k_estimate
    );
    if let Some(out) = a.out {
        io::save_samples(&out, &report.accepted, Some(a.seed))?;
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<(), Error> {
    let (x, _) = io::load_samples(&a.input)?;
    let truth = load_truth(a.truth.as_deref())?;
    let config = PipelineConfig {
        orthogonalizer: a.method,
        contrast: a.contrast,
        damping: parse_on_off(&a.damping)?.then(DampingParams::default),
        body: a
            .body_rows
            .map_or(BodySource::SameSamples, BodySource::FirstRows),
        fit_rows: a.fit_rows,
        max_restarts: a.max_restarts,
        ..PipelineConfig::default()
    };
    let mut rng = substream(a.seed, 0);
    let (est, report) = ica::run_htica(&x, &config, &mut rng, truth.as_ref())?;
    println!("pipeline={} iterations={}", config.label(), est.iterations);
    if let Some(r) = report {
        println!("frob={} amari={}", r.frobenius_error, r.amari_index);
    }
    if let Some(out) = a.out {
        let flags: Vec<&str> = est
            .converged
            .iter()
            .map(|&c| if c { "1" } else { "0" })
            .collect();
        io::save_matrix(
            &out,
            &est.a_hat,
            &[
                ("contrast", config.contrast.to_string()),
                ("iterations", est.iterations.to_string()),
                ("converged", flags.join(",")),
            ],
        )?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Error> {
    let (mut builder, base) = match &a.config {
        Some(p) => (
            ConfigBuilder::from_str(&std::fs::read_to_string(p)?)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ConfigBuilder::new(), PathBuf::from(".")),
    };
    builder.set("seed", a.seed.to_string())?;
    let overrides = [
        ("eta", a.eta),
        ("N", a.n_grid),
        ("trials", a.trials.map(|t| t.to_string())),
        ("mixing", a.mixing),
        ("methods", a.methods),
        ("contrasts", a.contrasts),
        ("damping", a.damping),
        ("body_rows", a.body_rows.map(|k| k.to_string())),
        ("fit_rows", a.fit_rows.map(|k| k.to_string())),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            builder.set(k, v)?;
        }
    }
    if a.timing {
        builder.set("timing", "true")?;
    }
    let config = builder.build(&base)?;
    let table = harness::run_experiment(&config)?;
    match a.out.or(config.output.clone()) {
        Some(path) => harness::emit_csv(&table, &path)?,
        None => print!("{}", table.to_csv()),
    }
    if let Some(dir) = a.plot_dir {
        harness::emit_plot_data(&table, &dir)?;
    }
    Ok(())
}

fn evaluate(a: EvalArgs) -> Result<(), Error> {
    let (truth, _) = io::load_matrix(&a.truth)?;
    let (est, _) = io::load_matrix(&a.estimate)?;
    let r = eval::evaluate(&truth, &est)?;
    println!("frob={} amari={}", r.frobenius_error, r.amari_index);
    let perm: Vec<String> = r
        .matching
        .permutation
        .iter()
        .zip(&r.matching.signs)
        .map(|(p, s)| format!("{}{}", if *s < 0.0 { "-" } else { "+" }, p))
        .collect();
    println!("matching={}", perm.join(","));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Orth(a) => orth(a),
        Command::Damp(a) => damp(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Eval(a) => evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
