//! FastICA and the full heavy-tailed pipeline.
//!
//! [`run_htica`] computes an orthogonalizer `B`, maps every sample to `Bx`,
//! optionally damps the result and runs FastICA on it. FastICA then
//! estimates `BA`, and `Â = B⁻¹ Ŵ` estimates `A`.

mod fastica;

pub use fastica::{fastica, ContrastFunction, IcaEstimate, Whitened};

use nalgebra::DMatrix;
use rand::Rng;

use crate::damping::{self, DampingParams, DampingSummary};
use crate::error::{Error, Result};
use crate::eval::{self, RecoveryReport};
use crate::linalg;
use crate::orthogonalize::{self, BodySource, OrthMethod, Orthogonalizer};
use crate::sampling::SampleMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub orthogonalizer: OrthMethod,
    /// Points defining the centroid body (centroid method only).
    pub body: BodySource,
    /// Estimate `B` from only the first `k` rows; FastICA still sees every
    /// row.
    pub fit_rows: Option<usize>,
    /// `None` disables damping.
    pub damping: Option<DampingParams>,
    pub contrast: ContrastFunction,
    /// FastICA attempts, each from a fresh random rotation.
    pub max_restarts: usize,
    pub convergence_tol: f64,
    pub max_iter: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            orthogonalizer: OrthMethod::Centroid,
            body: BodySource::SameSamples,
            fit_rows: None,
            damping: Some(DampingParams::default()),
            contrast: ContrastFunction::Pow3,
            max_restarts: 10,
            convergence_tol: 1e-6,
            max_iter: 1000,
        }
    }
}

impl PipelineConfig {
    pub fn new(orthogonalizer: OrthMethod, damping: bool, contrast: ContrastFunction) -> Self {
        PipelineConfig {
            orthogonalizer,
            damping: damping.then(DampingParams::default),
            contrast,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_restarts == 0 {
            return Err(Error::InvalidParameter(
                "max_restarts must be at least 1".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "convergence tolerance {} must lie in (0, 1)",
                self.convergence_tol
            )));
        }
        if let Some(p) = &self.damping {
            p.validate()?;
        }
        Ok(())
    }

    /// `method/contrast/damped|undamped`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}",
            self.orthogonalizer,
            self.contrast,
            if self.damping.is_some() {
                "damped"
            } else {
                "undamped"
            }
        )
    }
}

/// Everything a pipeline run produced, converged or not.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// The estimate of the last FastICA attempt, with `a_hat` already mapped
    /// back through `B⁻¹`.
    pub estimate: IcaEstimate,
    /// FastICA attempts made.
    pub attempts: usize,
    pub damping: Option<DampingSummary>,
}

/// Runs the pipeline with a precomputed orthogonalizer.
///
/// Returns the output even when every attempt failed to converge; check
/// [`IcaEstimate::all_converged`].
pub fn run_pipeline<R: Rng + ?Sized>(
    samples: &SampleMatrix,
    b: &Orthogonalizer,
    config: &PipelineConfig,
    rng: &mut R,
) -> Result<PipelineOutput> {
    config.validate()?;
    if b.matrix().nrows() != samples.dim() {
        return Err(Error::InvalidInput(
            "orthogonalizer and sample dimensions differ".into(),
        ));
    }
    let b_inv = b.inverse()?;
    let y = b.apply(samples);
    let (data, summary) = match &config.damping {
        Some(params) => {
            let report = damping::damp_auto(&y, params, rng)?;
            let summary = report.summary();
            (report.accepted, Some(summary))
        }
        None => (y, None),
    };
    let white = Whitened::new(&data)?;
    let mut attempts = 0;
    let mut estimate = None;
    while attempts < config.max_restarts {
        attempts += 1;
        let w0 = linalg::random_orthogonal(white.dim(), rng);
        let est =
            white.fixed_point(config.contrast, w0, config.convergence_tol, config.max_iter)?;
        let done = est.all_converged();
        estimate = Some(est);
        if done {
            break;
        }
    }
    let mut estimate = estimate.expect("at least one attempt");
    estimate.a_hat = linalg::normalize_columns(&(&b_inv * &estimate.a_hat));
    Ok(PipelineOutput {
        estimate,
        attempts,
        damping: summary,
    })
}

/// The orthogonalizer `config` asks for, fitted on `samples` (or on the
/// first `config.fit_rows` of them).
pub fn fit_orthogonalizer(
    samples: &SampleMatrix,
    config: &PipelineConfig,
    truth: Option<&DMatrix<f64>>,
) -> Result<Orthogonalizer> {
    let head;
    let fit = match config.fit_rows {
        Some(k) if k < samples.len() => {
            head = samples.head(k);
            &head
        }
        _ => samples,
    };
    orthogonalize::orthogonalize(fit, config.orthogonalizer, config.body, truth)
}

/// The full pipeline: orthogonalize, damp, FastICA with restarts.
///
/// `truth` is required by the oracle orthogonalizer and, when given, is
/// also used to score the estimate. Fails with [`Error::Unconverged`] when
/// no attempt converged.
pub fn run_htica<R: Rng + ?Sized>(
    samples: &SampleMatrix,
    config: &PipelineConfig,
    rng: &mut R,
    truth: Option<&DMatrix<f64>>,
) -> Result<(IcaEstimate, Option<RecoveryReport>)> {
    let b = fit_orthogonalizer(samples, config, truth)?;
    run_htica_with(samples, &b, config, rng, truth)
}

/// [`run_htica`] with a precomputed orthogonalizer, so that several
/// pipelines can share one centroid computation.
pub fn run_htica_with<R: Rng + ?Sized>(
    samples: &SampleMatrix,
    b: &Orthogonalizer,
    config: &PipelineConfig,
    rng: &mut R,
    truth: Option<&DMatrix<f64>>,
) -> Result<(IcaEstimate, Option<RecoveryReport>)> {
    let out = run_pipeline(samples, b, config, rng)?;
    if !out.estimate.all_converged() {
        return Err(Error::Unconverged {
            restarts: out.attempts,
            converged: out.estimate.converged,
        });
    }
    let report = match truth {
        Some(a) => {
            let mut r = eval::evaluate(a, &out.estimate.a_hat)?;
            r.diagnostics = Some(b.diagnostics(a));
            Some(r)
        }
        None => None,
    };
    Ok((out.estimate, report))
}
