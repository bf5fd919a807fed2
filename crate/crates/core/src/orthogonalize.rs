//! Orthogonalizers: matrices `B` for which `BA` has nearly orthogonal columns.
//!
//! Two estimators work from samples alone:
//!
//! * covariance: `B = Σ̃^(−1/2)` with `Σ̃ = (1/N) Σ x xᵀ`;
//! * centroid scaling: each sample is shrunk to `(tanh d / d) x` where `d`
//!   is its gauge with respect to the empirical centroid body, and
//!   `B = C^(−1/2)` for the scatter `C` of the shrunk samples. The shrunk
//!   samples all lie inside the body, so `C` exists whatever the tails.
//!
//! `oracle` (`B = A⁻¹`) and `identity` are baselines for experiments.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::centroid::EmpiricalCentroidBody;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::SampleMatrix;

/// Scatter eigenvalues at or below this are treated as singular.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Rows per independently warm-started LP batch. Fixed so results do not
/// depend on the number of worker threads.
const LP_CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrthMethod {
    Centroid,
    Covariance,
    Oracle,
    Identity,
}

impl OrthMethod {
    pub const ALL: [OrthMethod; 4] = [
        OrthMethod::Centroid,
        OrthMethod::Covariance,
        OrthMethod::Oracle,
        OrthMethod::Identity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OrthMethod::Centroid => "centroid",
            OrthMethod::Covariance => "covariance",
            OrthMethod::Oracle => "oracle",
            OrthMethod::Identity => "identity",
        }
    }
}

impl fmt::Display for OrthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for OrthMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "centroid" => Ok(OrthMethod::Centroid),
            "covariance" => Ok(OrthMethod::Covariance),
            "oracle" => Ok(OrthMethod::Oracle),
            "identity" => Ok(OrthMethod::Identity),
            other => Err(Error::InvalidParameter(format!(
                "unknown orthogonalizer `{other}`"
            ))),
        }
    }
}

/// Which points define the centroid body used for scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BodySource {
    /// The samples being scaled.
    #[default]
    SameSamples,
    /// Only the first `k` samples (a cheaper body for large N).
    FirstRows(usize),
}

/// An orthogonalization matrix with its provenance.
#[derive(Debug, Clone)]
pub struct Orthogonalizer {
    matrix: DMatrix<f64>,
    method: OrthMethod,
    eigen_floor: f64,
    scatter: Option<DMatrix<f64>>,
}

/// `σ_min` of the column-normalized `M = BA` and `σ_max(M) / σ_min(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityDiagnostics {
    pub sigma_min_normalized: f64,
    pub condition_number: f64,
}

impl Orthogonalizer {
    /// Assembles an orthogonalizer from parts, e.g. one read back from disk.
    pub fn from_parts(matrix: DMatrix<f64>, method: OrthMethod, eigen_floor: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("orthogonalizer must be square".into()));
        }
        Ok(Orthogonalizer {
            matrix,
            method,
            eigen_floor,
            scatter: None,
        })
    }

    fn from_scatter(c: DMatrix<f64>, method: OrthMethod) -> Result<Self> {
        let (b, floor) = linalg::inverse_sqrt_spd(&c, EIGEN_FLOOR)
            .map_err(|min_eigenvalue| Error::SingularScatter { min_eigenvalue })?;
        Ok(Orthogonalizer {
            matrix: b,
            method,
            eigen_floor: floor,
            scatter: Some(c),
        })
    }

    /// `B = A⁻¹`.
    pub fn oracle(mixing: &DMatrix<f64>) -> Result<Self> {
        let inv = mixing
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("mixing matrix is not invertible".into()))?;
        Ok(Orthogonalizer {
            matrix: inv,
            method: OrthMethod::Oracle,
            eigen_floor: f64::NAN,
            scatter: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Orthogonalizer {
            matrix: DMatrix::identity(n, n),
            method: OrthMethod::Identity,
            eigen_floor: 1.0,
            scatter: None,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn method(&self) -> OrthMethod {
        self.method
    }

    /// Smallest eigenvalue of the scatter matrix `B` was built from.
    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    /// The scatter matrix `C` with `B = C^(−1/2)`, for the data-driven
    /// methods.
    pub fn scatter(&self) -> Option<&DMatrix<f64>> {
        self.scatter.as_ref()
    }

    /// `‖B⁻² − C‖_F / ‖C‖_F`.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let c = self.scatter.as_ref()?;
        let inv = self.matrix.clone().try_inverse()?;
        Some((&inv * &inv - c).norm() / c.norm())
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("orthogonalizer is not invertible".into()))
    }

    /// Every row `x` replaced by `B x`.
    pub fn apply(&self, samples: &SampleMatrix) -> SampleMatrix {
        samples.transform(&self.matrix)
    }

    pub fn diagnostics(&self, mixing: &DMatrix<f64>) -> OrthogonalityDiagnostics {
        diagnostics(self, mixing)
    }
}

/// Singular-value diagnostics of `M = BA`.
pub fn diagnostics(b: &Orthogonalizer, mixing: &DMatrix<f64>) -> OrthogonalityDiagnostics {
    let m = b.matrix() * mixing;
    let s = linalg::singular_values(&m);
    let s_hat = linalg::singular_values(&linalg::normalize_columns(&m));
    let smin = *s.last().unwrap_or(&0.0);
    let smax = *s.first().unwrap_or(&0.0);
    OrthogonalityDiagnostics {
        sigma_min_normalized: s_hat.last().copied().unwrap_or(0.0).clamp(0.0, 1.0),
        condition_number: if smin > 0.0 {
            (smax / smin).max(1.0)
        } else {
            f64::INFINITY
        },
    }
}

/// `tanh(d) / d`, continuous at zero.
pub fn tanh_ratio(d: f64) -> f64 {
    if d.abs() < 1e-4 {
        let d2 = d * d;
        1.0 - d2 / 3.0 + 2.0 * d2 * d2 / 15.0
    } else {
        d.tanh() / d
    }
}

/// Gauge of every row of `samples` with respect to `body`. Rows are solved in
/// fixed-size warm-started batches that may run concurrently.
pub fn gauges(samples: &SampleMatrix, body: &EmpiricalCentroidBody) -> Result<Vec<f64>> {
    let n = samples.dim();
    if body.dim() != n {
        return Err(Error::InvalidInput(
            "body and sample dimensions differ".into(),
        ));
    }
    let chunks: Vec<Result<Vec<f64>>> = samples
        .as_slice()
        .par_chunks(LP_CHUNK * n)
        .map(|chunk| {
            let mut solver = body.solver();
            chunk.chunks_exact(n).map(|row| solver.gauge(row)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Rows scaled by `tanh(dᵢ)/dᵢ` where `dᵢ` is the gauge with respect to
/// `body`. Also returns the gauges.
pub fn scale_samples_with_body(
    samples: &SampleMatrix,
    body: &EmpiricalCentroidBody,
) -> Result<(SampleMatrix, Vec<f64>)> {
    let d = gauges(samples, body)?;
    let n = samples.dim();
    let mut data = Vec::with_capacity(samples.len() * n);
    for (i, (row, &di)) in samples.rows().zip(&d).enumerate() {
        if !di.is_finite() {
            return Err(Error::DegenerateSampleSpan { row: i });
        }
        let f = tanh_ratio(di);
        data.extend(row.iter().map(|v| v * f));
    }
    Ok((SampleMatrix::new(data, n)?, d))
}

/// Centroid-body scaling against the body of the samples themselves.
pub fn scale_samples_centroid(samples: &SampleMatrix) -> Result<SampleMatrix> {
    let body = EmpiricalCentroidBody::new(samples.clone());
    Ok(scale_samples_with_body(samples, &body)?.0)
}

pub fn orthogonalize_centroid(samples: &SampleMatrix) -> Result<Orthogonalizer> {
    orthogonalize_centroid_from(samples, BodySource::SameSamples)
}

pub fn orthogonalize_centroid_from(
    samples: &SampleMatrix,
    source: BodySource,
) -> Result<Orthogonalizer> {
    let body = match source {
        BodySource::SameSamples => EmpiricalCentroidBody::new(samples.clone()),
        BodySource::FirstRows(k) => EmpiricalCentroidBody::new(samples.head(k)),
    };
    orthogonalize_centroid_with_body(samples, &body)
}

/// `B = C^(−1/2)` for the scatter of the samples scaled against `body`
/// (which may be built from held-out data).
pub fn orthogonalize_centroid_with_body(
    samples: &SampleMatrix,
    body: &EmpiricalCentroidBody,
) -> Result<Orthogonalizer> {
    let (scaled, _) = scale_samples_with_body(samples, body)?;
    Orthogonalizer::from_scatter(scaled.scatter(), OrthMethod::Centroid)
}

/// `B = Σ̃^(−1/2)` with `Σ̃ = (1/N) Σ x xᵀ`.
pub fn orthogonalize_covariance(samples: &SampleMatrix) -> Result<Orthogonalizer> {
    Orthogonalizer::from_scatter(samples.scatter(), OrthMethod::Covariance)
}

/// Dispatch on `method`; `oracle` needs the true mixing matrix.
pub fn orthogonalize(
    samples: &SampleMatrix,
    method: OrthMethod,
    body: BodySource,
    mixing: Option<&DMatrix<f64>>,
) -> Result<Orthogonalizer> {
    match method {
        OrthMethod::Centroid => orthogonalize_centroid_from(samples, body),
        OrthMethod::Covariance => orthogonalize_covariance(samples),
        OrthMethod::Oracle => Orthogonalizer::oracle(mixing.ok_or_else(|| {
            Error::InvalidParameter("the oracle orthogonalizer needs the true mixing matrix".into())
        })?),
        OrthMethod::Identity => Ok(Orthogonalizer::identity(samples.dim())),
    }
}
