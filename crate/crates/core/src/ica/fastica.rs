//! Symmetric FastICA.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::SampleMatrix;

/// Covariance eigenvalues below this fraction of the trace count as zero.
const WHITEN_REL_FLOOR: f64 = 1e-12;

/// Nonlinearity used in the fixed-point update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContrastFunction {
    /// `g(u) = u³`, the kurtosis contrast.
    Pow3,
    /// `g(u) = tanh u`, the log-cosh contrast.
    Tanh,
}

impl ContrastFunction {
    pub const ALL: [ContrastFunction; 2] = [ContrastFunction::Pow3, ContrastFunction::Tanh];

    pub fn g(self, u: f64) -> f64 {
        match self {
            ContrastFunction::Pow3 => u * u * u,
            ContrastFunction::Tanh => u.tanh(),
        }
    }

    pub fn g_prime(self, u: f64) -> f64 {
        match self {
            ContrastFunction::Pow3 => 3.0 * u * u,
            ContrastFunction::Tanh => {
                let t = u.tanh();
                1.0 - t * t
            }
        }
    }

    /// `g(u)` and `g′(u)` together.
    #[inline]
    fn eval(self, u: f64) -> (f64, f64) {
        match self {
            ContrastFunction::Pow3 => {
                let u2 = u * u;
                (u2 * u, 3.0 * u2)
            }
            ContrastFunction::Tanh => {
                let t = u.tanh();
                (t, 1.0 - t * t)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContrastFunction::Pow3 => "pow3",
            ContrastFunction::Tanh => "tanh",
        }
    }
}

impl fmt::Display for ContrastFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ContrastFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pow3" | "cube" => Ok(ContrastFunction::Pow3),
            "tanh" | "logcosh" => Ok(ContrastFunction::Tanh),
            other => Err(Error::InvalidParameter(format!(
                "unknown contrast `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IcaEstimate {
    /// Estimated mixing matrix with unit columns.
    pub a_hat: DMatrix<f64>,
    /// Orthogonal unmixing rotation on whitened data; row `i` extracts
    /// component `i`.
    pub w: DMatrix<f64>,
    /// Fixed-point sweeps performed. Symmetric updates move every component
    /// together, so the count is shared.
    pub iterations: usize,
    /// Whether `|⟨w_new, w_old⟩| ≥ 1 − tol` held for each component at the
    /// last sweep.
    pub converged: Vec<bool>,
}

impl IcaEstimate {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Centered, whitened data `z = K (x − μ)` stored one sample per column,
/// along with `K`.
#[derive(Debug, Clone)]
pub struct Whitened {
    pub z: DMatrix<f64>,
    pub whitening: DMatrix<f64>,
}

impl Whitened {
    pub fn new(samples: &SampleMatrix) -> Result<Self> {
        let n = samples.dim();
        let count = samples.len();
        if count <= n {
            return Err(Error::InsufficientSamples {
                needed: n + 1,
                got: count,
            });
        }
        let mut mean = vec![0.0; n];
        for row in samples.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= count as f64;
        }
        let mut centered = DMatrix::zeros(n, count);
        for (k, row) in samples.rows().enumerate() {
            for i in 0..n {
                centered[(i, k)] = row[i] - mean[i];
            }
        }
        let cov = (&centered * centered.transpose()) / count as f64;
        let floor = WHITEN_REL_FLOOR * cov.trace().max(f64::MIN_POSITIVE);
        let (k, _) = linalg::inverse_sqrt_spd(&cov, floor)
            .map_err(|min_eigenvalue| Error::SingularInput { min_eigenvalue })?;
        Ok(Whitened {
            z: &k * centered,
            whitening: k,
        })
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    /// Symmetric fixed-point iteration from the rotation `w0`.
    pub fn fixed_point(
        &self,
        contrast: ContrastFunction,
        w0: DMatrix<f64>,
        tol: f64,
        max_iter: usize,
    ) -> Result<IcaEstimate> {
        let n = self.dim();
        let count = self.z.ncols() as f64;
        let zt = self.z.transpose();
        let mut w = w0;
        let mut converged = vec![false; n];
        let mut iterations = 0;
        let mut y = DMatrix::zeros(n, self.z.ncols());
        while iterations < max_iter {
            iterations += 1;
            w.mul_to(&self.z, &mut y);
            let mut gp = DVector::zeros(n);
            for mut col in y.column_iter_mut() {
                for i in 0..n {
                    let (g, d) = contrast.eval(col[i]);
                    col[i] = g;
                    gp[i] += d;
                }
            }
            gp /= count;
            let mut w_new = (&y * &zt) / count;
            for i in 0..n {
                for j in 0..n {
                    w_new[(i, j)] -= gp[i] * w[(i, j)];
                }
            }
            let Some(w_new) = linalg::symmetric_decorrelation(&w_new) else {
                converged.iter_mut().for_each(|c| *c = false);
                break;
            };
            if w_new.iter().any(|v| !v.is_finite()) {
                converged.iter_mut().for_each(|c| *c = false);
                break;
            }
            for i in 0..n {
                let dot = w_new.row(i).dot(&w.row(i));
                converged[i] = dot.abs() >= 1.0 - tol;
            }
            w = w_new;
            if converged.iter().all(|&c| c) {
                break;
            }
        }
        let k_inv = self
            .whitening
            .clone()
            .try_inverse()
            .ok_or(Error::SingularInput {
                min_eigenvalue: 0.0,
            })?;
        let a_hat = linalg::normalize_columns(&(k_inv * w.transpose()));
        Ok(IcaEstimate {
            a_hat,
            w,
            iterations,
            converged,
        })
    }
}

/// FastICA from a random orthogonal starting rotation drawn from `rng`.
///
/// Non-convergence is reported through [`IcaEstimate::converged`], not as an
/// error.
pub fn fastica<R: Rng + ?Sized>(
    samples: &SampleMatrix,
    contrast: ContrastFunction,
    rng: &mut R,
    tol: f64,
    max_iter: usize,
) -> Result<IcaEstimate> {
    let white = Whitened::new(samples)?;
    let w0 = linalg::random_orthogonal(white.dim(), rng);
    white.fixed_point(contrast, w0, tol, max_iter)
}
