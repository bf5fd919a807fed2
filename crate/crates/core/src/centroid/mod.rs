//! Empirical centroid body of a sample.
//!
//! For points `x⁽¹⁾ … x⁽ᴺ⁾` the body is the zonotope
//! `(1/N) Σᵢ [−x⁽ⁱ⁾, x⁽ⁱ⁾]`. Its support function is
//! `h(u) = (1/N) Σᵢ |⟨u, x⁽ⁱ⁾⟩|`, and its gauge at `q` is `1/λ*` where
//!
//! ```text
//! λ* = max λ   s.t.   (1/N) Σᵢ λᵢ x⁽ⁱ⁾ = λ q,   λᵢ ∈ [−1, 1].
//! ```
//!
//! The LP has only `n` equality rows, so it is solved by a dense bounded
//! dual simplex ([`simplex`]) that keeps its basis between queries.

mod bounds;
mod simplex;

pub use bounds::{chebyshev_sample_bound, chebyshev_threshold, inner_ball_bound};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;
use crate::sampling::SampleMatrix;
use simplex::DualSimplex;

/// Gauge values at or below this bound count as members.
pub const BOUNDARY_TOL: f64 = 1e-9;

const SPAN_EIG_REL: f64 = 1e-12;
const SPAN_RESIDUAL_REL: f64 = 1e-9;

/// The zonotope `(1/N) Σ [−x⁽ⁱ⁾, x⁽ⁱ⁾]` together with scaled LP columns.
#[derive(Debug, Clone)]
pub struct EmpiricalCentroidBody {
    points: SampleMatrix,
    /// points / (N μ) with μ the mean row max-abs value
    columns: Vec<f64>,
    mean_scale: f64,
    /// orthonormal basis of the complement of the span, when rank-deficient
    complement: Vec<Vec<f64>>,
    /// inverse second-moment matrix of the points scaled by `1/μ`
    shape_inverse: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Solution of the gauge LP in the body's own normalization.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// λ*; `+∞` when unbounded.
    pub objective: f64,
    /// Attaining λᵢ, each in `[−1, 1]`.
    pub coefficients: Vec<f64>,
    /// The scalar variable λ at the optimum (equal to `objective`).
    pub scale: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// `1/λ*`, with `0` for `q = 0` and `+∞` when `λ* = 0`.
    pub fn gauge(&self) -> f64 {
        match self.status {
            LpStatus::Unbounded => 0.0,
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Optimal if self.objective > 0.0 => 1.0 / self.objective,
            LpStatus::Optimal => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAnswer {
    pub verdict: Verdict,
    pub epsilon: f64,
    pub gauge: f64,
}

impl EmpiricalCentroidBody {
    pub fn new(points: SampleMatrix) -> Self {
        let n = points.dim();
        let m = points.len();
        let mean_scale = {
            let s: f64 = points
                .rows()
                .map(|r| r.iter().fold(0.0f64, |a, v| a.max(v.abs())))
                .sum::<f64>()
                / m as f64;
            if s > 0.0 {
                s
            } else {
                1.0
            }
        };
        let w = 1.0 / (m as f64 * mean_scale);
        let columns: Vec<f64> = points.as_slice().iter().map(|v| v * w).collect();

        let scatter = points.scaled(1.0 / mean_scale).scatter();
        let eig = SymmetricEigen::new(scatter.clone());
        let max_eig = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let complement: Vec<Vec<f64>> = (0..n)
            .filter(|&k| !(eig.eigenvalues[k] > SPAN_EIG_REL * max_eig) || max_eig == 0.0)
            .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();

        let shape_inverse = if complement.is_empty() {
            scatter.try_inverse()
        } else {
            None
        };
        EmpiricalCentroidBody {
            points,
            columns,
            mean_scale,
            complement,
            shape_inverse,
        }
    }

    pub fn points(&self) -> &SampleMatrix {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when the points span the whole space.
    pub fn is_full_dimensional(&self) -> bool {
        self.complement.is_empty()
    }

    /// `h(u) = (1/N) Σ |u · x⁽ⁱ⁾|`.
    pub fn support_function(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim());
        let total: f64 = self
            .points
            .rows()
            .map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().abs())
            .sum();
        total / self.len() as f64
    }

    /// A solver that warm-starts successive queries.
    pub fn solver(&self) -> GaugeSolver<'_> {
        GaugeSolver {
            body: self,
            lp: DualSimplex::new(self.dim(), self.columns.clone()),
        }
    }

    pub fn solve_gauge_lp(&self, q: &[f64]) -> Result<LpSolution> {
        self.solver().solve(q)
    }

    pub fn minkowski_functional(&self, q: &[f64]) -> Result<f64> {
        self.solver().gauge(q)
    }

    pub fn membership(&self, q: &[f64], epsilon: f64) -> Result<OracleAnswer> {
        self.solver().membership(q, epsilon)
    }

    fn outside_span(&self, q: &[f64]) -> bool {
        if self.complement.is_empty() {
            return false;
        }
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let off: f64 = self
            .complement
            .iter()
            .map(|v| v.iter().zip(q).map(|(a, b)| a * b).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        off > SPAN_RESIDUAL_REL * norm
    }
}

/// Gauge LP solver bound to one body.
#[derive(Debug, Clone)]
pub struct GaugeSolver<'a> {
    body: &'a EmpiricalCentroidBody,
    lp: DualSimplex,
}

impl GaugeSolver<'_> {
    pub fn solve(&mut self, q: &[f64]) -> Result<LpSolution> {
        let body = self.body;
        let n = body.dim();
        let m = body.len();
        assert_eq!(q.len(), n, "query dimension mismatch");
        if q.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::InvalidInput(
                "query has non-finite entries".into(),
            ));
        }
        let qmax = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if qmax == 0.0 {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: f64::INFINITY,
                coefficients: vec![0.0; m],
                scale: f64::INFINITY,
                iterations: 0,
            });
        }
        if body.outside_span(q) {
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: 0.0,
                coefficients: vec![0.0; m],
                scale: 0.0,
                iterations: 0,
            });
        }
        let qhat: Vec<f64> = q.iter().map(|v| v / qmax).collect();
        let cap = 20 * (m + n) + 1000;
        let hint = self.hint(&qhat);
        let raw = self.lp.solve(&qhat, hint.as_deref(), cap)?;
        // Σ λ a = s q̂ with a = x / (N μ)  ⇒  (1/N) Σ λ x = (s μ / ‖q‖∞) q
        let lambda = raw.scale * body.mean_scale / qmax;
        let sol = LpSolution {
            status: LpStatus::Optimal,
            objective: lambda,
            coefficients: raw.coefficients,
            scale: lambda,
            iterations: raw.iterations,
        };
        check_residual(body, q, &sol, raw.iterations)?;
        Ok(sol)
    }

    /// `M⁻¹ q̂` with `M` the second-moment matrix of the points: the optimal
    /// dual direction when the body is an ellipsoid, and a usable start
    /// otherwise.
    fn hint(&self, q: &[f64]) -> Option<Vec<f64>> {
        let shape = self.body.shape_inverse.as_ref()?;
        let n = q.len();
        Some(
            (0..n)
                .map(|i| (0..n).map(|k| shape[(i, k)] * q[k]).sum())
                .collect(),
        )
    }

    pub fn gauge(&mut self, q: &[f64]) -> Result<f64> {
        Ok(self.solve(q)?.gauge())
    }

    /// Weak membership: YES iff the gauge is at most `1 + 1e-9`. `epsilon`
    /// is recorded; the ε-guarantee comes from the sample size, which is the
    /// caller's business.
    pub fn membership(&mut self, q: &[f64], epsilon: f64) -> Result<OracleAnswer> {
        let gauge = self.gauge(q)?;
        let verdict = if gauge <= 1.0 + BOUNDARY_TOL {
            Verdict::Yes
        } else {
            Verdict::No
        };
        Ok(OracleAnswer {
            verdict,
            epsilon,
            gauge,
        })
    }
}

fn check_residual(
    body: &EmpiricalCentroidBody,
    q: &[f64],
    sol: &LpSolution,
    iterations: usize,
) -> Result<()> {
    let n = body.dim();
    let m = body.len() as f64;
    let mut lhs = vec![0.0; n];
    let mut mag: f64 = 0.0;
    for (row, &l) in body.points.rows().zip(&sol.coefficients) {
        for k in 0..n {
            lhs[k] += l * row[k];
        }
    }
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let r = lhs[k] / m - sol.scale * q[k];
        worst = worst.max(r.abs());
        mag = mag.max((sol.scale * q[k]).abs());
    }
    let tol = 1e-8 * mag.max(body.mean_scale).max(1.0);
    if worst > tol {
        return Err(crate::Error::SolverFailure {
            iterations,
            reason: format!("equality residual {worst:e} exceeds {tol:e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> EmpiricalCentroidBody {
        EmpiricalCentroidBody::new(SampleMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap())
    }

    #[test]
    fn support_function_examples() {
        let b = square();
        assert_eq!(b.support_function(&[0.0, 0.0]), 0.0);
        assert!((b.support_function(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        let u = [0.3, -1.7];
        assert!((b.support_function(&[0.6, -3.4]) - 2.0 * b.support_function(&u)).abs() < 1e-14);
    }

    #[test]
    fn zero_query_is_unbounded() {
        let sol = square().solve_gauge_lp(&[0.0, 0.0]).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        assert_eq!(sol.gauge(), 0.0);
    }

    #[test]
    fn square_gauges() {
        let b = square();
        let sol = b.solve_gauge_lp(&[0.5, 0.0]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        let sol = b.solve_gauge_lp(&[1.0, 1.0]).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-9);
        assert!((b.minkowski_functional(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-9);
        for l in &sol.coefficients {
            assert!(l.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn square_membership() {
        let b = square();
        assert_eq!(
            b.membership(&[0.0, 0.0], 0.1).unwrap().verdict,
            Verdict::Yes
        );
        let a = b.membership(&[0.4, 0.4], 0.1).unwrap();
        assert_eq!(a.verdict, Verdict::Yes);
        assert!((a.gauge - 0.8).abs() < 1e-9);
        let a = b.membership(&[0.6, 0.0], 0.1).unwrap();
        assert_eq!(a.verdict, Verdict::No);
        assert!((a.gauge - 1.2).abs() < 1e-9);
    }

    #[test]
    fn outside_span_has_infinite_gauge() {
        let b = EmpiricalCentroidBody::new(
            SampleMatrix::from_rows(&[[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 0.0]]).unwrap(),
        );
        assert!(!b.is_full_dimensional());
        assert_eq!(
            b.minkowski_functional(&[0.0, 0.0, 1.0]).unwrap(),
            f64::INFINITY
        );
        assert_eq!(
            b.membership(&[0.1, 0.0, 0.01], 0.1).unwrap().verdict,
            Verdict::No
        );
        // inside the plane the LP still works
        let g = b.minkowski_functional(&[0.5, 0.5, 0.0]).unwrap();
        assert!(g.is_finite() && g > 0.0);
    }

    #[test]
    fn segment_body() {
        // single point: body is the segment [-x, x]
        let b = EmpiricalCentroidBody::new(SampleMatrix::from_rows(&[[2.0]]).unwrap());
        assert!((b.minkowski_functional(&[1.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((b.minkowski_functional(&[-3.0]).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn warm_start_matches_cold() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [
                    (t * 0.7).sin() * 3.0,
                    (t * 1.3).cos(),
                    (t * 0.31).sin() + 0.2 * t.cos(),
                ]
            })
            .collect();
        let body = EmpiricalCentroidBody::new(SampleMatrix::from_rows(&rows).unwrap());
        let mut warm = body.solver();
        for r in &rows {
            let a = warm.gauge(r).unwrap();
            let b = body.minkowski_functional(r).unwrap();
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }
}
