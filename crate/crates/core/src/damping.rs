//! Gaussian damping.
//!
//! A sample `x` is kept with probability `exp(−‖x‖²/R²)`, so the accepted
//! rows follow the density `ρ(x) exp(−‖x‖²/R²) / K` with `K = E exp(−‖X‖²/R²)`.
//! The reweighted density has Gaussian tails and therefore moments of every
//! order, while independence survives whenever the mixing is orthogonal.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::SampleMatrix;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    /// Fraction of samples that should be rejected.
    pub target_rejection: f64,
    /// Allowed gap between achieved and target acceptance.
    pub tolerance: f64,
}

impl Default for DampingParams {
    fn default() -> Self {
        DampingParams {
            target_rejection: 0.25,
            tolerance: 0.01,
        }
    }
}

impl DampingParams {
    pub fn new(target_rejection: f64, tolerance: f64) -> Result<Self> {
        let p = DampingParams {
            target_rejection,
            tolerance,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rejection > 0.0 && self.target_rejection < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target rejection {} must lie in (0, 1)",
                self.target_rejection
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {} must lie in (0, 1)",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// `1 − target_rejection`.
    pub fn target_acceptance(&self) -> f64 {
        1.0 - self.target_rejection
    }
}

#[derive(Debug, Clone)]
pub struct DampingReport {
    pub radius: f64,
    /// `accepted.len() / N`.
    pub acceptance_rate: f64,
    /// Mean weight over the full input, an estimate of `K`.
    pub k_estimate: f64,
    pub accepted: SampleMatrix,
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "damping radius {r} must be positive"
        )))
    }
}

fn mean_weight(sq_norms: &[f64], r: f64) -> f64 {
    let inv = 1.0 / (r * r);
    sq_norms.iter().map(|s| (-s * inv).exp()).sum::<f64>() / sq_norms.len() as f64
}

fn squared_norms(samples: &SampleMatrix) -> Vec<f64> {
    samples
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum())
        .collect()
}

/// Expected acceptance `(1/N) Σ exp(−‖xᵢ‖²/R²)`. Nondecreasing in `R`.
pub fn acceptance_fraction(samples: &SampleMatrix, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(mean_weight(&squared_norms(samples), r))
}

/// Bisection on `log R` for the radius whose expected acceptance is
/// `1 − params.target_rejection`.
///
/// The bracket runs from `0.01 × median row norm` to `100 × max row norm`.
/// The expected acceptance is continuous in `R`, so the bisection continues
/// until the bracket collapses (or 200 halvings) rather than stopping at the
/// first radius within `params.tolerance`; the tolerance only widens the
/// bracket check.
pub fn choose_radius(samples: &SampleMatrix, params: &DampingParams) -> Result<f64> {
    params.validate()?;
    let sq = squared_norms(samples);
    let mut norms: Vec<f64> = sq.iter().map(|s| s.sqrt()).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::InvalidInput("every sample is zero".into()));
    }
    let mid = norms.len() / 2;
    let (_, median, _) = norms.select_nth_unstable_by(mid, f64::total_cmp);
    // a zero median would collapse the log bracket
    let base = if *median > 0.0 { *median } else { max };

    let target = params.target_acceptance();
    let mut lo = (0.01 * base).ln();
    let mut hi = (100.0 * max).ln();
    let f_lo = mean_weight(&sq, lo.exp());
    let f_hi = mean_weight(&sq, hi.exp());
    if target < f_lo - params.tolerance || target > f_hi + params.tolerance {
        return Err(Error::UnDampable {
            target,
            lo_fraction: f_lo,
            hi_fraction: f_hi,
        });
    }
    if f_lo >= target {
        return Ok(lo.exp());
    }
    if f_hi <= target {
        return Ok(hi.exp());
    }
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if mean_weight(&sq, m.exp()) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Rejection sampling: row `x` survives with probability `exp(−‖x‖²/R²)`.
/// Exactly one uniform draw is consumed per row, and survivors keep their
/// input order.
pub fn damp<R: Rng + ?Sized>(samples: &SampleMatrix, r: f64, rng: &mut R) -> Result<DampingReport> {
    check_radius(r)?;
    let inv = 1.0 / (r * r);
    let n = samples.dim();
    let mut kept = Vec::new();
    let mut weight_sum = 0.0;
    let mut count = 0usize;
    for row in samples.rows() {
        let w = (-row.iter().map(|v| v * v).sum::<f64>() * inv).exp();
        weight_sum += w;
        let u: f64 = rng.random();
        if u < w {
            kept.extend_from_slice(row);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyOutput { radius: r });
    }
    let total = samples.len() as f64;
    Ok(DampingReport {
        radius: r,
        acceptance_rate: count as f64 / total,
        k_estimate: weight_sum / total,
        accepted: SampleMatrix::new(kept, n)?,
    })
}

/// The scalar part of a [`DampingReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingSummary {
    pub radius: f64,
    pub acceptance_rate: f64,
    pub k_estimate: f64,
}

impl DampingReport {
    pub fn summary(&self) -> DampingSummary {
        DampingSummary {
            radius: self.radius,
            acceptance_rate: self.acceptance_rate,
            k_estimate: self.k_estimate,
        }
    }
}

/// [`choose_radius`] followed by [`damp`].
pub fn damp_auto<R: Rng + ?Sized>(
    samples: &SampleMatrix,
    params: &DampingParams,
    rng: &mut R,
) -> Result<DampingReport> {
    let r = choose_radius(samples, params)?;
    damp(samples, r, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_circle(k: usize) -> SampleMatrix {
        let rows: Vec<[f64; 2]> = (0..k)
            .map(|i| {
                let t = i as f64 * 0.7;
                [t.cos(), t.sin()]
            })
            .collect();
        SampleMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn zero_rows_always_accepted() {
        let x = SampleMatrix::new(vec![0.0; 8], 2).unwrap();
        assert_eq!(acceptance_fraction(&x, 0.3).unwrap(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = damp(&x, 0.01, &mut rng).unwrap();
        assert_eq!(rep.accepted.len(), 4);
        assert!(choose_radius(&x, &DampingParams::default()).is_err());
    }

    #[test]
    fn unit_norm_radius() {
        let x = unit_circle(50);
        let f = acceptance_fraction(&x, 1.86442).unwrap();
        assert!((f - 0.75).abs() < 1e-5);
        let r = choose_radius(&x, &DampingParams::default()).unwrap();
        let exact = 1.0 / (1.0 / 0.75f64).ln().sqrt();
        assert!((r - exact).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(DampingParams::new(0.0, 0.01).is_err());
        assert!(DampingParams::new(1.0, 0.01).is_err());
        assert!(DampingParams::new(0.5, 0.0).is_err());
        assert!(acceptance_fraction(&unit_circle(3), 0.0).is_err());
    }

    #[test]
    fn everything_rejected_is_an_error() {
        let x = SampleMatrix::new(vec![100.0, 0.0], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            damp(&x, 0.1, &mut rng),
            Err(Error::EmptyOutput { .. })
        ));
    }
}
