//! Sample-size calculators for centroid-body estimates.
//!
//! These are advisory: nothing in the crate enforces them.

use crate::error::{Error, Result};

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {v} must lie in (0, 1)"
        )))
    }
}

fn check_moment(m: f64) -> Result<()> {
    if m >= 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "moment bound M = {m} must be ≥ 1"
        )))
    }
}

fn ceil_count(v: f64) -> Result<u64> {
    if !v.is_finite() || v >= u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "sample bound {v} overflows"
        )));
    }
    Ok(v.ceil().max(1.0) as u64)
}

/// `(8M/ε)^(1/2 + 1/γ)`: the sample size above which the one-dimensional
/// concentration estimate for `E|X|` applies.
pub fn chebyshev_threshold(moment: f64, gamma: f64, epsilon: f64) -> Result<u64> {
    check_moment(moment)?;
    check_unit_open("γ", gamma)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ε = {epsilon} must lie in (0, 1]"
        )));
    }
    ceil_count((8.0 * moment / epsilon).powf(0.5 + 1.0 / gamma))
}

/// Smallest N with `N ≥ (8M/ε)^(1/2+1/γ)` and `8M / (ε² N^(γ/3)) ≤ δ`, so that
/// the empirical mean of `|X|` is within ε of `E|X|` with probability ≥ 1 − δ
/// when `E|X|^(1+γ) ≤ M`.
pub fn chebyshev_sample_bound(moment: f64, gamma: f64, epsilon: f64, delta: f64) -> Result<u64> {
    check_unit_open("δ", delta)?;
    let threshold = chebyshev_threshold(moment, gamma, epsilon)?;
    let tail = ceil_count((8.0 * moment / (epsilon * epsilon * delta)).powf(3.0 / gamma))?;
    Ok(threshold.max(tail))
}

/// `(16 M n⁴ / (ε′² δ′))^(1/2 + 3/γ)`: sample size after which the empirical
/// centroid body of normalized sources contains `(1 − ε′) B₁ⁿ`.
pub fn inner_ball_bound(
    moment: f64,
    gamma: f64,
    epsilon: f64,
    delta: f64,
    dim: usize,
) -> Result<u64> {
    check_moment(moment)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "γ = {gamma} must be positive"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ε′ = {epsilon} must lie in (0, 1]"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "δ′ = {delta} must lie in (0, 1]"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let n4 = (dim as f64).powi(4);
    ceil_count((16.0 * moment * n4 / (epsilon * epsilon * delta)).powf(0.5 + 3.0 / gamma))
}
