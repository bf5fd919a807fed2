//! Recovery metrics for an estimated mixing matrix.
//!
//! ICA recovers `A` only up to a signed permutation of its columns. Columns
//! of the estimate are first matched to the truth by an optimal assignment
//! with sign correction, then compared in the Frobenius norm. The Amari
//! index needs no matching.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::orthogonalize::OrthogonalityDiagnostics;

/// Columns must have unit norm to within this.
pub const UNIT_TOL: f64 = 1e-6;

/// Optimal alignment of estimated columns to true columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatching {
    /// `permutation[i]` is the estimated column matched to true column `i`.
    pub permutation: Vec<usize>,
    /// Sign applied to that estimated column.
    pub signs: Vec<f64>,
    pub total_cost: f64,
}

impl ColumnMatching {
    /// Estimated matrix with columns reordered and sign-corrected so that
    /// column `i` lines up with true column `i`.
    pub fn align(&self, a_hat: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.permutation.len();
        DMatrix::from_fn(a_hat.nrows(), n, |r, i| {
            self.signs[i] * a_hat[(r, self.permutation[i])]
        })
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub frobenius_error: f64,
    pub amari_index: f64,
    pub matching: ColumnMatching,
    pub diagnostics: Option<OrthogonalityDiagnostics>,
}

fn check_pair(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() || a.shape() != a_hat.shape() {
        return Err(Error::InvalidInput(format!(
            "expected two equal square matrices, got {:?} and {:?}",
            a.shape(),
            a_hat.shape()
        )));
    }
    Ok(())
}

fn check_unit_columns(name: &str, m: &DMatrix<f64>) -> Result<()> {
    for (j, c) in m.column_iter().enumerate() {
        let norm = c.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::InvalidInput(format!(
                "column {j} of {name} has norm {norm}, expected 1"
            )));
        }
    }
    Ok(())
}

/// Minimum-cost perfect assignment on a square cost matrix given row-major.
/// Returns `assign[row] = column`. O(n³) shortest augmenting paths with
/// potentials.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    // 1-based with a virtual row/column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[owner[j] - 1] = j - 1;
    }
    assign
}

/// `min(‖a − â‖, ‖a + â‖)` and the sign attaining it (`+1` on ties).
fn signed_distance(a: &DMatrix<f64>, i: usize, a_hat: &DMatrix<f64>, j: usize) -> (f64, f64) {
    let mut minus = 0.0;
    let mut plus = 0.0;
    for r in 0..a.nrows() {
        let x = a[(r, i)];
        let y = a_hat[(r, j)];
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    if plus < minus {
        (plus.sqrt(), -1.0)
    } else {
        (minus.sqrt(), 1.0)
    }
}

/// Optimal sign-corrected column assignment between two matrices with unit
/// columns.
pub fn match_columns(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<ColumnMatching> {
    check_pair(a, a_hat)?;
    check_unit_columns("A", a)?;
    check_unit_columns("Â", a_hat)?;
    let n = a.ncols();
    let mut cost = vec![0.0; n * n];
    let mut sign = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (c, s) = signed_distance(a, i, a_hat, j);
            cost[i * n + j] = c;
            sign[i * n + j] = s;
        }
    }
    let permutation = hungarian(&cost, n);
    let signs: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| sign[i * n + j])
        .collect();
    let total_cost = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok(ColumnMatching {
        permutation,
        signs,
        total_cost,
    })
}

/// `‖A − Â_aligned‖_F`.
pub fn frobenius_error(a: &DMatrix<f64>, a_hat: &DMatrix<f64>, matching: &ColumnMatching) -> f64 {
    (a - matching.align(a_hat)).norm()
}

/// Amari index of `P = Â⁻¹A`, scaled to `[0, 1]`:
///
/// `(1 / 2n(n−1)) [Σᵢ (Σⱼ |Pᵢⱼ| / maxₖ |Pᵢₖ| − 1) + Σⱼ (Σᵢ |Pᵢⱼ| / maxₖ |Pₖⱼ| − 1)]`.
///
/// Zero exactly when `P` is a scaled permutation. Defined as 0 for n = 1.
pub fn amari_index(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<f64> {
    check_pair(a, a_hat)?;
    let inv = a_hat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("estimated mixing matrix is singular".into()))?;
    amari_of(&(inv * a))
}

/// The Amari index of a given `P`.
pub fn amari_of(p: &DMatrix<f64>) -> Result<f64> {
    let n = p.nrows();
    if !p.is_square() || n == 0 {
        return Err(Error::InvalidInput(
            "Amari index needs a nonempty square matrix".into(),
        ));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in P".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let abs = p.abs();
    let mut total = 0.0;
    for row in abs.row_iter() {
        let max = row.max();
        if max == 0.0 {
            return Err(Error::InvalidInput("P has a zero row".into()));
        }
        total += row.sum() / max - 1.0;
    }
    for col in abs.column_iter() {
        let max = col.max();
        if max == 0.0 {
            return Err(Error::InvalidInput("P has a zero column".into()));
        }
        total += col.sum() / max - 1.0;
    }
    Ok((total / (2.0 * n as f64 * (n as f64 - 1.0))).clamp(0.0, 1.0))
}

/// Matching, Frobenius error and Amari index in one go.
pub fn evaluate(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<RecoveryReport> {
    let matching = match_columns(a, a_hat)?;
    Ok(RecoveryReport {
        frobenius_error: frobenius_error(a, a_hat, &matching),
        amari_index: amari_index(a, a_hat)?,
        matching,
        diagnostics: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matches_itself() {
        let a = DMatrix::<f64>::identity(3, 3);
        let m = match_columns(&a, &a).unwrap();
        assert_eq!(m.permutation, vec![0, 1, 2]);
        assert_eq!(m.signs, vec![1.0; 3]);
        assert_eq!(m.total_cost, 0.0);
        assert_eq!(frobenius_error(&a, &a, &m), 0.0);
    }

    #[test]
    fn swapped_and_negated() {
        let a = DMatrix::<f64>::identity(2, 2);
        let a_hat = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let m = match_columns(&a, &a_hat).unwrap();
        assert_eq!(m.permutation, vec![1, 0]);
        assert_eq!(m.signs, vec![1.0, -1.0]);
        assert_eq!(frobenius_error(&a, &a_hat, &m), 0.0);
    }

    #[test]
    fn closer_column_wins() {
        // â₁ = (0.6, 0.8) is nearer e₂, â₂ = e₁
        let a = DMatrix::<f64>::identity(2, 2);
        let a_hat = DMatrix::from_column_slice(2, 2, &[0.6, 0.8, 1.0, 0.0]);
        let m = match_columns(&a, &a_hat).unwrap();
        assert_eq!(m.permutation, vec![1, 0]);
        // ‖e₂ − (0.6, 0.8)‖² = 0.36 + 0.04
        let e = frobenius_error(&a, &a_hat, &m);
        assert!((e - 0.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unit_columns() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = a.clone() * 2.0;
        assert!(match_columns(&a, &b).is_err());
    }

    #[test]
    fn amari_extremes() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert_eq!(amari_index(&a, &a).unwrap(), 0.0);
        let ones = DMatrix::from_element(4, 4, -2.5);
        assert_eq!(amari_of(&ones).unwrap(), 1.0);
        let singular = DMatrix::from_element(2, 2, 1.0);
        assert!(amari_index(&a.view((0, 0), (2, 2)).into(), &singular).is_err());
    }

    #[test]
    fn hungarian_small() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let assign = hungarian(&cost, 3);
        let total: f64 = assign
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i * 3 + j])
            .sum();
        assert_eq!(total, 5.0);
    }
}
