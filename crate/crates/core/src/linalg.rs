//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Inverse square root of a symmetric positive-definite matrix together with
/// its smallest eigenvalue.
///
/// Computed as `V diag(λ^(-1/2)) Vᵀ`, so the result is symmetric. Returns
/// `Err(min_eigenvalue)` when the smallest eigenvalue is at or below `floor`.
pub fn inverse_sqrt_spd(c: &DMatrix<f64>, floor: f64) -> Result<(DMatrix<f64>, f64), f64> {
    let sym = symmetrize(c);
    let eig = SymmetricEigen::new(sym);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min > floor) {
        return Err(min);
    }
    let scales = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let b = v * DMatrix::from_diagonal(&scales) * v.transpose();
    Ok((symmetrize(&b), min))
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Copy of `m` with every column scaled to unit Euclidean norm. Zero columns
/// are left untouched.
pub fn normalize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// Symmetric decorrelation `(W Wᵀ)^(-1/2) W`, mapping `W` to the nearest
/// orthogonal matrix.
pub fn symmetric_decorrelation(w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let wwt = w * w.transpose();
    inverse_sqrt_spd(&wwt, 0.0).ok().map(|(s, _)| s * w)
}

/// Max-abs entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_sqrt_of_diagonal() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 0.25]));
        let (b, min) = inverse_sqrt_spd(&c, 1e-12).unwrap();
        assert!((b[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((b[(1, 1)] - 2.0).abs() < 1e-14);
        assert_eq!(min, 0.25);
    }

    #[test]
    fn inverse_sqrt_rejects_singular() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(inverse_sqrt_spd(&c, 1e-12).is_err());
    }

    #[test]
    fn inverse_sqrt_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DMatrix::from_fn(5, 5, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c = &g * g.transpose() + DMatrix::identity(5, 5) * 0.1;
        let (b, _) = inverse_sqrt_spd(&c, 1e-12).unwrap();
        let back = (&b * &b).try_inverse().unwrap();
        assert!((back - &c).norm() / c.norm() < 1e-10);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_orthogonal(6, &mut rng);
        let err = (q.transpose() * &q - DMatrix::identity(6, 6)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn decorrelation_gives_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = DMatrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let o = symmetric_decorrelation(&w).unwrap();
        assert!((&o * o.transpose() - DMatrix::identity(4, 4)).norm() < 1e-10);
    }
}
