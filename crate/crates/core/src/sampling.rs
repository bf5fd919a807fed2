//! Synthetic heavy-tailed ICA instances.
//!
//! Every source coordinate is drawn from the symmetric density
//! `f_η(x) ∝ (|x| + 1.5)^(-η)`, which has finite moments only of order
//! below `η - 1`. Draws use the closed-form inverse of the tail
//! `P(|X| > x) = ((x + 1.5) / 1.5)^(1 - η)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;

/// Location offset of the heavy-tailed source density.
pub const DENSITY_OFFSET: f64 = 1.5;

const MIXING_DET_FLOOR: f64 = 1e-8;
const MIXING_ATTEMPTS: usize = 100;

/// N × n matrix of observations, one sample per row, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    dim: usize,
}

impl SampleMatrix {
    /// Wraps row-major `data` with `dim` columns. Every entry must be finite
    /// and there must be at least one row.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "sample dimension must be positive".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} values do not split into rows of length {dim}",
                data.len()
            )));
        }
        if data.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry in row {}",
                pos / dim
            )));
        }
        Ok(SampleMatrix { data, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, dim)
    }

    /// Number of samples N.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Dimension n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// The first `count` rows (all rows if `count >= len`).
    pub fn head(&self, count: usize) -> SampleMatrix {
        let count = count.clamp(1, self.len());
        SampleMatrix {
            data: self.data[..count * self.dim].to_vec(),
            dim: self.dim,
        }
    }

    /// Applies `x ↦ M x` to every row.
    pub fn transform(&self, m: &DMatrix<f64>) -> SampleMatrix {
        assert_eq!(m.ncols(), self.dim, "matrix/sample dimension mismatch");
        let out_dim = m.nrows();
        let mut data = Vec::with_capacity(self.len() * out_dim);
        for row in self.rows() {
            for i in 0..out_dim {
                let mut acc = 0.0;
                for (k, v) in row.iter().enumerate() {
                    acc += m[(i, k)] * v;
                }
                data.push(acc);
            }
        }
        SampleMatrix { data, dim: out_dim }
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> SampleMatrix {
        SampleMatrix {
            data: self.data.iter().map(|v| v * c).collect(),
            dim: self.dim,
        }
    }

    /// `(1/N) Σ x xᵀ`, the uncentered scatter matrix.
    pub fn scatter(&self) -> DMatrix<f64> {
        let n = self.dim;
        let mut c = DMatrix::zeros(n, n);
        for row in self.rows() {
            for i in 0..n {
                let ri = row[i];
                for j in i..n {
                    c[(i, j)] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                c[(i, j)] = c[(j, i)];
            }
        }
        c / self.len() as f64
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// FNV-1a over the bit patterns, used to check that pipelines share data.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.data {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// Component-wise tail exponents η; every entry exceeds 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TailExponents(Vec<f64>);

impl TailExponents {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::InvalidParameter(
                "tail exponent vector is empty".into(),
            ));
        }
        if let Some(bad) = eta.iter().find(|&&e| !(e > 1.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tail exponent {bad} must be finite and > 1"
            )));
        }
        Ok(TailExponents(eta))
    }

    pub fn uniform(n: usize, eta: f64) -> Result<Self> {
        Self::new(vec![eta; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every component has a finite first absolute moment.
    pub fn has_finite_mean(&self) -> bool {
        self.0.iter().all(|&e| e > 2.0)
    }
}

/// `E|X| = 1.5 / (η - 2)` for `X ~ f_η`, finite only for η > 2.
pub fn first_absolute_moment(eta: f64) -> Option<f64> {
    (eta > 2.0).then(|| DENSITY_OFFSET / (eta - 2.0))
}

/// Magnitude at uniform level `v ∈ (0, 1]`: `1.5 (v^(-1/(η-1)) - 1)`.
pub fn magnitude_from_uniform(eta: f64, v: f64) -> f64 {
    DENSITY_OFFSET * (v.powf(-1.0 / (eta - 1.0)) - 1.0)
}

/// One draw from `f_η` by inverse transform with an independent fair sign.
pub fn sample_component<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> Result<f64> {
    if !(eta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail exponent {eta} must be > 1"
        )));
    }
    Ok(draw(eta, rng))
}

#[inline]
fn draw<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> f64 {
    // random() is in [0, 1); flip it to (0, 1]
    let v = 1.0 - rng.random::<f64>();
    let m = magnitude_from_uniform(eta, v);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

/// Seeded substream `stream` of the generator for `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a master seed with a list of tags into a child seed (SplitMix64
/// finalizer applied per tag).
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    tags.iter().fold(mix(master), |acc, &t| {
        mix(acc ^ mix(t.wrapping_add(0x632b_e59b_d9b4_e019)))
    })
}

/// Standard-normal entries with every column scaled to unit length; redrawn
/// while `|det| < 1e-8`.
pub fn generate_mixing_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    for _ in 0..MIXING_ATTEMPTS {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let a = linalg::normalize_columns(&g);
        if a.determinant().abs() >= MIXING_DET_FLOOR {
            return Ok(a);
        }
    }
    Err(Error::DegenerateMatrix {
        attempts: MIXING_ATTEMPTS,
    })
}

/// How an instance's mixing matrix is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingKind {
    RandomUnitColumns,
    Orthogonal,
}

/// Ground truth of the model `X = AS`.
#[derive(Debug, Clone)]
pub struct IcaInstance {
    mixing: DMatrix<f64>,
    eta: TailExponents,
    seed: u64,
    normalize_first_moment: bool,
}

impl IcaInstance {
    pub fn new(mixing: DMatrix<f64>, eta: TailExponents, seed: u64) -> Result<Self> {
        if !mixing.is_square() || mixing.nrows() != eta.len() {
            return Err(Error::InvalidParameter(format!(
                "mixing matrix is {}x{} but η has {} entries",
                mixing.nrows(),
                mixing.ncols(),
                eta.len()
            )));
        }
        if mixing.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "mixing matrix has non-finite entries".into(),
            ));
        }
        if mixing.determinant().abs() <= MIXING_DET_FLOOR {
            return Err(Error::InvalidParameter("mixing matrix is singular".into()));
        }
        Ok(IcaInstance {
            mixing,
            eta,
            seed,
            normalize_first_moment: false,
        })
    }

    /// Draws the mixing matrix from stream 0 of `seed`.
    pub fn random(eta: TailExponents, kind: MixingKind, seed: u64) -> Result<Self> {
        let mut rng = substream(seed, 0);
        let n = eta.len();
        let mixing = match kind {
            MixingKind::RandomUnitColumns => generate_mixing_matrix(n, &mut rng)?,
            MixingKind::Orthogonal => linalg::random_orthogonal(n, &mut rng),
        };
        Self::new(mixing, eta, seed)
    }

    /// Rescale every source to `E|S_i| = 1` (requires every η > 2).
    pub fn with_normalized_first_moment(mut self, on: bool) -> Result<Self> {
        if on && !self.eta.has_finite_mean() {
            return Err(Error::InvalidParameter(
                "first-moment normalization needs every η > 2".into(),
            ));
        }
        self.normalize_first_moment = on;
        Ok(self)
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub fn eta(&self) -> &TailExponents {
        &self.eta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn normalize_first_moment(&self) -> bool {
        self.normalize_first_moment
    }

    /// Latent sources S, N × n. Component `i` reads stream `i + 1` of the
    /// instance seed, so a larger N extends a smaller one.
    pub fn sources(&self, n_samples: usize) -> Result<SampleMatrix> {
        if n_samples == 0 {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        let n = self.dim();
        let mut data = vec![0.0; n_samples * n];
        for (i, &eta) in self.eta.as_slice().iter().enumerate() {
            let scale = if self.normalize_first_moment {
                first_absolute_moment(eta).map(|m| 1.0 / m).ok_or_else(|| {
                    Error::InvalidParameter(format!("η = {eta} has no finite mean"))
                })?
            } else {
                1.0
            };
            let mut rng = substream(self.seed, i as u64 + 1);
            for k in 0..n_samples {
                data[k * n + i] = draw(eta, &mut rng) * scale;
            }
        }
        SampleMatrix::new(data, n)
    }

    /// Observations `x = A s`, N × n.
    pub fn generate(&self, n_samples: usize) -> Result<SampleMatrix> {
        Ok(self.sources(n_samples)?.transform(&self.mixing))
    }
}

/// Observations from `instance`; see [`IcaInstance::generate`].
pub fn generate_ica_data(instance: &IcaInstance, n_samples: usize) -> Result<SampleMatrix> {
    instance.generate(n_samples)
}

/// Pairwise differences `x₂ₖ − x₂ₖ₊₁`, which are symmetric whenever the rows
/// are i.i.d. An odd final row is dropped.
pub fn symmetrize(samples: &SampleMatrix) -> Result<SampleMatrix> {
    let got = samples.len();
    if got < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got });
    }
    let n = samples.dim();
    let mut data = Vec::with_capacity(got / 2 * n);
    for k in 0..got / 2 {
        let a = samples.row(2 * k);
        let b = samples.row(2 * k + 1);
        data.extend(a.iter().zip(b).map(|(x, y)| x - y));
    }
    SampleMatrix::new(data, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnitude_at_one_is_zero() {
        for eta in [1.5, 2.0, 6.0] {
            assert_eq!(magnitude_from_uniform(eta, 1.0), 0.0);
        }
    }

    #[test]
    fn magnitude_median_eta_two() {
        assert!((magnitude_from_uniform(2.0, 0.5) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_eta_at_most_one() {
        let mut rng = substream(1, 0);
        assert!(matches!(
            sample_component(1.0, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
        assert!(TailExponents::new(vec![2.0, 0.5]).is_err());
        assert!(TailExponents::new(vec![]).is_err());
    }

    #[test]
    fn one_dimensional_mixing_is_sign() {
        for seed in 0..20 {
            let a = generate_mixing_matrix(1, &mut substream(seed, 0)).unwrap();
            assert_eq!(a[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn mixing_columns_unit_norm() {
        for seed in 0..20 {
            let a = generate_mixing_matrix(7, &mut substream(seed, 0)).unwrap();
            for c in a.column_iter() {
                assert!((c.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixing_determinant_floor() {
        for seed in 0..100 {
            let a = generate_mixing_matrix(10, &mut substream(seed, 0)).unwrap();
            assert!(a.determinant().abs() >= 1e-8);
        }
    }

    #[test]
    fn identity_mixing_returns_raw_source() {
        let eta = TailExponents::new(vec![3.0, 4.0]).unwrap();
        let inst = IcaInstance::new(DMatrix::identity(2, 2), eta, 9).unwrap();
        let x = inst.generate(1).unwrap();
        let s = inst.sources(1).unwrap();
        assert_eq!(x, s);
        let mut r0 = substream(9, 1);
        assert_eq!(x.row(0)[0], sample_component(3.0, &mut r0).unwrap());
    }

    #[test]
    fn normalization_requires_finite_mean() {
        let eta = TailExponents::new(vec![6.0, 2.0]).unwrap();
        let inst = IcaInstance::random(eta, MixingKind::RandomUnitColumns, 1).unwrap();
        assert!(inst.with_normalized_first_moment(true).is_err());
    }

    #[test]
    fn symmetrize_pairs() {
        let x =
            SampleMatrix::from_rows(&[[1.0, 2.0], [0.5, 0.5], [3.0, -1.0], [1.0, 1.0]]).unwrap();
        let y = symmetrize(&x).unwrap();
        assert_eq!(y.as_slice(), &[0.5, 1.5, 2.0, -2.0]);

        let same = SampleMatrix::from_rows(&[[1.25, -3.0], [1.25, -3.0]]).unwrap();
        assert_eq!(symmetrize(&same).unwrap().as_slice(), &[0.0, 0.0]);

        let one = SampleMatrix::from_rows(&[[1.0]]).unwrap();
        assert!(matches!(
            symmetrize(&one),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn sample_matrix_validation() {
        assert!(SampleMatrix::new(vec![1.0, f64::NAN], 2).is_err());
        assert!(SampleMatrix::new(vec![], 2).is_err());
        assert!(SampleMatrix::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(42, &[0, 1]);
        let b = derive_seed(42, &[1, 0]);
        let c = derive_seed(43, &[0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, &[0, 1]));
    }
}
