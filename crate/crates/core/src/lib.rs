//! Heavy-tailed independent component analysis.
//!
//! The estimator runs in three stages:
//!
//! 1. compute an orthogonalizer `B` so that `BA` has nearly orthogonal
//!    columns ([`orthogonalize`]), either from the empirical covariance or
//!    by rescaling every sample through the gauge of the empirical centroid
//!    body ([`centroid`]);
//! 2. multiply the samples by `B`;
//! 3. apply Gaussian damping ([`damping`]) and run FastICA ([`ica`]).
//!
//! [`sampling`] produces synthetic heavy-tailed instances, [`eval`] scores
//! recovered mixing matrices, and [`harness`] drives sample-size sweeps and
//! writes CSV tables.
//!
//! ```
//! use htica::sampling::{IcaInstance, MixingKind, TailExponents};
//! use htica::orthogonalize::orthogonalize_covariance;
//!
//! let eta = TailExponents::new(vec![6.0, 6.0, 2.1]).unwrap();
//! let instance = IcaInstance::random(eta, MixingKind::RandomUnitColumns, 7).unwrap();
//! let x = instance.generate(2_000).unwrap();
//! let b = orthogonalize_covariance(&x).unwrap();
//! let diag = b.diagnostics(instance.mixing());
//! assert!(diag.condition_number >= 1.0);
//! ```

// index loops mirror the matrix notation; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod centroid;
pub mod damping;
pub mod error;
pub mod eval;
pub mod harness;
pub mod ica;
pub mod io;
pub mod linalg;
pub mod orthogonalize;
pub mod sampling;

pub use error::{Error, Result};
pub use sampling::SampleMatrix;
