//! Operational quasiprobability (OQ) work statistics for small closed quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmath`]: dense complex operators, Hermitian eigendecomposition, matrix
//!   exponentials, Gibbs states, entropies and coherence measures.
//! - [`schemes`]: POVMs, channels in the Heisenberg picture, and the end-point,
//!   two-point and weak two-point measurement statistics.
//! - [`quasiprob`]: the OQ (closed form and inverse-Fourier construction), the
//!   Kirkwood-Dirac and Margenau-Hill quasiprobabilities, negativity.
//! - [`thermo`]: work moments, Jarzynski-type relations and coherence bounds.
//! - [`jointmeas`]: binary qubit POVMs, Busch's criterion and classical
//!   work-extraction bounds.
//! - [`scenarios`]: the driven qubit and the three-level NV-centre sweeps.
//! - [`suite`]: the invariant suites behind `oqwork check` and the acceptance tests.
//!
//! Units: `ħ = k_B = 1` throughout.

#![forbid(unsafe_code)]

pub mod error;
pub mod jointmeas;
pub mod qmath;
pub mod quasiprob;
pub mod random;
pub mod scenarios;
pub mod schemes;
pub mod suite;
pub mod table;
pub mod thermo;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use qmath::{DensityState, Operator, SpectralDecomp, Vec3};
pub use schemes::{Channel, JointDist, Povm};
pub use table::{DistKind, KdqDist, QuasiDist};
