//! Secure near-field integrated sensing and communication.
//!
//! The crate designs hybrid analog/digital beamfocusers for a base station that
//! serves `K` single-antenna users with rate-splitting multiple access while a
//! sensed target doubles as an eavesdropper. The common stream manages
//! interference, jams the eavesdropper and acts as the sensing probe; the
//! design maximizes the minimum secrecy rate subject to angle and range
//! Cramér–Rao bounds.
//!
//! Module map:
//!
//! * [`geometry`] : array geometry, spherical-wavefront channels, sensing matrices.
//! * [`rates`] : received powers, SINRs, secrecy rates, feasibility residuals.
//! * [`crb`] : Fisher information, joint and closed-form CRBs, Hermitian splitting.
//! * [`conic`] : conic program representation and the interior-point backend.
//! * [`inner`] : the fully digital subproblem (WMMSE, quadratic transform, CRB surrogates).
//! * [`bcd`] : the penalty-based block coordinate descent driver.
//! * [`schemes`] : the proposed design and its four benchmarks.
//! * [`harness`] : scenario sampling, parameter sweeps and CSV output.
//! * [`verify`] : independent numerical oracles used by `nfisac verify` and the tests.

// Negated comparisons are deliberate: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bcd;
pub mod conic;
pub mod crb;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod inner;
pub mod linalg;
pub mod rates;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
