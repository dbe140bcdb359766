//! Numerical certification of upper bounds on the Berry-Esseen constant.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: exact arithmetic on finitely supported laws (moments,
//!   convolution, characteristic functions, Kolmogorov distance to the normal).
//! - [`zero_bias`]: the zero-bias transform of discrete laws, the exact mean
//!   metric between a law and its transform, and the three-point extremal
//!   analysis.
//! - [`bounds`]: special functions, the majorant `b(t, gamma)` and the
//!   characteristic-function bounds built on it.
//! - [`prawitz`]: the right-hand side of the Prawitz smoothing inequality.
//! - [`certify`]: parameter optimisation, bridged epsilon scans and the
//!   final constant report.
//!
//! [`quad`] and [`optim`] hold the numerical plumbing shared by the above.

pub mod bounds;
pub mod certify;
pub mod dist;
mod error;
pub mod optim;
pub mod prawitz;
pub mod quad;
pub mod zero_bias;

pub use error::{Error, Result};
