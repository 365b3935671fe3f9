//! Kummer-function series solutions of the double-confluent Heun equation
//!
//! ```text
//! z²u″ + (εz² + γz + δ)u′ + (αz − q)u = 0
//! ```
//!
//! The crate derives recurrence relations for expansions in ₁F₁ functions,
//! generates and sums the series, computes accessory-parameter spectra for
//! terminating solutions, and checks everything against direct numerical
//! integration.

pub mod cli;
pub mod error;
pub mod expansions;
pub mod oracle;
pub mod poly;
pub mod recurrence;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod special;
pub mod termination;

pub use error::{Error, Result};
pub use scalar::{Complex, Rational, Scalar};
