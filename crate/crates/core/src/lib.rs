//! Mesoscopic EPR steering analysis.
//!
//! Quantifies delta-scopic EPR steering from analytic Gaussian states or
//! empirical measurement records, and certifies lower bounds on the boson
//! content of two-mode entangled states from the Duan variance parameter.
//!
//! Module map:
//! - [`distributions`]: binned joint distributions, conditional moments,
//!   inference variances, and the delta-inflated variance.
//! - [`gaussian`]: the analytic two-mode Gaussian engine (squeezed states,
//!   loss channels, closed-form steering and Duan parameters, sampling).
//! - [`steering`]: the delta-scopic criterion layer (thresholds, critical
//!   delta, Schwinger-spin normalization).
//! - [`fock`]: truncated number-basis engine for boson-number certification.
//! - [`simulate`]: Monte Carlo record generation, including the linearized
//!   Schwinger-spin counting readout.
//! - [`io`]: the record CSV schema and sidecar metadata.

pub mod distributions;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod simulate;
pub mod steering;

pub use error::{Error, Result};

/// Tool version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
