pub mod broadcast;
pub mod cj;
pub mod correlations;
pub mod error;
pub mod ontic;
pub mod quantum;
pub mod scalar;
pub mod theory;
pub mod uncertainty;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Theory64 = theory::OperationalTheory<f64>;
pub type ExactTheory = theory::OperationalTheory<Exact>;
pub type Box64 = correlations::CorrelationBox<f64>;
pub type ExactBox = correlations::CorrelationBox<Exact>;
pub type OnticModel64 = ontic::OnticModel<f64>;
pub type ExactOnticModel = ontic::OnticModel<Exact>;
