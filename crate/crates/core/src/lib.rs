//! Equivalent martingale measures and option-price stability bounds for
//! exponential Lévy models.

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod levy;
pub mod measure_change;
pub mod pricing;
pub mod quadrature;
pub mod roots;

pub use error::{Error, Result};
