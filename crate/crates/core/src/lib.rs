//! Evaluation metrics for binary relevance, Bayes-optimal orderings, and the
//! regret-transfer bounds that relate pointwise, pairwise and listwise
//! metrics.

pub mod bayes;
pub mod error;
pub mod eval;
pub mod instance;
pub mod io;
pub mod metric;
pub mod psi;
pub mod rates;
pub mod sim;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
