//! Walk-forward reward-risk market timing: data ingestion, forecasters,
//! allocation, evaluation and attribution.

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN
// inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod explain;
pub mod learners;
pub mod market_data;
pub mod month;
pub mod simulate;
pub mod walkforward;

pub use error::{Error, Result};
pub use month::MonthStamp;
