//! Discharge-summary section extraction, summary-quality metrics, and
//! dynamic expert selection over multiple model outputs.

pub mod analysis;
pub mod corpus;
pub mod des;
pub mod error;
pub mod exec;
pub mod readability;
pub mod relevance;
pub mod reorder;
pub mod scores;
pub mod textprep;

pub use error::{Error, Result};
pub use exec::Execution;
