//! Reference-free gender bias evaluation for Hindi to English machine translation.
//!
//! The pipeline has four stages, each reading and writing plain files:
//! generate source sentences, translate them with a backend, classify the
//! English output by its pronouns, and score the results for one suite.

pub mod backends;
pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod lists;
pub mod metrics;
pub mod report;
pub mod templates;

pub use error::{Error, Result};
