//! Exact computations with probability distributions on the field of p-adic numbers.

pub mod characters;
pub mod cli;
pub mod error;
pub mod independence;
pub mod measure;
pub mod oracle;
pub mod padic;
pub mod theorem;

pub use error::{Error, Result};
