//! Learning `k` hypotheses that jointly serve `n` data distributions.

pub mod bits;
pub mod classes;
pub mod data;
pub mod erm;
pub mod error;
pub mod formats;
pub mod graph;
pub mod harness;
pub mod learners;
pub mod par;
pub mod realizable;
pub mod reductions;
pub mod rng;
pub mod vcdim;

pub use error::{Error, Result};
