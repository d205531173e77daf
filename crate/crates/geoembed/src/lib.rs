//! File formats, pipeline orchestration and command-line front end for
//! geo-aware image embeddings.

pub mod cli;
pub mod error;
pub mod export;
pub mod features;
pub mod formats;
pub mod parallel;
pub mod pipeline;
pub mod records;
pub mod synth;

pub use error::{Error, Result};
