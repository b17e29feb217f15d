//! Command-line and HTTP front ends for the stream-of-quality pipeline.

pub mod config;
pub mod error;
pub mod run;
pub mod service;

pub use config::RunConfig;
pub use error::{ErrorBody, Result, SoqError};
