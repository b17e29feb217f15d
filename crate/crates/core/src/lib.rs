pub mod csv_io;
pub mod error;
pub mod fixtures;
pub mod mapper;
pub mod persistence;
pub mod pipeline;
pub mod representative;
pub mod synthgen;
pub mod types;
pub mod union_find;

pub use error::{Error, Result};
