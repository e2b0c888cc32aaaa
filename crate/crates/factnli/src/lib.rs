//! File formats, checkpoints, remote dataset generation and the command-line
//! front end for `factnli-core`.

pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod io;
pub mod remote;
pub mod report;

pub use error::{Error, Result};
