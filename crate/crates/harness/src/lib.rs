//! IO, file formats, synthetic ensembles and experiment drivers around
//! the `pwrc-core` fitting kernel, plus the `pwrc` command-line tool.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod io;
pub mod model_file;
pub mod synthetic;

pub use error::{HarnessError, Result};
