//! File formats, model catalog, benchmark harness and command line support
//! for `rkfda-core`.

pub mod bench;
pub mod catalog;
pub mod error;
pub mod io;
pub mod model_file;
pub mod plan;

pub use error::{Error, Result};
