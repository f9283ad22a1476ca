//! File formats, session storage, the HTTP service and the command-line
//! front end of the screening engine. The computations themselves live in
//! `fairscreen_core`.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod docs;
pub mod error;
pub mod eventlog;
pub mod service;
pub mod synth;

pub use error::{Error, Result};
