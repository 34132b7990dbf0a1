//! Experiment harness, file formats and the command-line driver for
//! [`liouville_core`].

pub mod certificate;
pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod output;

pub use error::{LabError, Result};
pub use liouville_core as core;
