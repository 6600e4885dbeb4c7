//! Files, configuration, dataset evaluation and the command line around
//! [`dermsal_core`].

pub mod cli;
pub mod config;
pub mod dataset;
mod error;
pub mod evaluate;
pub mod io;
pub mod overlay;
pub mod synthetic;

pub use dermsal_core as core;
pub use error::{AppError, Result};
