//! File formats, model backends, report rendering and the command line
//! around `verse-eval-core`.

pub mod acquire;
pub mod cli;
pub mod config;
pub mod exec;
pub mod formats;
mod http;
pub mod providers;
pub mod report;
mod svg;
