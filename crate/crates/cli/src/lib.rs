//! File formats and report schema for the command-line interface.

pub mod input;
pub mod report;
