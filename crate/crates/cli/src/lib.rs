//! Verification suites and the 1D solver behind the `logeuler` binary.

pub mod commands;
pub mod config;
pub mod report;
