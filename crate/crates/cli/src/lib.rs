//! Experiment files, CSV traces and batch sweeps for `walkbench`.

pub mod commands;
pub mod experiment;
pub mod output;
pub mod sweep;
