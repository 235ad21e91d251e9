//! File formats, output emission, run configuration and the acceptance
//! suite for `threebundle-core`, plus the command implementations behind the
//! `threebundle` binary.

pub mod config;
pub mod output;
pub mod textfmt;
pub mod verify;
pub mod commands;
pub mod error;
