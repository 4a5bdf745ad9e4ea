//! File formats, condition checks and subcommands behind the `symctl`
//! binary.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod formats;
pub mod model;
pub mod trace;
