//! Library side of the `padic-lab` experiment runner: configuration
//! parsing, grid runs and the verification suite.

pub mod config;
pub mod runs;
pub mod suite;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
