//! Monte Carlo oracle, file formats and command-line front end for
//! `fxcredit-core`.

pub mod cli;
pub mod io;
pub mod simulation;
