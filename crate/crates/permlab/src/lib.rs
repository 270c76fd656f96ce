//! File formats and the reproduction driver behind the `permlab` binary.

pub mod io;
pub mod paper;
