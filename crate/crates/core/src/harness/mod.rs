//! Instance generation, file formats and the experiment runner.

pub mod bench;
pub mod gen;
pub mod io;
