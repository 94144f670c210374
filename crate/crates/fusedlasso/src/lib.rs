//! File formats, result documents, a threaded path driver, the benchmark
//! harness and the `fusedlasso` command line, on top of `fusedlasso-core`.

pub mod bench;
pub mod cli;
pub mod driver;
pub mod formats;
pub mod results;
