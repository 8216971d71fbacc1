//! Std runtime around `scalowork-core`: a rayon-backed executor, a wall
//! clock, the graph/solution/block file formats, a directory-backed
//! instance store, scenario configs, CSV reports, the benchmark harness and
//! the `scalowork` command-line tool.

pub mod bench;
pub mod cli;
pub mod clock;
pub mod config;
pub mod exec;
pub mod io;
pub mod report;
pub mod scenario;
pub mod store;

pub use clock::SystemClock;
pub use exec::RayonExecutor;
pub use scalowork_core as core;
