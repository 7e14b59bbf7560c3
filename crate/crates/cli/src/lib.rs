//! Command-line front end for the planner: scenario and result files,
//! batch benchmarks, the brute-force oracle and SVG rendering.

pub mod bench;
pub mod cli;
pub mod oracle;
pub mod render;
pub mod result;
pub mod scenario;

pub use cli::run;
