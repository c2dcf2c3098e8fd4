//! Pieces of the `vrpkit` binary that are worth testing on their own: the
//! exit-code taxonomy, the reference table and the benchmark runner.

pub mod bench;
pub mod exit;

pub use bench::{gap, parse_reference, run_bench, BenchConfig, BenchReport, BenchRow, RunRow};
pub use exit::Exit;
