//! Library side of the `abs` command: run configuration, single solves,
//! the benchmark grid and the verification suites.

pub mod bench;
pub mod run;
pub mod verify;

pub use bench::run_benchmark;
pub use run::{
    run_solve, Algorithm, BenchRecord, Generator, MatrixSource, RhsSource, RunConfig, SolveRun,
};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const INCOMPATIBLE: i32 = 2;
    pub const SINGULAR_MINOR: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

/// Diagnostic printed when a system has no solution.
pub const NO_SOLUTION: &str = "No Solution";
