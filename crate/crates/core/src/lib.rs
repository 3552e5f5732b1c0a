//! Dense linear-system solvers from the ABS class.
//!
//! The crate provides the general unscaled ABS recursion ([`general`]), its
//! implicit LU specialisations with and without pivoting ([`ilu`]), a
//! structure-exploiting Abaffian store ([`compact`]), an independent
//! Gaussian-elimination oracle with property checkers ([`oracle`]), test-matrix
//! generators ([`generate`]) and Matrix Market I/O ([`mmio`]).
//!
//! ```
//! use abs_core::{ilu_pivot_col, DenseMatrix, DenseVector, Tolerances};
//!
//! let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
//! let b = DenseVector::from([2.0, 3.0]);
//! let report = ilu_pivot_col(&a, &b, Tolerances::default()).unwrap();
//! assert!(report.is_success());
//! assert_eq!(report.solution.as_slice(), &[3.0, 2.0]);
//! ```

pub mod compact;
pub mod error;
pub mod general;
pub mod generate;
pub mod ilu;
pub mod linalg;
pub mod mmio;
pub mod oracle;
pub mod report;

pub use compact::{compact_update, CompactAbaffian};
pub use error::{AbsError, Result};
pub use general::{
    abaffian_update, abs_solve, abs_solve_implicit_lu, compatibility_check, search_vector,
    step_size, AbsOptions, AbsStep, AbsTrace, CustomStrategy, ImplicitLu, ParameterStrategy,
    StepContext,
};
pub use ilu::{ilu_a, ilu_pivot_col, ilu_pivot_row, IluTrace, Mode, Pivoting, SolveOptions};
pub use linalg::{dot, matvec, permutation_apply_inverse, DenseMatrix, DenseVector, Permutation};
pub use report::{
    nullspace_basis, solution_variety_sample, Abaffian, Outcome, PermutationKind, RowStatus,
    SolveReport, Tolerances, WorkCounter,
};
