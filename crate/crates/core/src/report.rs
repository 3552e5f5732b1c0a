//! Tolerances, per-row statuses and the solve report shared by every solver.

use std::fmt;

use crate::compact::CompactAbaffian;
use crate::error::{AbsError, Result};
use crate::linalg::{DenseMatrix, DenseVector, Permutation};

/// Dependency (`ep1`) and residual (`ep2`) control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    ep1: f64,
    ep2: f64,
}

impl Tolerances {
    pub const DEFAULT_EP: f64 = 1.0e-7;

    pub fn new(ep1: f64, ep2: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(ep1) || !ok(ep2) {
            return Err(AbsError::InvalidTolerance { ep1, ep2 });
        }
        Ok(Self { ep1, ep2 })
    }

    /// Threshold below which `s_i` counts as zero.
    pub fn ep1(&self) -> f64 {
        self.ep1
    }

    /// Threshold below which the residual `tau_i` counts as zero.
    pub fn ep2(&self) -> f64 {
        self.ep2
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ep1: Self::DEFAULT_EP,
            ep2: Self::DEFAULT_EP,
        }
    }
}

/// What happened to one equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    /// Independent row, used to update `x` and `H`.
    Solved,
    /// Linear combination of earlier rows with a consistent right-hand side; skipped.
    Dependent,
    /// Linear combination of earlier rows with an inconsistent right-hand side. Stops the solve.
    Incompatible,
    /// Nonzero `s_i` but a vanishing pivot. Stops the solve.
    Singular,
    /// Never reached because the solve stopped earlier.
    Pending,
}

/// How a solve ended. Row indices are 0-based positions in the caller's `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Incompatible { row: usize },
    SingularPrincipalMinor { row: usize },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Success => write!(f, "success"),
            Outcome::Incompatible { row } => write!(f, "incompatible at row {row}"),
            Outcome::SingularPrincipalMinor { row } => {
                write!(f, "singular principal minor at row {row}")
            }
        }
    }
}

/// Which index set the report's permutation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationKind {
    Identity,
    Columns,
    Rows,
}

/// Instrumented operation counts for one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounter {
    /// Multiplications performed while updating the Abaffian.
    pub h_update_mults: u64,
    /// Abaffian entries written by the updates.
    pub h_update_writes: u64,
    /// Multiplications performed while updating the solution estimate.
    pub x_update_mults: u64,
    /// Divisions across both updates.
    pub divisions: u64,
}

impl WorkCounter {
    pub fn mult_count(&self) -> u64 {
        self.h_update_mults + self.x_update_mults
    }
}

/// Final Abaffian, in the solver's working variable order.
#[derive(Debug, Clone)]
pub enum Abaffian {
    Compact(CompactAbaffian),
    Dense(DenseMatrix),
}

impl Abaffian {
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Abaffian::Compact(c) => c.to_dense(),
            Abaffian::Dense(h) => h.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Abaffian::Compact(c) => c.n(),
            Abaffian::Dense(h) => h.rows(),
        }
    }
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solution in the caller's variable order.
    pub solution: DenseVector,
    /// Number of independent rows processed.
    pub rank: usize,
    /// One entry per equation, in the caller's row order.
    pub row_status: Vec<RowStatus>,
    pub permutation: Permutation,
    pub permutation_kind: PermutationKind,
    /// Multiplications in the `H` and `x` updates.
    pub mult_count: u64,
    pub work: WorkCounter,
    pub nullspace_dim: usize,
    pub outcome: Outcome,
    pub abaffian: Abaffian,
}

impl SolveReport {
    pub fn is_success(&self) -> bool {
        self.outcome.is_success()
    }

    pub fn n(&self) -> usize {
        self.solution.len()
    }

    pub fn dependent_rows(&self) -> Vec<usize> {
        self.rows_with(RowStatus::Dependent)
    }

    pub fn solved_rows(&self) -> Vec<usize> {
        self.rows_with(RowStatus::Solved)
    }

    fn rows_with(&self, status: RowStatus) -> Vec<usize> {
        self.row_status
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == status)
            .map(|(i, _)| i)
            .collect()
    }

    /// Column interchanges applied to the variables (identity unless column pivoting).
    pub fn column_permutation(&self) -> Permutation {
        match self.permutation_kind {
            PermutationKind::Columns => self.permutation.clone(),
            _ => Permutation::identity(self.n()),
        }
    }

    /// The final Abaffian in the caller's variable order.
    pub fn final_h(&self) -> DenseMatrix {
        let work = self.abaffian.to_dense();
        if self.permutation_kind != PermutationKind::Columns {
            return work;
        }
        let map = self.permutation.as_slice();
        let n = work.rows();
        let mut h = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                h.set(map[r], map[c], work.get(r, c));
            }
        }
        h
    }

    /// Null-space basis of `A`, one column per unused slot, in the caller's
    /// variable order. Built from the compact `K` block when available.
    pub fn nullspace(&self) -> Result<DenseMatrix> {
        self.require_success()?;
        match &self.abaffian {
            Abaffian::Compact(c) => {
                let perm = self.column_permutation();
                let cols = (c.processed()..c.n())
                    .map(|slot| perm.apply_inverse(&c.h_row(slot)))
                    .collect::<Result<Vec<_>>>()?;
                DenseMatrix::from_columns(c.n(), &cols)
            }
            Abaffian::Dense(_) => nullspace_basis(self, &self.final_h()),
        }
    }

    /// `x + H^T q` for this report's solution and final Abaffian.
    pub fn sample_solution(&self, q: &DenseVector) -> Result<DenseVector> {
        solution_variety_sample(&self.solution, &self.final_h(), q)
    }

    pub(crate) fn require_success(&self) -> Result<()> {
        if !self.is_success() {
            return Err(AbsError::State(format!(
                "null space requested from a failed solve ({})",
                self.outcome
            )));
        }
        Ok(())
    }
}

/// Columns spanning the null space of `A`, read off the rows of the final
/// Abaffian that were never eliminated. `final_h` must be in the caller's
/// variable order (as returned by [`SolveReport::final_h`]).
pub fn nullspace_basis(report: &SolveReport, final_h: &DenseMatrix) -> Result<DenseMatrix> {
    report.require_success()?;
    let n = report.n();
    if final_h.rows() != n || final_h.cols() != n {
        return Err(AbsError::dim("nullspace_basis", n, final_h.rows()));
    }
    let perm = report.column_permutation();
    let active: Vec<usize> = match &report.abaffian {
        Abaffian::Compact(c) => (c.processed()..n).map(|s| perm.as_slice()[s]).collect(),
        // General ABS runs have no slot structure.
        Abaffian::Dense(_) => independent_rows(final_h, report.nullspace_dim),
    };
    let cols: Vec<DenseVector> = active.iter().map(|&r| final_h.row_vector(r)).collect();
    DenseMatrix::from_columns(n, &cols)
}

/// Greedily picks up to `count` rows of `h` that are numerically independent,
/// largest residual norm first (modified Gram-Schmidt on copies).
fn independent_rows(h: &DenseMatrix, count: usize) -> Vec<usize> {
    let n = h.rows();
    let mut residual: Vec<Vec<f64>> = (0..n).map(|r| h.row(r).to_vec()).collect();
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let (best, norm) = (0..n)
            .filter(|r| !picked.contains(r))
            .map(|r| (r, crate::linalg::norm2(&residual[r])))
            .fold((usize::MAX, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best == usize::MAX || norm <= 1e-10 * scale {
            break;
        }
        picked.push(best);
        let q: Vec<f64> = residual[best].iter().map(|v| v / norm).collect();
        for (r, row) in residual.iter_mut().enumerate() {
            if picked.contains(&r) {
                continue;
            }
            let c = crate::linalg::dot_slices(row, &q);
            for (v, qv) in row.iter_mut().zip(&q) {
                *v -= c * qv;
            }
        }
    }
    picked.sort_unstable();
    picked
}

/// A point `x + H^T q` on the solution variety.
pub fn solution_variety_sample(
    x: &DenseVector,
    final_h: &DenseMatrix,
    q: &DenseVector,
) -> Result<DenseVector> {
    let n = x.len();
    if final_h.rows() != n || final_h.cols() != n {
        return Err(AbsError::dim("solution_variety_sample", n, final_h.rows()));
    }
    if q.len() != n {
        return Err(AbsError::dim("solution_variety_sample", n, q.len()));
    }
    let ht_q = crate::linalg::matvec_transpose(final_h, q)?;
    Ok(x.iter().zip(ht_q.iter()).map(|(a, b)| a + b).collect())
}
