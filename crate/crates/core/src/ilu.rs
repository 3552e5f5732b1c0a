//! Implicit LU solvers: no pivoting, column pivoting and row pivoting.
//!
//! All three share one driver. `t` counts the independent rows processed so
//! far; the next independent row is eliminated against slot `t`, so rows
//! found dependent do not consume a variable slot. On a system without
//! dependent rows `t` equals the iteration index and the recursion is the
//! textbook `H_1 = I`, `z_i = w_i = e_i` choice.

use crate::compact::{AbaffianStore, CompactAbaffian, ExplicitAbaffian};
use crate::error::{AbsError, Result};
use crate::general::classify_vanishing_row;
use crate::linalg::{dot_slices, norm2, DenseMatrix, DenseVector, Permutation};
use crate::report::{Outcome, PermutationKind, RowStatus, SolveReport, Tolerances, WorkCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivoting {
    None,
    Column,
    Row,
}

/// How the Abaffian is stored during the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Only the `K` block, `O(n m)` storage.
    #[default]
    Compact,
    /// Full `n x n` matrix with the rank-one update applied everywhere.
    Explicit,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Keep search vectors and (in explicit mode) every intermediate `H`.
    pub record_trace: bool,
}

/// One independent row as it was eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Row index in the caller's `A`.
    pub row: usize,
    /// Slot the row was eliminated against.
    pub slot: usize,
    /// Denominator `d = s[slot]`.
    pub denominator: f64,
    /// Row pivoting only: the winning `(e_t^T H) a` candidate value.
    pub pivot_dot: Option<f64>,
}

/// Optional per-solve diagnostics.
#[derive(Debug, Clone, Default)]
pub struct IluTrace {
    pub steps: Vec<StepRecord>,
    /// Search vectors `p_i` in working (pivot-adjusted) variable order.
    pub search_vectors: Vec<DenseVector>,
    /// `H` after each independent row, explicit mode only.
    pub h_snapshots: Vec<DenseMatrix>,
}

impl IluTrace {
    /// The search vectors as the columns of an `n x t` matrix.
    pub fn p_matrix(&self, n: usize) -> DenseMatrix {
        DenseMatrix::from_columns(n, &self.search_vectors).expect("search vectors have length n")
    }
}

/// Implicit LU without pivoting. Requires every leading principal minor of
/// the independent rows to be nonsingular.
pub fn ilu_a(a: &DenseMatrix, b: &DenseVector, tol: Tolerances) -> Result<SolveReport> {
    solve(a, b, tol, Pivoting::None, SolveOptions::default()).map(|(r, _)| r)
}

/// Implicit LU with column pivoting; the solution is returned in the
/// caller's variable order.
pub fn ilu_pivot_col(a: &DenseMatrix, b: &DenseVector, tol: Tolerances) -> Result<SolveReport> {
    solve(a, b, tol, Pivoting::Column, SolveOptions::default()).map(|(r, _)| r)
}

/// Implicit LU with row pivoting. `A` and `b` are copied, not reordered in place.
pub fn ilu_pivot_row(a: &DenseMatrix, b: &DenseVector, tol: Tolerances) -> Result<SolveReport> {
    solve(a, b, tol, Pivoting::Row, SolveOptions::default()).map(|(r, _)| r)
}

/// Runs one of the implicit LU variants with explicit options.
pub fn solve(
    a: &DenseMatrix,
    b: &DenseVector,
    tol: Tolerances,
    pivoting: Pivoting,
    opts: SolveOptions,
) -> Result<(SolveReport, Option<IluTrace>)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(AbsError::Param("empty coefficient matrix".into()));
    }
    if m > n {
        return Err(AbsError::dim("ilu (rows must not exceed cols)", n, m));
    }
    if b.len() != m {
        return Err(AbsError::dim("ilu (rhs length)", m, b.len()));
    }
    match opts.mode {
        Mode::Compact => run(a, b, tol, pivoting, opts, CompactAbaffian::new(n, m)),
        Mode::Explicit => run(a, b, tol, pivoting, opts, ExplicitAbaffian::new(n)),
    }
}

fn run<S: AbaffianStore>(
    a: &DenseMatrix,
    b: &DenseVector,
    tol: Tolerances,
    pivoting: Pivoting,
    opts: SolveOptions,
    mut store: S,
) -> Result<(SolveReport, Option<IluTrace>)> {
    let (m, n) = a.shape();
    let mut work_a = a.clone();
    let mut rhs = b.clone();
    let mut x = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut cols = Permutation::identity(n);
    let mut rows = Permutation::identity(m);
    let mut status = vec![RowStatus::Pending; m];
    let mut work = WorkCounter::default();
    let mut trace = opts.record_trace.then(IluTrace::default);
    let mut outcome = Outcome::Success;

    for i in 0..m {
        let t = store.processed();

        let mut best_dot = None;
        if pivoting == Pivoting::Row {
            let mut best = -1.0;
            let mut k = i;
            for j in i..m {
                let v = store.pivot_dot(work_a.row(j));
                if best < v.abs() {
                    best = v.abs();
                    k = j;
                }
            }
            if k != i {
                work_a.swap_rows(i, k)?;
                rhs.swap(i, k);
                rows.swap(i, k);
            }
            best_dot = Some(store.pivot_dot(work_a.row(i)));
        }
        let orig_row = rows.as_slice()[i];

        store.apply(work_a.row(i), &mut s);
        let r = dot_slices(work_a.row(i), &x) - rhs[i];

        if pivoting == Pivoting::Column && t < n {
            let mut best = -1.0;
            let mut k = t;
            for (j, v) in s.iter().enumerate().skip(t) {
                if best < v.abs() {
                    best = v.abs();
                    k = j;
                }
            }
            if k != t {
                debug_assert!(x[t] == 0.0 && x[k] == 0.0);
                work_a.swap_cols(t, k)?;
                s.swap(t, k);
                x.swap(t, k);
                store.swap_slots(t, k);
                cols.swap(t, k);
            }
        }

        // The dependency test differs per variant:
        // 2-norm of s without pivoting, the best pivot magnitude otherwise.
        let active = &s[t.min(n)..];
        let measure = match pivoting {
            Pivoting::None => norm2(active),
            Pivoting::Column => active.first().map_or(0.0, |v| v.abs()),
            Pivoting::Row => best_dot.unwrap_or(0.0).abs(),
        };
        let mut row_status = if measure <= tol.ep1() {
            // Row pivoting found no usable pivot; only call the row dependent
            // if s itself vanishes.
            if pivoting == Pivoting::Row && norm2(active) > tol.ep1() {
                RowStatus::Singular
            } else {
                classify_vanishing_row(r, tol)
            }
        } else {
            RowStatus::Solved
        };
        if row_status == RowStatus::Solved && s[t].abs() <= tol.ep1() {
            row_status = RowStatus::Singular;
        }

        status[orig_row] = row_status;
        match row_status {
            RowStatus::Dependent => continue,
            RowStatus::Incompatible => {
                outcome = Outcome::Incompatible { row: orig_row };
                break;
            }
            RowStatus::Singular => {
                outcome = Outcome::SingularPrincipalMinor { row: orig_row };
                break;
            }
            RowStatus::Pending => unreachable!("classification never yields Pending"),
            RowStatus::Solved => {}
        }

        let d = s[t];
        let h_t = store.pivot_row();
        let step = r / d;
        for (xc, hc) in x.iter_mut().zip(&h_t) {
            *xc -= step * hc;
        }
        work.x_update_mults += h_t.len() as u64;
        work.divisions += 1;
        debug_assert!(x[t + 1..].iter().all(|v| *v == 0.0));

        if let Some(tr) = trace.as_mut() {
            let mut p = DenseVector::zeros(n);
            p.as_mut_slice()[..=t].copy_from_slice(&h_t);
            tr.search_vectors.push(p);
            tr.steps.push(StepRecord {
                row: orig_row,
                slot: t,
                denominator: d,
                pivot_dot: best_dot,
            });
        }

        store.update(&s, d, tol.ep1(), &mut work)?;

        if let Some(tr) = trace.as_mut() {
            if opts.mode == Mode::Explicit {
                tr.h_snapshots.push(store.snapshot());
            }
        }
    }

    let rank = store.processed();
    let (permutation, permutation_kind) = match pivoting {
        Pivoting::None => (cols, PermutationKind::Identity),
        Pivoting::Column => (cols, PermutationKind::Columns),
        Pivoting::Row => (rows, PermutationKind::Rows),
    };
    let solution = match permutation_kind {
        PermutationKind::Columns => permutation.apply_inverse(&x.into())?,
        _ => x.into(),
    };
    let report = SolveReport {
        solution,
        rank,
        row_status: status,
        permutation,
        permutation_kind,
        mult_count: work.mult_count(),
        work,
        nullspace_dim: n - rank,
        outcome,
        abaffian: store.into_abaffian(),
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn mf3() -> DenseMatrix {
        mat(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]])
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_systems() {
        let r = ilu_a(&DenseMatrix::identity(2), &[1.0, 2.0].into(), tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.solution.as_slice(), &[1.0, 2.0]);
        assert_eq!(r.rank, 2);
        assert!(r.permutation.is_identity());

        let b = DenseVector::from([4.0, 5.0, 6.0]);
        for piv in [Pivoting::Column, Pivoting::Row] {
            let (r, _) = solve(&DenseMatrix::identity(3), &b, tol(), piv, Default::default())
                .unwrap();
            assert_eq!(r.solution, b);
            assert!(r.permutation.is_identity());
        }
    }

    #[test]
    fn zero_leading_minor() {
        let a = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = DenseVector::from([2.0, 3.0]);
        let r = ilu_a(&a, &b, tol()).unwrap();
        assert_eq!(r.outcome, Outcome::SingularPrincipalMinor { row: 0 });
        assert_eq!(r.row_status, vec![RowStatus::Singular, RowStatus::Pending]);

        let r = ilu_a(&mf3(), &[1.0, 2.0, 3.0].into(), tol()).unwrap();
        assert_eq!(r.outcome, Outcome::SingularPrincipalMinor { row: 0 });
    }

    #[test]
    fn column_pivot_restores_order() {
        let a = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = ilu_pivot_col(&a, &[2.0, 3.0].into(), tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.solution.as_slice(), &[3.0, 2.0]);
        assert_eq!(r.permutation.as_slice(), &[1, 0]);
        assert_eq!(r.permutation_kind, PermutationKind::Columns);
    }

    #[test]
    fn row_pivot_swaps_equations() {
        let a = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = ilu_pivot_row(&a, &[2.0, 3.0].into(), tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.solution.as_slice(), &[3.0, 2.0]);
        assert_eq!(r.permutation.as_slice(), &[1, 0]);
        assert_eq!(r.permutation_kind, PermutationKind::Rows);
    }

    #[test]
    fn row_pivot_rank_one_pair() {
        let a = mat(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let r = ilu_pivot_row(&a, &[1.0, 2.0].into(), tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.rank, 1);
        assert_eq!(r.nullspace_dim, 1);
        // The larger pivot wins, so row 1 is eliminated and row 0 is dependent.
        assert_eq!(r.dependent_rows(), vec![0]);
        assert_eq!(r.solution.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn mf3_pivoted_variants_match_hand_solution() {
        let b = DenseVector::from([1.0, 2.0, 3.0]);
        for piv in [Pivoting::Column, Pivoting::Row] {
            let (r, _) = solve(&mf3(), &b, tol(), piv, Default::default()).unwrap();
            assert!(r.is_success(), "{piv:?}");
            for (got, want) in r.solution.iter().zip([1.5, 0.0, 0.5]) {
                assert!((got - want).abs() < 1e-12, "{piv:?}: {got} vs {want}");
            }
        }
        // Reordered to a regular matrix, the unpivoted variant also works.
        let regular = mat(&[&[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0], &[0.0, 1.0, 2.0]]);
        let r = ilu_a(&regular, &[2.0, 3.0, 1.0].into(), tol()).unwrap();
        assert!(r.is_success());
        for (got, want) in r.solution.iter().zip([1.5, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_and_incompatible_rows() {
        let a = mat(&[&[1.0, 0.0], &[1.0, 0.0]]);
        for piv in [Pivoting::None, Pivoting::Column, Pivoting::Row] {
            let (ok, _) = solve(&a, &[1.0, 1.0].into(), tol(), piv, Default::default()).unwrap();
            assert!(ok.is_success());
            assert_eq!(ok.rank, 1);
            assert_eq!(ok.solution.as_slice(), &[1.0, 0.0]);

            let (bad, _) = solve(&a, &[1.0, 2.0].into(), tol(), piv, Default::default()).unwrap();
            assert_eq!(bad.outcome, Outcome::Incompatible { row: 1 }, "{piv:?}");
            assert_eq!(bad.row_status[1], RowStatus::Incompatible);
        }
    }

    #[test]
    fn dependent_row_does_not_consume_a_slot() {
        // Without slot tracking the third row would be reported incompatible.
        let a = mat(&[&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let b = DenseVector::from([1.0, 1.0, 5.0]);
        let r = ilu_a(&a, &b, tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.rank, 2);
        assert_eq!(r.solution.as_slice(), &[1.0, 5.0, 0.0]);
        let basis = r.nullspace().unwrap();
        assert_eq!(basis.shape(), (3, 1));
        assert_eq!(basis.column(0).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn row_pivot_flags_unusable_column() {
        // 0*x1 + x2 = 1 is solvable, but no row interchange creates a pivot
        // in the first column.
        let a = mat(&[&[0.0, 1.0]]);
        let r = ilu_pivot_row(&a, &[1.0].into(), tol()).unwrap();
        assert_eq!(r.outcome, Outcome::SingularPrincipalMinor { row: 0 });
        let r = ilu_pivot_col(&a, &[1.0].into(), tol()).unwrap();
        assert!(r.is_success());
        assert_eq!(r.solution.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn underdetermined_nullspace() {
        let a = mat(&[&[1.0, 0.0, 0.0]]);
        let r = ilu_a(&a, &[5.0].into(), tol()).unwrap();
        assert_eq!(r.solution.as_slice(), &[5.0, 0.0, 0.0]);
        let basis = r.nullspace().unwrap();
        assert_eq!(basis.shape(), (3, 2));
        assert_eq!(basis.column(0).as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(basis.column(1).as_slice(), &[0.0, 0.0, 1.0]);
        let via_h = crate::report::nullspace_basis(&r, &r.final_h()).unwrap();
        assert_eq!(via_h, basis);
    }

    #[test]
    fn square_nonsingular_has_empty_nullspace() {
        let a = mat(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let r = ilu_pivot_col(&a, &[1.0, 2.0].into(), tol()).unwrap();
        let basis = r.nullspace().unwrap();
        assert_eq!(basis.shape(), (2, 0));
        assert_eq!(r.final_h(), DenseMatrix::zeros(2, 2));
        let q = DenseVector::from([3.0, -7.0]);
        assert_eq!(r.sample_solution(&q).unwrap(), r.solution);
    }

    #[test]
    fn failed_solve_has_no_nullspace() {
        let a = mat(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let r = ilu_a(&a, &[1.0, 2.0].into(), tol()).unwrap();
        assert!(matches!(r.nullspace(), Err(AbsError::State(_))));
        assert!(matches!(
            crate::report::nullspace_basis(&r, &r.final_h()),
            Err(AbsError::State(_))
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        let tall = DenseMatrix::zeros(3, 2);
        assert!(matches!(
            ilu_a(&tall, &DenseVector::zeros(3), tol()),
            Err(AbsError::Dimension { .. })
        ));
        assert!(ilu_a(&DenseMatrix::identity(2), &DenseVector::zeros(3), tol()).is_err());
    }

    #[test]
    fn caller_inputs_untouched() {
        let a = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = DenseVector::from([2.0, 3.0]);
        let (a0, b0) = (a.clone(), b.clone());
        ilu_pivot_row(&a, &b, tol()).unwrap();
        ilu_pivot_col(&a, &b, tol()).unwrap();
        assert_eq!((a, b), (a0, b0));
    }

    #[test]
    fn square_work_count_closed_form() {
        let n = 12;
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { n as f64 } else { 1.0 / (1 + i + j) as f64 });
        let b = DenseVector::from_iter((0..n).map(|k| k as f64 + 1.0));
        let r = ilu_a(&a, &b, tol()).unwrap();
        let n64 = n as u64;
        assert_eq!(r.work.h_update_mults, (n64.pow(3) - n64) / 6);
        assert_eq!(r.work.x_update_mults, n64 * (n64 + 1) / 2);
        assert_eq!(r.mult_count, r.work.h_update_mults + r.work.x_update_mults);
    }
}
