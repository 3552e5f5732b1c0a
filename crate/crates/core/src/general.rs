//! The unscaled ABS recursion with caller-chosen parameters.
//!
//! Each equation `a_i^T x = b_i` is handled in turn:
//!
//! ```text
//! s_i   = H_i a_i,          tau_i = a_i^T x_i - b_i
//! p_i   = H_i^T z_i
//! x_i+1 = x_i - (tau_i / a_i^T p_i) p_i
//! H_i+1 = H_i - H_i a_i w_i^T H_i / (w_i^T H_i a_i)
//! ```
//!
//! A row with `s_i = 0` is a combination of earlier rows: it is skipped when
//! `tau_i = 0` and proves the system inconsistent otherwise.

use crate::error::{AbsError, Result};
use crate::linalg::{dot, dot_slices, matvec, matvec_transpose, DenseMatrix, DenseVector, Permutation};
use crate::report::{
    Abaffian, Outcome, PermutationKind, RowStatus, SolveReport, Tolerances, WorkCounter,
};

/// Where the recursion currently is, handed to a [`ParameterStrategy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepContext {
    /// 0-based equation index.
    pub row: usize,
    /// Independent rows processed before this one.
    pub processed: usize,
}

/// Supplies the search parameter `z_i` and the update parameter `w_i`.
///
/// The solver rejects choices with `z^T H a` or `w^T H a` at or below `ep1`.
pub trait ParameterStrategy {
    fn parameters(
        &mut self,
        ctx: StepContext,
        h: &DenseMatrix,
        a: &DenseVector,
    ) -> (DenseVector, DenseVector);
}

/// `z_i = w_i = e_k` with `k` the number of independent rows already
/// processed, i.e. the implicit LU choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct ImplicitLu;

impl ParameterStrategy for ImplicitLu {
    fn parameters(
        &mut self,
        ctx: StepContext,
        h: &DenseMatrix,
        _a: &DenseVector,
    ) -> (DenseVector, DenseVector) {
        let e = DenseVector::unit(h.rows(), ctx.processed.min(h.rows() - 1));
        (e.clone(), e)
    }
}

/// Wraps a closure as a strategy.
pub struct CustomStrategy<F>(pub F);

impl<F> ParameterStrategy for CustomStrategy<F>
where
    F: FnMut(StepContext, &DenseMatrix, &DenseVector) -> (DenseVector, DenseVector),
{
    fn parameters(
        &mut self,
        ctx: StepContext,
        h: &DenseMatrix,
        a: &DenseVector,
    ) -> (DenseVector, DenseVector) {
        (self.0)(ctx, h, a)
    }
}

/// `H - (H a)(w^T H) / (w^T H a)`. The result annihilates `a`.
pub fn abaffian_update(
    h: &DenseMatrix,
    a: &DenseVector,
    w: &DenseVector,
    ep1: f64,
) -> Result<DenseMatrix> {
    let n = h.rows();
    if h.cols() != n {
        return Err(AbsError::dim("abaffian_update (square H)", n, h.cols()));
    }
    let ha = matvec(h, a)?;
    let wth = matvec_transpose(h, w)?;
    let denom = dot(w, &ha)?;
    if denom.abs() <= ep1 {
        return Err(AbsError::DegenerateUpdate {
            row: 0,
            value: denom,
        });
    }
    let mut out = h.clone();
    rank_one_downdate(&mut out, &ha, &wth, denom);
    Ok(out)
}

fn rank_one_downdate(h: &mut DenseMatrix, ha: &DenseVector, wth: &DenseVector, denom: f64) {
    for j in 0..h.rows() {
        let f = ha[j] / denom;
        for (v, c) in h.row_mut(j).iter_mut().zip(wth.iter()) {
            *v -= f * c;
        }
    }
}

/// `p = H^T z`.
pub fn search_vector(h: &DenseMatrix, z: &DenseVector) -> Result<DenseVector> {
    matvec_transpose(h, z)
}

/// `alpha = tau / a^T p`.
pub fn step_size(tau: f64, a: &DenseVector, p: &DenseVector) -> Result<f64> {
    let ap = dot(a, p)?;
    if ap == 0.0 {
        return Err(AbsError::DegenerateStep);
    }
    Ok(tau / ap)
}

/// Classifies a row from `s = H a` and `tau = a^T x - b`.
pub fn compatibility_check(s: &DenseVector, tau: f64, tol: Tolerances) -> RowStatus {
    if s.norm2() > tol.ep1() {
        RowStatus::Solved
    } else {
        classify_vanishing_row(tau, tol)
    }
}

/// Dependent or incompatible, for a row whose `s` vanished.
pub(crate) fn classify_vanishing_row(tau: f64, tol: Tolerances) -> RowStatus {
    if tau.abs() <= tol.ep2() {
        RowStatus::Dependent
    } else {
        RowStatus::Incompatible
    }
}

/// Per-equation record.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsStep {
    pub row: usize,
    pub status: RowStatus,
    pub s: DenseVector,
    pub tau: f64,
    /// `a^T p`; only for solved rows.
    pub denominator: Option<f64>,
    pub alpha: Option<f64>,
    pub p: Option<DenseVector>,
    pub w: Option<DenseVector>,
}

#[derive(Debug, Clone, Default)]
pub struct AbsTrace {
    pub steps: Vec<AbsStep>,
    /// `H` after each processed equation, when requested.
    pub h_snapshots: Vec<DenseMatrix>,
}

impl AbsTrace {
    /// `P = (p_1, ..., p_t)` over the solved rows.
    pub fn p_matrix(&self, n: usize) -> DenseMatrix {
        let cols: Vec<DenseVector> = self.steps.iter().filter_map(|s| s.p.clone()).collect();
        DenseMatrix::from_columns(n, &cols).expect("search vectors have length n")
    }

    /// `W = (w_1, ..., w_t)` over the solved rows, stored as rows.
    pub fn w_rows(&self, n: usize) -> DenseMatrix {
        let ws: Vec<&[f64]> = self
            .steps
            .iter()
            .filter_map(|s| s.w.as_ref().map(|w| w.as_slice()))
            .collect();
        if ws.is_empty() {
            return DenseMatrix::zeros(0, n);
        }
        DenseMatrix::from_rows(&ws).expect("parameters have length n")
    }

    pub fn solved_rows(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| s.status == RowStatus::Solved)
            .map(|s| s.row)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AbsOptions {
    /// Keep a copy of `H` after every equation (`O(m n^2)` memory).
    pub record_h: bool,
}

/// Runs the ABS recursion from `x1`, `H1`.
pub fn abs_solve(
    a: &DenseMatrix,
    b: &DenseVector,
    strategy: &mut dyn ParameterStrategy,
    x1: &DenseVector,
    h1: &DenseMatrix,
    tol: Tolerances,
    opts: AbsOptions,
) -> Result<(SolveReport, AbsTrace)> {
    run(a, b, strategy, x1, h1, tol, opts, false)
}

/// With `breakdown_is_outcome`, a vanishing `z^T s` or `w^T s` on a solved row
/// ends the solve with [`Outcome::SingularPrincipalMinor`] instead of an error.
#[allow(clippy::too_many_arguments)]
fn run(
    a: &DenseMatrix,
    b: &DenseVector,
    strategy: &mut dyn ParameterStrategy,
    x1: &DenseVector,
    h1: &DenseMatrix,
    tol: Tolerances,
    opts: AbsOptions,
    breakdown_is_outcome: bool,
) -> Result<(SolveReport, AbsTrace)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(AbsError::Param("empty coefficient matrix".into()));
    }
    if b.len() != m {
        return Err(AbsError::dim("abs_solve (rhs length)", m, b.len()));
    }
    if x1.len() != n {
        return Err(AbsError::dim("abs_solve (x1 length)", n, x1.len()));
    }
    if h1.shape() != (n, n) {
        return Err(AbsError::dim("abs_solve (H1 size)", n, h1.rows()));
    }

    let mut x = x1.clone();
    let mut h = h1.clone();
    let mut status = vec![RowStatus::Pending; m];
    let mut trace = AbsTrace::default();
    let mut work = WorkCounter::default();
    let mut outcome = Outcome::Success;
    let mut processed = 0;
    let nn = (n * n) as u64;

    for i in 0..m {
        let ai = a.row_vector(i);
        let s = matvec(&h, &ai)?;
        let tau = dot_slices(ai.as_slice(), x.as_slice()) - b[i];
        let row_status = compatibility_check(&s, tau, tol);
        status[i] = row_status;

        let mut step = AbsStep {
            row: i,
            status: row_status,
            s: s.clone(),
            tau,
            denominator: None,
            alpha: None,
            p: None,
            w: None,
        };
        match row_status {
            RowStatus::Dependent => {
                trace.steps.push(step);
                if opts.record_h {
                    trace.h_snapshots.push(h.clone());
                }
                continue;
            }
            RowStatus::Incompatible => {
                trace.steps.push(step);
                outcome = Outcome::Incompatible { row: i };
                break;
            }
            _ => {}
        }

        let ctx = StepContext { row: i, processed };
        let (z, w) = strategy.parameters(ctx, &h, &ai);
        if z.len() != n || w.len() != n {
            return Err(AbsError::dim("strategy parameters", n, z.len().min(w.len())));
        }
        let zs = dot(&z, &s)?;
        let ws = dot(&w, &s)?;
        let breakdown = [zs, ws].into_iter().find(|v| v.abs() <= tol.ep1());
        if let Some(value) = breakdown {
            if !breakdown_is_outcome {
                return Err(AbsError::DegenerateUpdate { row: i, value });
            }
            status[i] = RowStatus::Singular;
            step.status = RowStatus::Singular;
            trace.steps.push(step);
            outcome = Outcome::SingularPrincipalMinor { row: i };
            break;
        }

        let p = search_vector(&h, &z)?;
        let alpha = step_size(tau, &ai, &p).map_err(|_| AbsError::DegenerateUpdate {
            row: i,
            value: 0.0,
        })?;
        for (xv, pv) in x.as_mut_slice().iter_mut().zip(p.iter()) {
            *xv -= alpha * pv;
        }
        work.x_update_mults += n as u64;
        work.divisions += 1;

        let wth = matvec_transpose(&h, &w)?;
        rank_one_downdate(&mut h, &s, &wth, ws);
        work.h_update_mults += nn;
        work.h_update_writes += nn;
        work.divisions += n as u64;
        processed += 1;

        step.denominator = Some(dot(&ai, &p)?);
        step.alpha = Some(alpha);
        step.p = Some(p);
        step.w = Some(w);
        trace.steps.push(step);
        if opts.record_h {
            trace.h_snapshots.push(h.clone());
        }
    }

    let report = SolveReport {
        solution: x,
        rank: processed,
        row_status: status,
        permutation: Permutation::identity(n),
        permutation_kind: PermutationKind::Identity,
        mult_count: work.mult_count(),
        work,
        nullspace_dim: n - processed,
        outcome,
        abaffian: Abaffian::Dense(h),
    };
    Ok((report, trace))
}

/// [`abs_solve`] with `x1 = 0`, `H1 = I` and the implicit LU parameters.
///
/// A zero pivot means a singular leading principal minor of the independent
/// rows and is reported as [`Outcome::SingularPrincipalMinor`].
pub fn abs_solve_implicit_lu(
    a: &DenseMatrix,
    b: &DenseVector,
    tol: Tolerances,
) -> Result<(SolveReport, AbsTrace)> {
    let n = a.cols();
    run(
        a,
        b,
        &mut ImplicitLu,
        &DenseVector::zeros(n),
        &DenseMatrix::identity(n),
        tol,
        AbsOptions::default(),
        true,
    )
}
