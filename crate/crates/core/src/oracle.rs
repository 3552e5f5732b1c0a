//! Reference solver and property checkers.
//!
//! Nothing here shares code with the implicit LU driver: the oracle is plain
//! Gaussian elimination with partial pivoting on an augmented copy.

use std::fmt;

use crate::error::{AbsError, Result};
use crate::linalg::{matvec, norm2, DenseMatrix, DenseVector};

/// Relative pivot threshold used by the oracle's rank decisions.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GaussOutcome {
    /// Full row rank; for `m < n` this is the basic solution.
    Solved(DenseVector),
    /// Consistent but rank-deficient; free variables are zero.
    RankDeficient { rank: usize, basic: DenseVector },
    Incompatible { rank: usize },
}

impl GaussOutcome {
    pub fn solution(&self) -> Option<&DenseVector> {
        match self {
            GaussOutcome::Solved(x) | GaussOutcome::RankDeficient { basic: x, .. } => Some(x),
            GaussOutcome::Incompatible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussStats {
    pub rank: usize,
    /// Largest over smallest pivot magnitude; a cheap conditioning proxy.
    pub pivot_ratio: f64,
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &DenseMatrix, b: &DenseVector) -> Result<GaussOutcome> {
    gauss_solve_with_stats(a, b).map(|(o, _)| o)
}

pub fn gauss_solve_with_stats(
    a: &DenseMatrix,
    b: &DenseVector,
) -> Result<(GaussOutcome, GaussStats)> {
    let (m, n) = a.shape();
    if m > n {
        return Err(AbsError::dim("gauss_solve (rows must not exceed cols)", n, m));
    }
    if b.len() != m {
        return Err(AbsError::dim("gauss_solve (rhs length)", m, b.len()));
    }
    let thresh = RANK_THRESHOLD * a.norm_inf();
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    let pivots = echelon(&mut rows, n, thresh);
    let rank = pivots.len();

    let b_scale = 1.0 + b.norm_inf();
    let consistent = rows[rank..]
        .iter()
        .all(|r| r[n].abs() <= 1e-8 * b_scale);

    let (pmax, pmin) = pivots.iter().enumerate().fold((0.0f64, f64::INFINITY), |(hi, lo), (r, &c)| {
        let v = rows[r][c].abs();
        (hi.max(v), lo.min(v))
    });
    let stats = GaussStats {
        rank,
        pivot_ratio: if rank == 0 { f64::INFINITY } else { pmax / pmin },
    };
    if !consistent {
        return Ok((GaussOutcome::Incompatible { rank }, stats));
    }

    let mut x = vec![0.0; n];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let row = &rows[r];
        let mut acc = row[n];
        for (j, xj) in x.iter().enumerate().skip(c + 1) {
            acc -= row[j] * xj;
        }
        x[c] = acc / row[c];
    }
    let x = DenseVector::from(x);
    let outcome = if rank == m {
        GaussOutcome::Solved(x)
    } else {
        GaussOutcome::RankDeficient { rank, basic: x }
    };
    Ok((outcome, stats))
}

/// Row echelon form in place over the first `ncols` columns; returns pivot
/// columns in row order.
fn echelon(rows: &mut [Vec<f64>], ncols: usize, thresh: f64) -> Vec<usize> {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let (p, best) = (r..m)
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if best <= thresh {
            for row in rows[r..].iter_mut() {
                row[c] = 0.0;
            }
            continue;
        }
        rows.swap(r, p);
        let (top, rest) = rows.split_at_mut(r + 1);
        let piv = &top[r];
        for row in rest.iter_mut() {
            let f = row[c] / piv[c];
            if f == 0.0 {
                continue;
            }
            row[c] = 0.0;
            for j in c + 1..piv.len() {
                row[j] -= f * piv[j];
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Numerical rank with pivot threshold `1e-10 * ||A||_inf`.
pub fn rank_oracle(a: &DenseMatrix) -> usize {
    let mut rows: Vec<Vec<f64>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    echelon(&mut rows, a.cols(), RANK_THRESHOLD * a.norm_inf()).len()
}

/// `||A x - b||_2`.
pub fn residual_norm(a: &DenseMatrix, x: &DenseVector, b: &DenseVector) -> Result<f64> {
    let ax = matvec(a, x)?;
    if b.len() != ax.len() {
        return Err(AbsError::dim("residual_norm", ax.len(), b.len()));
    }
    Ok(ax.sub(b)?.norm2())
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub context: String,
}

impl PropertyReport {
    fn new(name: &str, passed: bool, max_violation: f64, context: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            max_violation,
            context,
        }
    }

    /// Copy with extra context appended.
    pub fn with_context(mut self, extra: impl fmt::Display) -> Self {
        if self.context.is_empty() {
            self.context = extra.to_string();
        } else {
            self.context = format!("{}; {extra}", self.context);
        }
        self
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} (max violation {:.3e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_violation,
            self.context
        )
    }
}

/// `A_indep P` must be lower triangular with a nonzero diagonal, both judged
/// relative to its largest entry.
pub fn check_implicit_factorization(
    a_indep: &DenseMatrix,
    p: &DenseMatrix,
    tol_struct: f64,
) -> Result<PropertyReport> {
    if a_indep.cols() != p.rows() {
        return Err(AbsError::dim("check_implicit_factorization", a_indep.cols(), p.rows()));
    }
    if a_indep.rows() != p.cols() {
        return Err(AbsError::dim("check_implicit_factorization", a_indep.rows(), p.cols()));
    }
    let l = a_indep.matmul(p)?;
    let t = l.rows();
    let scale = l.max_abs();
    let mut upper = 0.0f64;
    let mut diag_min = f64::INFINITY;
    for i in 0..t {
        diag_min = diag_min.min(l.get(i, i).abs());
        for j in i + 1..t {
            upper = upper.max(l.get(i, j).abs());
        }
    }
    let rel = if scale > 0.0 { upper / scale } else { 0.0 };
    let diag_ok = t == 0 || diag_min > tol_struct * scale;
    Ok(PropertyReport::new(
        "implicit factorization",
        rel <= tol_struct && diag_ok,
        rel,
        format!("t={t}, min |diag|={diag_min:.3e}, scale={scale:.3e}"),
    ))
}

/// Rows `0..i` exactly zero and the trailing `(n-i) x (n-i)` block exactly `I`.
pub fn check_abaffian_structure(h: &DenseMatrix, i: usize) -> PropertyReport {
    let n = h.rows();
    let mut worst = 0.0f64;
    if i > n || h.cols() != n {
        return PropertyReport::new(
            "abaffian structure",
            false,
            f64::INFINITY,
            format!("bad shape {}x{} for i={i}", h.rows(), h.cols()),
        );
    }
    for r in 0..i {
        for v in h.row(r) {
            worst = worst.max(v.abs());
        }
    }
    for r in i..n {
        for c in i..n {
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((h.get(r, c) - want).abs());
        }
    }
    PropertyReport::new("abaffian structure", worst == 0.0, worst, format!("n={n}, i={i}"))
}

/// `H a_k = 0` for each processed row (relative to `||a_k||`) and
/// `H^T w_k = 0` for each used `w_k`. Both inputs hold one vector per row.
pub fn check_nullspace_relations(
    h_next: &DenseMatrix,
    processed_rows: &DenseMatrix,
    used_w: &DenseMatrix,
    tol_struct: f64,
) -> Result<PropertyReport> {
    let n = h_next.rows();
    if processed_rows.rows() > 0 && processed_rows.cols() != n {
        return Err(AbsError::dim("check_nullspace_relations", n, processed_rows.cols()));
    }
    if used_w.rows() > 0 && used_w.cols() != n {
        return Err(AbsError::dim("check_nullspace_relations", n, used_w.cols()));
    }
    let ht = h_next.transpose();
    let mut worst = 0.0f64;
    for k in 0..processed_rows.rows() {
        let a = processed_rows.row_vector(k);
        let na = a.norm2();
        let ha = matvec(h_next, &a)?.norm2();
        worst = worst.max(if na > 0.0 { ha / na } else { ha });
    }
    for k in 0..used_w.rows() {
        let w = used_w.row_vector(k);
        worst = worst.max(norm2(matvec(&ht, &w)?.as_slice()));
    }
    Ok(PropertyReport::new(
        "null space relations",
        worst <= tol_struct,
        worst,
        format!(
            "n={n}, rows={}, w={}",
            processed_rows.rows(),
            used_w.rows()
        ),
    ))
}

/// Each column `p_i` has `p_i[i] == 1` and `p_i[j] == 0` for `j > i`, exactly.
pub fn check_unit_upper_triangular(p: &DenseMatrix) -> PropertyReport {
    let mut worst = 0.0f64;
    for c in 0..p.cols() {
        if c < p.rows() {
            worst = worst.max((p.get(c, c) - 1.0).abs());
        }
        for r in c + 1..p.rows() {
            worst = worst.max(p.get(r, c).abs());
        }
    }
    PropertyReport::new(
        "unit upper triangular P",
        worst == 0.0,
        worst,
        format!("{}x{}", p.rows(), p.cols()),
    )
}
