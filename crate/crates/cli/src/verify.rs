//! Self-checks run by `abs verify` and by the acceptance suite.

use abs_core::generate::{gen_micchelli_fiedler, gen_rank_deficient, random_matrix, random_vector, rhs_index, rng};
use abs_core::ilu::solve;
use abs_core::oracle::{
    check_abaffian_structure, check_implicit_factorization, check_nullspace_relations,
    check_unit_upper_triangular, gauss_solve_with_stats, rank_oracle, residual_norm,
    GaussOutcome, PropertyReport,
};
use abs_core::{
    abs_solve_implicit_lu, DenseMatrix, DenseVector, Mode, Pivoting, Result, SolveOptions,
    Tolerances,
};

pub const PIVOTINGS: [Pivoting; 3] = [Pivoting::None, Pivoting::Column, Pivoting::Row];

fn report(name: &str, passed: bool, max_violation: f64, context: String) -> PropertyReport {
    PropertyReport {
        name: name.to_string(),
        passed,
        max_violation,
        context,
    }
}

/// Folds many per-system reports into one line per property name.
pub fn summarize(name: &str, reports: &[PropertyReport]) -> PropertyReport {
    let worst = reports
        .iter()
        .map(|r| r.max_violation)
        .fold(0.0f64, f64::max);
    let failures: Vec<&PropertyReport> = reports.iter().filter(|r| !r.passed).collect();
    let mut context = format!("{} checks, {} failed", reports.len(), failures.len());
    if let Some(first) = failures.first() {
        context.push_str(&format!("; first failure: {}", first.context));
    }
    report(name, failures.is_empty(), worst, context)
}

/// Runs every structural property on one system with one pivoting strategy.
///
/// Explicit mode is used so that every intermediate `H` is available.
pub fn structure_checks(
    a: &DenseMatrix,
    b: &DenseVector,
    pivoting: Pivoting,
    tol_struct: f64,
) -> Result<Vec<PropertyReport>> {
    let n = a.cols();
    let opts = SolveOptions {
        mode: Mode::Explicit,
        record_trace: true,
    };
    let (rep, trace) = solve(a, b, Tolerances::default(), pivoting, opts)?;
    let trace = trace.expect("trace requested");
    let ctx = format!("{pivoting:?} {}x{}", a.rows(), n);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let mut ok = true;
    for (i, h) in trace.h_snapshots.iter().enumerate() {
        let chk = check_abaffian_structure(h, i + 1);
        ok &= chk.passed;
        worst = worst.max(chk.max_violation);
    }
    out.push(report("abaffian structure", ok, worst, ctx.clone()));

    let p = trace.p_matrix(n);
    out.push(check_unit_upper_triangular(&p).with_context(&ctx));

    // Rows in elimination order, columns in the final working order.
    let order: Vec<usize> = trace.steps.iter().map(|s| s.row).collect();
    let a_indep = rep.column_permutation().permute_columns(&a.select_rows(&order))?;
    out.push(check_implicit_factorization(&a_indep, &p, tol_struct)?.with_context(&ctx));

    // H a_k = 0 for processed rows and H^T w_k = 0 for w_k = e_slot, in the
    // caller's coordinates.
    let h = rep.final_h();
    let perm = rep.column_permutation();
    let w_rows: Vec<DenseVector> = (0..rep.rank)
        .map(|slot| DenseVector::unit(n, perm.as_slice()[slot]))
        .collect();
    let w = if w_rows.is_empty() {
        DenseMatrix::zeros(0, n)
    } else {
        DenseMatrix::from_rows(&w_rows.iter().map(|v| v.as_slice()).collect::<Vec<_>>())?
    };
    let processed = a.select_rows(&order);
    out.push(check_nullspace_relations(&h, &processed, &w, tol_struct)?.with_context(&ctx));
    Ok(out)
}

/// Structure suite: `count` random `m x n` systems, all three variants.
pub fn structure_suite(count: usize, m: usize, n: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    let mut r = rng(seed);
    let names = [
        "abaffian structure",
        "unit upper triangular P",
        "implicit factorization",
        "null space relations",
    ];
    let mut buckets: Vec<Vec<PropertyReport>> = vec![Vec::new(); names.len()];
    for k in 0..count {
        let a = random_matrix(m, n, &mut r);
        let b = random_vector(m, &mut r);
        for piv in PIVOTINGS {
            let checks = structure_checks(&a, &b, piv, 1e-10)?;
            for (bucket, chk) in buckets.iter_mut().zip(checks) {
                bucket.push(chk.with_context(format!("system {k}")));
            }
        }
    }
    Ok(names
        .iter()
        .zip(&buckets)
        .map(|(name, bucket)| summarize(name, bucket))
        .collect())
}

/// Compares every solver against Gaussian elimination on random square
/// systems, checks computed ranks on rank-deficient ones, and the residual on
/// a distance matrix.
pub fn oracle_suite(count: usize, seed: u64) -> Result<Vec<PropertyReport>> {
    let mut r = rng(seed);
    let tol = Tolerances::default();
    let mut agreement = Vec::new();
    for k in 0..count {
        let n = 2 + k % 20;
        let a = random_matrix(n, n, &mut r);
        let b = random_vector(n, &mut r);
        let (outcome, stats) = gauss_solve_with_stats(&a, &b)?;
        let GaussOutcome::Solved(x_ref) = outcome else {
            continue;
        };
        if stats.pivot_ratio >= 1e8 {
            continue;
        }
        let scale = x_ref.norm_inf().max(1.0);
        for piv in [Pivoting::Column, Pivoting::Row] {
            let (rep, _) = solve(&a, &b, tol, piv, SolveOptions::default())?;
            let err = if rep.is_success() {
                rep.solution.sub(&x_ref)?.norm_inf() / scale
            } else {
                f64::INFINITY
            };
            agreement.push(report(
                "agreement",
                err <= 1e-7,
                err,
                format!("system {k}, n={n}, {piv:?}"),
            ));
        }
        let (rep, _) = abs_solve_implicit_lu(&a, &b, tol)?;
        if rep.is_success() {
            let err = rep.solution.sub(&x_ref)?.norm_inf() / scale;
            agreement.push(report("agreement", err <= 1e-7, err, format!("system {k}, n={n}, general")));
        }
    }

    let mut ranks = Vec::new();
    for k in 0..count.min(20) {
        let (m, n) = (8 + k % 5, 12 + k % 7);
        let rank = 1 + k % m;
        let (a, b) = gen_rank_deficient(m, n, rank, seed.wrapping_add(k as u64))?;
        let want = rank_oracle(&a);
        for piv in PIVOTINGS.iter().skip(1) {
            let (rep, _) = solve(&a, &b, tol, *piv, SolveOptions::default())?;
            let ok = rep.is_success() && rep.rank == want;
            ranks.push(report(
                "rank",
                ok,
                rep.rank.abs_diff(want) as f64,
                format!("{m}x{n} rank {want}, got {} ({})", rep.rank, rep.outcome),
            ));
        }
    }

    let a = gen_micchelli_fiedler(100, 100)?;
    let b = rhs_index(100);
    let (rep, _) = solve(&a, &b, tol, Pivoting::Column, SolveOptions::default())?;
    let rel = if rep.is_success() {
        residual_norm(&a, &rep.solution, &b)? / b.norm2()
    } else {
        f64::INFINITY
    };
    let mf = report("mf-100 residual", rel <= 1e-8, rel, format!("{}", rep.outcome));

    Ok(vec![
        summarize("oracle agreement", &agreement),
        summarize("oracle rank", &ranks),
        mf,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in structure_suite(3, 5, 8, 1).unwrap() {
            assert!(r.passed, "{r}");
        }
        for r in oracle_suite(10, 2).unwrap() {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn summary_reports_first_failure() {
        let reports = vec![
            report("x", true, 1e-20, "a".into()),
            report("x", false, 3.0, "b".into()),
        ];
        let s = summarize("x", &reports);
        assert!(!s.passed);
        assert_eq!(s.max_violation, 3.0);
        assert!(s.context.contains("first failure: b"));
    }
}
