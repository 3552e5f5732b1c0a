use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use abs_core::generate::{gen_micchelli_fiedler, gen_rank_deficient, gen_squared_distance, rhs_index};
use abs_core::ilu::{self, Mode, Pivoting, SolveOptions};
use abs_core::mmio;
use abs_core::oracle::residual_norm;
use abs_core::{DenseMatrix, DenseVector, Outcome, SolveReport, Tolerances};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::exit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    IluA,
    IluPc,
    IluPr,
    General,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::IluA,
        Algorithm::IluPc,
        Algorithm::IluPr,
        Algorithm::General,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::IluA => "ilu-a",
            Algorithm::IluPc => "ilu-pc",
            Algorithm::IluPr => "ilu-pr",
            Algorithm::General => "general",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .with_context(|| format!("unknown algorithm `{s}` (expected ilu-a, ilu-pc, ilu-pr or general)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// `a_ij = |i - j|`
    Mf,
    /// `a_ij = |i - j|^2`
    Mf2,
    /// Random rank-deficient product with a compatible right-hand side.
    Rankdef,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Mf, Generator::Mf2, Generator::Rankdef];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Mf => "mf",
            Generator::Mf2 => "mf2",
            Generator::Rankdef => "rankdef",
        }
    }
}

impl FromStr for Generator {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .with_context(|| format!("unknown generator `{s}` (expected mf, mf2 or rankdef)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Generated {
        generator: Generator,
        m: usize,
        n: usize,
        /// Rank for `rankdef`; defaults to `min(m, n) / 2`, at least 1.
        rank: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsSource {
    /// `b_k = k`, 1-based.
    Index,
    File(PathBuf),
    /// Whatever the matrix generator supplies (the compatible `b` of `rankdef`).
    Generated,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub matrix: MatrixSource,
    pub rhs: RhsSource,
    pub tolerances: Tolerances,
    pub mode: Mode,
    pub seed: u64,
    /// Directory for `solution.mtx` and `record.json`; nothing is written when `None`.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, matrix: MatrixSource) -> Self {
        Self {
            algorithm,
            matrix,
            rhs: RhsSource::Index,
            tolerances: Tolerances::default(),
            mode: Mode::Compact,
            seed: 0,
            out: None,
        }
    }
}

/// One line of benchmark / solve output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub source: String,
    pub m: usize,
    pub n: usize,
    pub wall_time_s: f64,
    pub mult_count: u64,
    /// `||Ax - b||_2`, present only on success.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
    pub rank: usize,
    pub dependent_rows: usize,
    pub nullspace_dim: usize,
    pub outcome: String,
    /// 0-based row where the solve stopped, if it failed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outcome_row: Option<usize>,
}

impl BenchRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Everything a single solve produced.
#[derive(Debug)]
pub struct SolveRun {
    pub record: BenchRecord,
    pub report: SolveReport,
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub solution_path: Option<PathBuf>,
}

impl SolveRun {
    pub fn exit_code(&self) -> i32 {
        outcome_exit_code(&self.report.outcome)
    }
}

pub fn outcome_exit_code(outcome: &Outcome) -> i32 {
    match outcome {
        Outcome::Success => exit::SUCCESS,
        Outcome::Incompatible { .. } => exit::INCOMPATIBLE,
        Outcome::SingularPrincipalMinor { .. } => exit::SINGULAR_MINOR,
    }
}

pub fn outcome_label(outcome: &Outcome) -> (&'static str, Option<usize>) {
    match outcome {
        Outcome::Success => ("success", None),
        Outcome::Incompatible { row } => ("incompatible", Some(*row)),
        Outcome::SingularPrincipalMinor { row } => ("singular_principal_minor", Some(*row)),
    }
}

/// Builds `(A, b, label)` for a configuration.
pub fn load_system(config: &RunConfig) -> Result<(DenseMatrix, DenseVector, String)> {
    let (a, generated_b, label) = match &config.matrix {
        MatrixSource::File(path) => {
            let a = mmio::read_matrix_file(path)
                .with_context(|| format!("reading matrix {}", path.display()))?;
            (a, None, path.display().to_string())
        }
        MatrixSource::Generated {
            generator,
            m,
            n,
            rank,
        } => match generator {
            Generator::Mf => (gen_micchelli_fiedler(*m, *n)?, None, "mf".to_string()),
            Generator::Mf2 => (gen_squared_distance(*m, *n)?, None, "mf2".to_string()),
            Generator::Rankdef => {
                let r = rank.unwrap_or_else(|| ((*m).min(*n) / 2).max(1));
                let (a, b) = gen_rank_deficient(*m, *n, r, config.seed)?;
                (a, Some(b), format!("rankdef(r={r},seed={})", config.seed))
            }
        },
    };
    let b = match &config.rhs {
        RhsSource::Index => rhs_index(a.rows()),
        RhsSource::File(path) => mmio::read_vector_file(path)
            .with_context(|| format!("reading right-hand side {}", path.display()))?,
        RhsSource::Generated => match generated_b {
            Some(b) => b,
            None => bail!("the {label} source has no generated right-hand side; use --rhs index or a file"),
        },
    };
    if b.len() != a.rows() {
        bail!(
            "right-hand side has {} entries but the matrix has {} rows",
            b.len(),
            a.rows()
        );
    }
    Ok((a, b, label))
}

/// Runs one algorithm on an already-built system, timing only the solve.
pub fn solve_system(
    algorithm: Algorithm,
    a: &DenseMatrix,
    b: &DenseVector,
    tolerances: Tolerances,
    mode: Mode,
) -> Result<(SolveReport, f64)> {
    let opts = SolveOptions {
        mode,
        record_trace: false,
    };
    let start = Instant::now();
    let report = match algorithm {
        Algorithm::IluA => ilu::solve(a, b, tolerances, Pivoting::None, opts)?.0,
        Algorithm::IluPc => ilu::solve(a, b, tolerances, Pivoting::Column, opts)?.0,
        Algorithm::IluPr => ilu::solve(a, b, tolerances, Pivoting::Row, opts)?.0,
        Algorithm::General => abs_core::abs_solve_implicit_lu(a, b, tolerances)?.0,
    };
    let elapsed = start.elapsed().as_secs_f64();
    Ok((report, elapsed))
}

pub fn make_record(
    algorithm: Algorithm,
    source: String,
    a: &DenseMatrix,
    b: &DenseVector,
    report: &SolveReport,
    wall_time_s: f64,
) -> Result<BenchRecord> {
    let residual = if report.is_success() {
        Some(residual_norm(a, &report.solution, b)?)
    } else {
        None
    };
    let (outcome, outcome_row) = outcome_label(&report.outcome);
    Ok(BenchRecord {
        algorithm,
        source,
        m: a.rows(),
        n: a.cols(),
        wall_time_s,
        mult_count: report.mult_count,
        residual,
        rank: report.rank,
        dependent_rows: report.dependent_rows().len(),
        nullspace_dim: report.nullspace_dim,
        outcome: outcome.to_string(),
        outcome_row,
    })
}

/// Generate or read the system, solve it, and write the outputs.
pub fn run_solve(config: &RunConfig) -> Result<SolveRun> {
    let (a, b, label) = load_system(config)?;
    log::info!(
        "solving {}x{} system from {label} with {}",
        a.rows(),
        a.cols(),
        config.algorithm
    );
    let (report, secs) = solve_system(config.algorithm, &a, &b, config.tolerances, config.mode)?;
    log::debug!("solve finished in {secs:.6}s: {}", report.outcome);
    let record = make_record(config.algorithm, label, &a, &b, &report, secs)?;

    let mut solution_path = None;
    if let Some(dir) = &config.out {
        write_outputs(dir, &report, &record)?;
        if report.is_success() {
            solution_path = Some(dir.join("solution.mtx"));
        }
    }
    Ok(SolveRun {
        record,
        report,
        a,
        b,
        solution_path,
    })
}

fn write_outputs(dir: &Path, report: &SolveReport, record: &BenchRecord) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let solution = dir.join("solution.mtx");
    if report.is_success() {
        mmio::write_vector_file(&solution, &report.solution)?;
    } else if solution.exists() {
        // Never leave a stale solution next to a failed record.
        fs::remove_file(&solution)?;
    }
    fs::write(dir.join("record.json"), record.to_json_line() + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generated(generator: Generator, m: usize, n: usize) -> MatrixSource {
        MatrixSource::Generated {
            generator,
            m,
            n,
            rank: None,
        }
    }

    #[test]
    fn parses_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("lu".parse::<Algorithm>().is_err());
        assert_eq!("mf2".parse::<Generator>().unwrap(), Generator::Mf2);
    }

    #[test]
    fn scaled_down_experiment() {
        let cfg = RunConfig::new(Algorithm::IluPc, generated(Generator::Mf, 100, 100));
        let run = run_solve(&cfg).unwrap();
        assert_eq!(run.exit_code(), exit::SUCCESS);
        let res = run.record.residual.unwrap();
        assert!(res <= 1e-8 * run.b.norm2(), "{res:e}");
    }

    #[test]
    fn unpivoted_mf_fails_on_first_row() {
        let cfg = RunConfig::new(Algorithm::IluA, generated(Generator::Mf, 3, 3));
        let run = run_solve(&cfg).unwrap();
        assert_eq!(run.exit_code(), exit::SINGULAR_MINOR);
        assert_eq!(run.record.outcome, "singular_principal_minor");
        assert_eq!(run.record.outcome_row, Some(0));
        assert_eq!(run.record.residual, None);
    }

    #[test]
    fn squared_distance_has_rank_three() {
        let cfg = RunConfig::new(Algorithm::IluPc, generated(Generator::Mf2, 12, 12));
        let run = run_solve(&cfg).unwrap();
        assert!(run.report.is_success());
        assert_eq!(run.record.rank, 3);
        assert_eq!(run.record.dependent_rows, 9);
    }

    #[test]
    fn rankdef_needs_generated_rhs_by_choice() {
        let mut cfg = RunConfig::new(
            Algorithm::IluPr,
            MatrixSource::Generated {
                generator: Generator::Rankdef,
                m: 6,
                n: 9,
                rank: Some(3),
            },
        );
        cfg.rhs = RhsSource::Generated;
        cfg.seed = 4;
        let run = run_solve(&cfg).unwrap();
        assert!(run.report.is_success());
        assert_eq!(run.record.rank, 3);

        let mut bad = RunConfig::new(Algorithm::IluA, generated(Generator::Mf, 3, 3));
        bad.rhs = RhsSource::Generated;
        assert!(run_solve(&bad).is_err());
    }
}
