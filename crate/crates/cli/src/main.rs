use std::path::PathBuf;
use std::process::ExitCode;

use abs_cli::run::{outcome_exit_code, Algorithm, Generator, MatrixSource, RhsSource, RunConfig};
use abs_cli::{exit, run_benchmark, run_solve, verify, NO_SOLUTION};
use abs_core::{Mode, Outcome, Tolerances};
use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "abs", version, about = "Dense ABS / implicit LU linear solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and write solution.mtx and record.json.
    Solve(SolveArgs),
    /// Run the size x algorithm x generator grid, one JSON line per cell.
    Bench(BenchArgs),
    /// Run the built-in property suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "ilu-pc")]
    algo: Algorithm,
    /// Matrix Market array file.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    matrix: Option<PathBuf>,
    #[arg(long = "gen", value_name = "GENERATOR")]
    generator: Option<Generator>,
    #[arg(long, requires = "generator")]
    m: Option<usize>,
    #[arg(long, requires = "generator")]
    n: Option<usize>,
    #[arg(long, requires = "generator")]
    rank: Option<usize>,
    /// `index` for b_k = k, or a Matrix Market vector file. Defaults to the
    /// generated compatible b for rankdef and `index` otherwise.
    #[arg(long)]
    rhs: Option<String>,
    #[arg(long, default_value_t = 1e-7)]
    ep1: f64,
    #[arg(long, default_value_t = 1e-7)]
    ep2: f64,
    #[arg(long, value_enum, default_value = "compact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Compact,
    Explicit,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ilu-a,ilu-pc,ilu-pr,general")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Structure,
    Oracle,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn solve_config(args: SolveArgs) -> Result<RunConfig> {
    let matrix = match (args.matrix, args.generator) {
        (Some(path), _) => MatrixSource::File(path),
        (None, Some(generator)) => {
            let (m, n) = match (args.m, args.n) {
                (Some(m), Some(n)) => (m, n),
                (Some(m), None) => (m, m),
                (None, Some(n)) => (n, n),
                (None, None) => bail!("--gen needs --m and/or --n"),
            };
            MatrixSource::Generated {
                generator,
                m,
                n,
                rank: args.rank,
            }
        }
        (None, None) => bail!("one of --matrix or --gen is required"),
    };
    let rhs = match args.rhs.as_deref() {
        Some("index") => RhsSource::Index,
        Some(path) => RhsSource::File(PathBuf::from(path)),
        None => match matrix {
            MatrixSource::Generated {
                generator: Generator::Rankdef,
                ..
            } => RhsSource::Generated,
            _ => RhsSource::Index,
        },
    };
    let mut config = RunConfig::new(args.algo, matrix);
    config.rhs = rhs;
    config.tolerances = Tolerances::new(args.ep1, args.ep2)?;
    config.mode = match args.mode {
        ModeArg::Compact => Mode::Compact,
        ModeArg::Explicit => Mode::Explicit,
    };
    config.seed = args.seed;
    config.out = Some(args.out);
    Ok(config)
}

fn solve(args: SolveArgs) -> Result<i32> {
    let config = solve_config(args)?;
    let run = run_solve(&config)?;
    println!("{}", run.record.to_json_line());
    match run.report.outcome {
        Outcome::Success => {}
        Outcome::Incompatible { row } => {
            eprintln!("{NO_SOLUTION}");
            log::info!("equation {row} is incompatible with the preceding ones");
        }
        Outcome::SingularPrincipalMinor { row } => {
            eprintln!(
                "singular leading principal minor at row {row}; try --algo ilu-pc or --algo ilu-pr"
            );
        }
    }
    Ok(outcome_exit_code(&run.report.outcome))
}

fn bench(args: BenchArgs) -> Result<i32> {
    if args.sizes.is_empty() || args.algos.is_empty() {
        bail!("--sizes and --algos must not be empty");
    }
    for rec in run_benchmark(&args.sizes, &args.algos, args.seed, args.jobs)? {
        println!("{}", rec.to_json_line());
    }
    Ok(exit::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<i32> {
    let mut reports = Vec::new();
    if matches!(args.suite, Suite::Structure | Suite::All) {
        reports.extend(verify::structure_suite(20, 20, 30, args.seed)?);
    }
    if matches!(args.suite, Suite::Oracle | Suite::All) {
        reports.extend(verify::oracle_suite(100, args.seed)?);
    }
    let mut ok = true;
    for r in &reports {
        println!("{r}");
        ok &= r.passed;
    }
    Ok(if ok { exit::SUCCESS } else { exit::VERIFY_FAILED })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ABS_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Verify(args) => verify_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::USAGE as u8)
        }
    }
}
