use std::sync::Mutex;

use abs_core::Tolerances;
use anyhow::Result;

use crate::run::{load_system, make_record, solve_system, Algorithm, BenchRecord, Generator, MatrixSource, RhsSource, RunConfig};

/// One cell of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchCase {
    pub n: usize,
    pub algorithm: Algorithm,
    pub generator: Generator,
}

/// Cross product `sizes x algorithms x {mf, mf2, rankdef}` in that nesting order.
pub fn grid(sizes: &[usize], algorithms: &[Algorithm]) -> Vec<BenchCase> {
    let mut cases = Vec::new();
    for &n in sizes {
        for &algorithm in algorithms {
            for generator in Generator::ALL {
                cases.push(BenchCase {
                    n,
                    algorithm,
                    generator,
                });
            }
        }
    }
    cases
}

fn run_case(case: BenchCase, seed: u64) -> Result<BenchRecord> {
    let n = case.n;
    let mut config = RunConfig::new(
        case.algorithm,
        MatrixSource::Generated {
            generator: case.generator,
            m: n,
            n,
            rank: Some((n / 2).max(1)),
        },
    );
    config.seed = seed;
    if case.generator == Generator::Rankdef {
        config.rhs = RhsSource::Generated;
    }
    let (a, b, label) = load_system(&config)?;
    let (report, secs) = solve_system(case.algorithm, &a, &b, Tolerances::default(), config.mode)?;
    make_record(case.algorithm, label, &a, &b, &report, secs)
}

/// Runs the grid on up to `jobs` threads. Records come back in grid order
/// regardless of `jobs`.
pub fn run_benchmark(
    sizes: &[usize],
    algorithms: &[Algorithm],
    seed: u64,
    jobs: usize,
) -> Result<Vec<BenchRecord>> {
    let cases = grid(sizes, algorithms);
    let jobs = jobs.clamp(1, cases.len().max(1));
    let results: Vec<Mutex<Option<Result<BenchRecord>>>> =
        cases.iter().map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().expect("queue lock");
                    let idx = *guard;
                    *guard += 1;
                    idx
                };
                let Some(&case) = cases.get(idx) else { break };
                log::info!("bench {} n={} {}", case.algorithm, case.n, case.generator.name());
                let rec = run_case(case, seed);
                *results[idx].lock().expect("result lock") = Some(rec);
            });
        }
    });

    results
        .into_iter()
        .map(|slot| slot.into_inner().expect("result lock").expect("every case ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order() {
        let g = grid(&[4, 8], &[Algorithm::IluPc, Algorithm::IluPr]);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0].generator, Generator::Mf);
        assert_eq!(g[2].generator, Generator::Rankdef);
        assert_eq!(g[3].algorithm, Algorithm::IluPr);
        assert_eq!(g[6].n, 8);
    }

    #[test]
    fn parallel_matches_serial() {
        let algos = [Algorithm::IluA, Algorithm::IluPc];
        let serial = run_benchmark(&[6, 10], &algos, 3, 1).unwrap();
        let parallel = run_benchmark(&[6, 10], &algos, 3, 4).unwrap();
        assert_eq!(serial.len(), parallel.len());
        for (s, p) in serial.iter().zip(&parallel) {
            assert_eq!(s.source, p.source);
            assert_eq!(s.mult_count, p.mult_count);
            assert_eq!(s.outcome, p.outcome);
            assert_eq!(s.residual.map(f64::to_bits), p.residual.map(f64::to_bits));
        }
        // Unpivoted elimination cannot start on a zero diagonal.
        assert_eq!(serial[0].outcome, "singular_principal_minor");
    }
}
