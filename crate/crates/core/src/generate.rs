//! Test-matrix generators. All are pure functions of their arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AbsError, Result};
use crate::linalg::{matvec, DenseMatrix, DenseVector};

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(AbsError::Param(format!("matrix shape {m}x{n} must be at least 1x1")));
    }
    Ok(())
}

/// Micchelli-Fiedler distance matrix, `a_ij = |i - j|`.
pub fn gen_micchelli_fiedler(m: usize, n: usize) -> Result<DenseMatrix> {
    check_shape(m, n)?;
    Ok(DenseMatrix::from_fn(m, n, |i, j| i.abs_diff(j) as f64))
}

/// Squared distances, `a_ij = |i - j|^2`.
pub fn gen_squared_distance(m: usize, n: usize) -> Result<DenseMatrix> {
    check_shape(m, n)?;
    Ok(DenseMatrix::from_fn(m, n, |i, j| {
        let d = i.abs_diff(j) as f64;
        d * d
    }))
}

/// `b_k = k` for `k = 1..=m`.
pub fn rhs_index(m: usize) -> DenseVector {
    (1..=m).map(|k| k as f64).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform on `[-1, 1]`.
pub fn random_matrix<R: Rng>(m: usize, n: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0))
}

pub fn random_vector<R: Rng>(n: usize, rng: &mut R) -> DenseVector {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Rank-`r` matrix `A = B C` with random `m x r` and `r x n` factors, plus a
/// right-hand side `b = A x_true` that is compatible by construction.
pub fn gen_rank_deficient(
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<(DenseMatrix, DenseVector)> {
    check_shape(m, n)?;
    if r == 0 || r > m.min(n) {
        return Err(AbsError::Param(format!(
            "rank {r} must lie in 1..={}",
            m.min(n)
        )));
    }
    let mut rng = rng(seed);
    let left = random_matrix(m, r, &mut rng);
    let right = random_matrix(r, n, &mut rng);
    let a = left.matmul(&right)?;
    let x_true = random_vector(n, &mut rng);
    let b = matvec(&a, &x_true)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rank_oracle;

    #[test]
    fn micchelli_fiedler_small() {
        let a = gen_micchelli_fiedler(3, 3).unwrap();
        assert_eq!(
            a,
            DenseMatrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]).unwrap()
        );
        assert_eq!(gen_micchelli_fiedler(1, 1).unwrap().as_slice(), &[0.0]);
        let big = gen_micchelli_fiedler(7, 7).unwrap();
        assert_eq!(big, big.transpose());
        assert!(gen_micchelli_fiedler(0, 3).is_err());
    }

    #[test]
    fn squared_distance_small() {
        let a = gen_squared_distance(3, 3).unwrap();
        assert_eq!(
            a,
            DenseMatrix::from_rows(&[[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]]).unwrap()
        );
        assert_eq!(gen_squared_distance(1, 4).unwrap().as_slice(), &[0.0, 1.0, 4.0, 9.0]);
        let mf = gen_micchelli_fiedler(5, 8).unwrap();
        let sq = gen_squared_distance(5, 8).unwrap();
        for (a, b) in mf.as_slice().iter().zip(sq.as_slice()) {
            assert_eq!(a * a, *b);
        }
    }

    #[test]
    fn index_rhs() {
        assert_eq!(rhs_index(3).as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_deficient_ranks() {
        let (a, b) = gen_rank_deficient(4, 6, 2, 7).unwrap();
        assert_eq!(a.shape(), (4, 6));
        assert_eq!(b.len(), 4);
        assert_eq!(rank_oracle(&a), 2);

        let (full, _) = gen_rank_deficient(5, 9, 5, 3).unwrap();
        assert_eq!(rank_oracle(&full), 5);

        assert!(gen_rank_deficient(4, 6, 0, 1).is_err());
        assert!(gen_rank_deficient(4, 6, 5, 1).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let (a1, b1) = gen_rank_deficient(6, 9, 3, 99).unwrap();
        let (a2, b2) = gen_rank_deficient(6, 9, 3, 99).unwrap();
        assert_eq!(a1.as_slice(), a2.as_slice());
        assert_eq!(b1, b2);
        let (a3, _) = gen_rank_deficient(6, 9, 3, 100).unwrap();
        assert_ne!(a1.as_slice(), a3.as_slice());
    }
}
