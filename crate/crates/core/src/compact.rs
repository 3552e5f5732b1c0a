//! Storage for the implicit-LU Abaffian.
//!
//! With `H_1 = I` and `z_i = w_i = e_i`, after `t` independent rows the
//! Abaffian is `[[0, 0], [K, I]]` with `K` of shape `(n - t) x t`. Only `K`
//! is stored in compact mode. Explicit mode keeps the full `n x n` matrix and
//! applies the rank-one update to every entry; it exists to check the
//! structural claims against an unoptimised path.

use crate::error::{AbsError, Result};
use crate::linalg::{dot_slices, DenseMatrix, DenseVector};
use crate::report::{Abaffian, WorkCounter};

/// The nontrivial block `K` of the implicit-LU Abaffian.
///
/// Row `j` of the backing buffer (stride `capacity`) holds `H[j][0..t]` for
/// every slot `j >= t`; rows of eliminated slots are stale and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactAbaffian {
    n: usize,
    capacity: usize,
    processed: usize,
    k: Vec<f64>,
}

impl CompactAbaffian {
    /// `H_1 = I_n`, with room for up to `capacity` eliminated slots.
    pub fn new(n: usize, capacity: usize) -> Self {
        let capacity = capacity.min(n);
        Self {
            n,
            capacity,
            processed: 0,
            k: vec![0.0; n * capacity],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of eliminated slots (`i` in `H_{i+1}`).
    pub fn processed(&self) -> usize {
        self.processed
    }

    /// `K` row for slot `j >= processed`, restricted to the eliminated columns.
    pub fn k_row(&self, j: usize) -> &[f64] {
        debug_assert!(j >= self.processed && j < self.n);
        &self.k[j * self.capacity..j * self.capacity + self.processed]
    }

    /// The `K` block as a dense `(n - t) x t` matrix.
    pub fn k_block(&self) -> DenseMatrix {
        let t = self.processed;
        DenseMatrix::from_fn(self.n - t, t, |r, c| self.k_row(t + r)[c])
    }

    /// Full row `j` of `H`.
    pub fn h_row(&self, j: usize) -> DenseVector {
        let mut row = DenseVector::zeros(self.n);
        if j >= self.processed {
            row.as_mut_slice()[..self.processed].copy_from_slice(self.k_row(j));
            row[j] = 1.0;
        }
        row
    }

    /// Reconstructs `H_{t+1} = [[0, 0], [K, I]]`.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(self.n, self.n);
        for j in self.processed..self.n {
            h.row_mut(j)[..self.processed].copy_from_slice(self.k_row(j));
            h.set(j, j, 1.0);
        }
        h
    }

    /// `s = H a`, using only the `K` block: `s[j] = K[j]·a[..t] + a[j]` for
    /// `j >= t`, zero otherwise.
    pub fn apply(&self, a: &[f64], s: &mut [f64]) {
        let t = self.processed;
        s[..t].fill(0.0);
        for j in t..self.n {
            s[j] = dot_slices(self.k_row(j), &a[..t]) + a[j];
        }
    }

    /// `H_{i+1} = H_i - s e_t^T H_i / d`, touching only the `K` block.
    ///
    /// Writes exactly `i (n - i)` entries, `i = t + 1` being the 1-based
    /// iteration number.
    pub fn update(&mut self, s: &[f64], d: f64, ep1: f64, work: &mut WorkCounter) -> Result<()> {
        let t = self.processed;
        if d.abs() <= ep1 {
            return Err(AbsError::DegenerateUpdate { row: t, value: d });
        }
        if t >= self.capacity {
            return Err(AbsError::State(format!(
                "compact Abaffian capacity {} exhausted",
                self.capacity
            )));
        }
        if t + 1 < self.n {
            let cap = self.capacity;
            let (head, tail) = self.k.split_at_mut((t + 1) * cap);
            let pivot = &head[t * cap..t * cap + t];
            for (jj, row) in tail.chunks_exact_mut(cap).enumerate() {
                let f = s[t + 1 + jj] / d;
                for (h, p) in row[..t].iter_mut().zip(pivot) {
                    *h -= f * p;
                }
                // H[t][t] = 1 and H[j][t] = 0 before the update.
                row[t] = 0.0 - f * 1.0;
            }
            let rows = (self.n - t - 1) as u64;
            let writes = rows * (t as u64 + 1);
            work.h_update_mults += writes;
            work.h_update_writes += writes;
            work.divisions += rows;
        }
        self.processed += 1;
        Ok(())
    }

    /// Exchanges two not-yet-eliminated slots (a column interchange of `A`).
    pub fn swap_slots(&mut self, j: usize, k: usize) {
        debug_assert!(j >= self.processed && k >= self.processed);
        if j == k {
            return;
        }
        let cap = self.capacity;
        let (lo, hi) = (j.min(k), j.max(k));
        let (head, tail) = self.k.split_at_mut(hi * cap);
        head[lo * cap..lo * cap + self.processed].swap_with_slice(&mut tail[..self.processed]);
    }
}

/// Applies one implicit-LU update at iteration `i` (0-based count of
/// eliminated slots) and returns the work it performed.
pub fn compact_update(
    kh: &mut CompactAbaffian,
    s: &DenseVector,
    d: f64,
    i: usize,
    ep1: f64,
) -> Result<WorkCounter> {
    if s.len() != kh.n() {
        return Err(AbsError::dim("compact_update", kh.n(), s.len()));
    }
    if i != kh.processed() {
        return Err(AbsError::State(format!(
            "compact_update at iteration {i}, but {} slots are eliminated",
            kh.processed()
        )));
    }
    let mut work = WorkCounter::default();
    kh.update(s.as_slice(), d, ep1, &mut work)?;
    Ok(work)
}

/// Full `n x n` Abaffian with the same slot discipline as [`CompactAbaffian`].
#[derive(Debug, Clone)]
pub(crate) struct ExplicitAbaffian {
    h: DenseMatrix,
    processed: usize,
}

impl ExplicitAbaffian {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            h: DenseMatrix::identity(n),
            processed: 0,
        }
    }
}

/// Operations the implicit-LU driver needs from an Abaffian representation.
pub(crate) trait AbaffianStore {
    fn n(&self) -> usize;
    fn processed(&self) -> usize;
    fn apply(&self, a: &[f64], s: &mut [f64]);
    /// `(e_t^T H) a`, the row-pivot candidate value.
    fn pivot_dot(&self, a: &[f64]) -> f64;
    /// Entries `0..=t` of row `t` of `H` (the rest of the row is zero).
    fn pivot_row(&self) -> Vec<f64>;
    fn swap_slots(&mut self, j: usize, k: usize);
    fn update(&mut self, s: &[f64], d: f64, ep1: f64, work: &mut WorkCounter) -> Result<()>;
    fn snapshot(&self) -> DenseMatrix;
    fn into_abaffian(self) -> Abaffian;
}

impl AbaffianStore for CompactAbaffian {
    fn n(&self) -> usize {
        self.n
    }

    fn processed(&self) -> usize {
        self.processed
    }

    fn apply(&self, a: &[f64], s: &mut [f64]) {
        CompactAbaffian::apply(self, a, s)
    }

    fn pivot_dot(&self, a: &[f64]) -> f64 {
        let t = self.processed;
        if t >= self.n {
            return 0.0;
        }
        dot_slices(self.k_row(t), &a[..t]) + a[t]
    }

    fn pivot_row(&self) -> Vec<f64> {
        let t = self.processed;
        let mut row = self.k_row(t).to_vec();
        row.push(1.0);
        row
    }

    fn swap_slots(&mut self, j: usize, k: usize) {
        CompactAbaffian::swap_slots(self, j, k)
    }

    fn update(&mut self, s: &[f64], d: f64, ep1: f64, work: &mut WorkCounter) -> Result<()> {
        CompactAbaffian::update(self, s, d, ep1, work)
    }

    fn snapshot(&self) -> DenseMatrix {
        self.to_dense()
    }

    fn into_abaffian(self) -> Abaffian {
        Abaffian::Compact(self)
    }
}

impl AbaffianStore for ExplicitAbaffian {
    fn n(&self) -> usize {
        self.h.rows()
    }

    fn processed(&self) -> usize {
        self.processed
    }

    fn apply(&self, a: &[f64], s: &mut [f64]) {
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = dot_slices(self.h.row(j), a);
        }
    }

    fn pivot_dot(&self, a: &[f64]) -> f64 {
        if self.processed >= self.n() {
            return 0.0;
        }
        dot_slices(self.h.row(self.processed), a)
    }

    fn pivot_row(&self) -> Vec<f64> {
        self.h.row(self.processed)[..=self.processed].to_vec()
    }

    fn swap_slots(&mut self, j: usize, k: usize) {
        // P H P^T: both the row and the column move.
        self.h.swap_rows(j, k).expect("slot in range");
        self.h.swap_cols(j, k).expect("slot in range");
    }

    fn update(&mut self, s: &[f64], d: f64, ep1: f64, work: &mut WorkCounter) -> Result<()> {
        let t = self.processed;
        if d.abs() <= ep1 {
            return Err(AbsError::DegenerateUpdate { row: t, value: d });
        }
        let n = self.n();
        let pivot = self.h.row(t).to_vec();
        for (j, &sj) in s.iter().enumerate().take(n) {
            let f = sj / d;
            for (h, p) in self.h.row_mut(j).iter_mut().zip(&pivot) {
                *h -= f * p;
            }
        }
        // Row t is annihilated exactly, matching the compact store.
        self.h.row_mut(t).fill(0.0);
        let nn = (n * n) as u64;
        work.h_update_mults += nn;
        work.h_update_writes += nn;
        work.divisions += n as u64;
        self.processed += 1;
        Ok(())
    }

    fn snapshot(&self) -> DenseMatrix {
        self.h.clone()
    }

    fn into_abaffian(self) -> Abaffian {
        Abaffian::Dense(self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_deflates_first_coordinate() {
        let mut kh = CompactAbaffian::new(2, 2);
        let w = compact_update(&mut kh, &DenseVector::from([1.0, 0.0]), 1.0, 0, 1e-7).unwrap();
        assert_eq!(
            kh.to_dense(),
            DenseMatrix::from_rows(&[[0.0, 0.0], [0.0, 1.0]]).unwrap()
        );
        assert_eq!(kh.k_block().as_slice(), &[0.0]);
        assert_eq!(w.h_update_writes, 1);
    }

    #[test]
    fn update_matches_hand_expansion() {
        let mut kh = CompactAbaffian::new(3, 3);
        compact_update(&mut kh, &DenseVector::from([1.0, 1.0, 0.0]), 1.0, 0, 1e-7).unwrap();
        let expected =
            DenseMatrix::from_rows(&[[0.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(kh.to_dense(), expected);
        assert_eq!(kh.k_block().as_slice(), &[-1.0, 0.0]);
        // H_2 a_1 = 0
        let mut s = [0.0; 3];
        kh.apply(&[1.0, 1.0, 0.0], &mut s);
        assert_eq!(s, [0.0; 3]);
    }

    #[test]
    fn update_rejects_small_pivot_and_wrong_iteration() {
        let mut kh = CompactAbaffian::new(3, 3);
        let s = DenseVector::from([1e-9, 1.0, 0.0]);
        assert!(matches!(
            compact_update(&mut kh, &s, 1e-9, 0, 1e-7),
            Err(AbsError::DegenerateUpdate { .. })
        ));
        assert!(matches!(
            compact_update(&mut kh, &s, 1.0, 1, 1e-7),
            Err(AbsError::State(_))
        ));
        assert_eq!(kh.processed(), 0);
    }

    #[test]
    fn write_count_is_i_times_n_minus_i() {
        let n = 6;
        let mut kh = CompactAbaffian::new(n, n);
        let mut total = 0;
        for i in 0..n {
            let mut s = vec![0.0; n];
            for (j, v) in s.iter_mut().enumerate().skip(i) {
                *v = 1.0 + j as f64;
            }
            let w = compact_update(&mut kh, &s.into(), 2.0, i, 1e-7).unwrap();
            let one_based = (i + 1) as u64;
            assert_eq!(w.h_update_writes, one_based * (n as u64 - one_based));
            total += w.h_update_writes;
        }
        assert_eq!(total, ((n * n * n - n) / 6) as u64);
    }

    #[test]
    fn swap_slots_is_symmetric_permutation() {
        let mut kh = CompactAbaffian::new(4, 4);
        compact_update(&mut kh, &DenseVector::from([2.0, 1.0, 3.0, -1.0]), 2.0, 0, 1e-7).unwrap();
        let before = kh.to_dense();
        kh.swap_slots(1, 3);
        let after = kh.to_dense();
        let mut expected = before.clone();
        expected.swap_rows(1, 3).unwrap();
        expected.swap_cols(1, 3).unwrap();
        assert_eq!(after, expected);
    }
}
