//! Dense row-major matrices, vectors and permutations.
//!
//! Everything here is plain `f64` storage with 0-based indexing. The solver
//! modules work directly on the row slices for their hot loops, so the
//! accessors hand out `&[f64]` rows rather than iterators.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{AbsError, Result};

/// Dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    /// The `k`-th coordinate vector of length `len`.
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[k] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn swap(&mut self, i: usize, k: usize) {
        self.data.swap(i, k);
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`, componentwise.
    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        if self.len() != other.len() {
            return Err(AbsError::dim("sub", self.len(), other.len()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect())
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl From<&[f64]> for DenseVector {
    fn from(data: &[f64]) -> Self {
        Self {
            data: data.to_vec(),
        }
    }
}

impl<const N: usize> From<[f64; N]> for DenseVector {
    fn from(data: [f64; N]) -> Self {
        Self {
            data: data.to_vec(),
        }
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self {
            data: iter.into_iter().collect(),
        }
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Dense real matrix in row-major order.
///
/// Zero-sized shapes are allowed so that e.g. an empty null-space basis can be
/// represented as an `n x 0` matrix; the solvers reject empty systems.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AbsError::dim("from_row_major", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(AbsError::dim("from_rows", cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(len: usize, cols: &[DenseVector]) -> Result<Self> {
        let mut m = Self::zeros(len, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != len {
                return Err(AbsError::dim("from_columns", len, c.len()));
            }
            for i in 0..len {
                m.data[i * cols.len() + j] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn row_vector(&self, i: usize) -> DenseVector {
        DenseVector::from(self.row(i))
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Copy of the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(AbsError::dim("matmul", self.cols, other.rows));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn swap_rows(&mut self, i: usize, k: usize) -> Result<()> {
        check_index("swap_rows", i, self.rows)?;
        check_index("swap_rows", k, self.rows)?;
        if i == k {
            return Ok(());
        }
        let c = self.cols;
        let (lo, hi) = (i.min(k), i.max(k));
        let (head, tail) = self.data.split_at_mut(hi * c);
        head[lo * c..(lo + 1) * c].swap_with_slice(&mut tail[..c]);
        Ok(())
    }

    pub fn swap_cols(&mut self, j: usize, k: usize) -> Result<()> {
        check_index("swap_cols", j, self.cols)?;
        check_index("swap_cols", k, self.cols)?;
        if j == k {
            return Ok(());
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + j, r * self.cols + k);
        }
        Ok(())
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

fn check_index(op: &'static str, index: usize, bound: usize) -> Result<()> {
    if index >= bound {
        return Err(AbsError::Index { op, index, bound });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot_slices(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b)
}

#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `A x`.
pub fn matvec(a: &DenseMatrix, x: &DenseVector) -> Result<DenseVector> {
    if a.cols() != x.len() {
        return Err(AbsError::dim("matvec", a.cols(), x.len()));
    }
    Ok((0..a.rows())
        .map(|i| dot_slices(a.row(i), x.as_slice()))
        .collect())
}

/// `A^T x`.
pub fn matvec_transpose(a: &DenseMatrix, x: &DenseVector) -> Result<DenseVector> {
    if a.rows() != x.len() {
        return Err(AbsError::dim("matvec_transpose", a.rows(), x.len()));
    }
    let mut out = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        let xi = x[i];
        for (o, v) in out.iter_mut().zip(a.row(i)) {
            *o += v * xi;
        }
    }
    Ok(out.into())
}

pub fn dot(u: &DenseVector, v: &DenseVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(AbsError::dim("dot", u.len(), v.len()));
    }
    Ok(dot_slices(u.as_slice(), v.as_slice()))
}

/// Tracks row or column interchanges.
///
/// `map[j]` is the original index of whatever currently sits in slot `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Builds a permutation from an explicit map, checking it is a bijection.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &m in &map {
            if m >= n || seen[m] {
                return Err(AbsError::Param(format!(
                    "permutation map is not a bijection on 0..{n}"
                )));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn swap(&mut self, i: usize, k: usize) {
        self.map.swap(i, k);
    }

    /// Slot currently holding original index `orig`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.map.len()];
        for (slot, &orig) in self.map.iter().enumerate() {
            inv[orig] = slot;
        }
        inv
    }

    /// Original ordering to slot ordering: `w[j] = v[map[j]]`.
    pub fn apply(&self, v: &DenseVector) -> Result<DenseVector> {
        if v.len() != self.map.len() {
            return Err(AbsError::dim("permutation_apply", self.map.len(), v.len()));
        }
        Ok(self.map.iter().map(|&m| v[m]).collect())
    }

    /// Slot ordering back to original ordering: `w[map[j]] = v[j]`.
    pub fn apply_inverse(&self, v: &DenseVector) -> Result<DenseVector> {
        if v.len() != self.map.len() {
            return Err(AbsError::dim(
                "permutation_apply_inverse",
                self.map.len(),
                v.len(),
            ));
        }
        let mut w = DenseVector::zeros(v.len());
        for (j, &m) in self.map.iter().enumerate() {
            w[m] = v[j];
        }
        Ok(w)
    }

    /// Reorders the columns of `a` into slot order: column `j` of the result
    /// is column `map[j]` of `a`.
    pub fn permute_columns(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.map.len() {
            return Err(AbsError::dim("permute_columns", self.map.len(), a.cols()));
        }
        Ok(DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
            a.get(i, self.map[j])
        }))
    }

    /// Reorders the rows of `a` into slot order.
    pub fn permute_rows(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.map.len() {
            return Err(AbsError::dim("permute_rows", self.map.len(), a.rows()));
        }
        Ok(a.select_rows(&self.map))
    }
}

/// Free-function form of [`Permutation::apply_inverse`].
pub fn permutation_apply_inverse(p: &Permutation, v: &DenseVector) -> Result<DenseVector> {
    p.apply_inverse(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matvec_examples() {
        let x = DenseVector::from([1.0, 2.0, 3.0]);
        assert_eq!(matvec(&DenseMatrix::identity(3), &x).unwrap(), x);

        let mf = mat(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let y = matvec(&mf, &DenseVector::from([1.5, 0.0, 0.5])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0, 3.0]);

        let one = mat(&[&[2.0]]);
        assert_eq!(
            matvec(&one, &DenseVector::from([3.0])).unwrap().as_slice(),
            &[6.0]
        );
    }

    #[test]
    fn matvec_dimension_error() {
        let err = matvec(&DenseMatrix::identity(3), &DenseVector::zeros(2)).unwrap_err();
        assert!(matches!(err, AbsError::Dimension { .. }));
    }

    #[test]
    fn dot_examples() {
        let d = |a: &[f64], b: &[f64]| dot(&a.into(), &b.into()).unwrap();
        assert_eq!(d(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(d(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), 6.0);
        assert_eq!(d(&[0.0, 1.0, 0.0], &[5.0, 7.0, 9.0]), 7.0);
        assert!(dot(&DenseVector::zeros(2), &DenseVector::zeros(3)).is_err());
    }

    #[test]
    fn swaps() {
        let mut a = DenseMatrix::identity(2);
        a.swap_rows(0, 1).unwrap();
        assert_eq!(a, mat(&[&[0.0, 1.0], &[1.0, 0.0]]));

        let mut b = DenseMatrix::identity(2);
        b.swap_cols(0, 1).unwrap();
        assert_eq!(b, mat(&[&[0.0, 1.0], &[1.0, 0.0]]));

        let orig = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let mut c = orig.clone();
        c.swap_rows(1, 1).unwrap();
        c.swap_cols(2, 2).unwrap();
        assert_eq!(c, orig);

        assert!(matches!(
            c.swap_rows(0, 2),
            Err(AbsError::Index { bound: 2, .. })
        ));
        assert!(matches!(
            c.swap_cols(3, 0),
            Err(AbsError::Index { bound: 3, .. })
        ));
    }

    #[test]
    fn apply_inverse_examples() {
        let v = DenseVector::from([1.0, 2.0, 3.0]);
        assert_eq!(Permutation::identity(3).apply_inverse(&v).unwrap(), v);

        let p = Permutation::from_map(vec![1, 0]).unwrap();
        let w = p.apply_inverse(&DenseVector::from([10.0, 20.0])).unwrap();
        assert_eq!(w.as_slice(), &[20.0, 10.0]);

        // map=[2,0,1], (x,y,z) -> (y,z,x)
        let p = Permutation::from_map(vec![2, 0, 1]).unwrap();
        let w = p.apply_inverse(&v).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 3.0, 1.0]);
        assert_eq!(p.apply(&w).unwrap(), v);

        assert!(p.apply_inverse(&DenseVector::zeros(2)).is_err());
        assert!(Permutation::from_map(vec![0, 0]).is_err());
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0e3..1.0e3f64, n)
    }

    proptest! {
        #[test]
        fn identity_matvec(x in vec_strategy(7)) {
            let x = DenseVector::from(x);
            prop_assert_eq!(matvec(&DenseMatrix::identity(7), &x).unwrap(), x);
        }

        #[test]
        fn dot_symmetric(u in vec_strategy(9), v in vec_strategy(9)) {
            let (u, v) = (DenseVector::from(u), DenseVector::from(v));
            prop_assert_eq!(dot(&u, &v).unwrap().to_bits(), dot(&v, &u).unwrap().to_bits());
        }

        #[test]
        fn swap_involution(data in vec_strategy(12), i in 0usize..3, k in 0usize..3, j in 0usize..4, l in 0usize..4) {
            let a = DenseMatrix::from_row_major(3, 4, data).unwrap();
            let mut b = a.clone();
            b.swap_rows(i, k).unwrap();
            b.swap_rows(i, k).unwrap();
            b.swap_cols(j, l).unwrap();
            b.swap_cols(j, l).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn swap_sequence_matches_permutation_matrix(
            swaps in prop::collection::vec((0usize..8, 0usize..8), 0..12),
            v in vec_strategy(8),
        ) {
            let v = DenseVector::from(v);
            let mut p = Permutation::identity(8);
            let mut q = DenseMatrix::identity(8);
            for &(i, k) in &swaps {
                p.swap(i, k);
                q.swap_cols(i, k).unwrap();
            }
            let via_matrix = matvec(&q, &v).unwrap();
            let via_map = p.apply_inverse(&v).unwrap();
            prop_assert_eq!(&via_matrix, &via_map);
            prop_assert_eq!(p.apply(&via_map).unwrap(), v);
        }
    }
}
