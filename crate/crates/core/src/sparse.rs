//! Compressed-sparse-column complex matrices.
//!
//! Every constructor yields the canonical layout: row indices sorted within
//! each column, duplicates summed, exact zeros dropped. Two matrices built
//! from the same triplets are therefore bit-identical.

use num_complex::Complex64;

use crate::dense::DenseMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for (j, &d) in diag.iter().enumerate() {
            if d != ZERO {
                row_idx.push(j);
                values.push(d);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: n,
            ncols: n,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in input order.
    ///
    /// # Panics
    /// If an index is out of bounds.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        for &(i, j, _) in &entries {
            assert!(
                i < nrows && j < ncols,
                "triplet ({i}, {j}) outside {nrows}x{ncols}"
            );
        }
        // stable sort keeps duplicate summation order deterministic
        entries.sort_by_key(|&(i, j, _)| (j, i));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        for j in 0..ncols {
            while k < entries.len() && entries[k].1 == j {
                let i = entries[k].0;
                let mut v = entries[k].2;
                k += 1;
                while k < entries.len() && entries[k].1 == j && entries[k].0 == i {
                    v += entries[k].2;
                    k += 1;
                }
                if v != ZERO {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr[j + 1] = row_idx.len();
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Converts a dense matrix, dropping entries with modulus ≤ `drop_tol`.
    pub fn from_dense(m: &DenseMatrix, drop_tol: f64) -> Self {
        let mut col_ptr = Vec::with_capacity(m.ncols() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..m.ncols() {
            for (i, &v) in m.col(j).iter().enumerate() {
                if v != ZERO && v.norm() > drop_tol {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: m.nrows(),
            ncols: m.ncols(),
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[Complex64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => ZERO,
        }
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            r.map(move |p| (self.row_idx[p], j, self.values[p]))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; self.nnz()];
        let mut values = vec![ZERO; self.nnz()];
        // visiting columns in order leaves each output column sorted
        for j in 0..self.ncols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let q = next[i];
                row_idx[q] = j;
                values[q] = self.values[p];
                next[i] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.conj();
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out.drop_zeros();
        out
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Self {
        assert_eq!(
            (self.nrows, self.ncols),
            (other.nrows, other.ncols),
            "shape mismatch in sparse addition"
        );
        let mut col_ptr = Vec::with_capacity(self.ncols + 1);
        let mut row_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        col_ptr.push(0);
        for j in 0..self.ncols {
            let (ra, va) = self.col(j);
            let (rb, vb) = other.col(j);
            let (mut p, mut q) = (0, 0);
            while p < ra.len() || q < rb.len() {
                let (i, v) = if q >= rb.len() || (p < ra.len() && ra[p] < rb[q]) {
                    p += 1;
                    (ra[p - 1], alpha * va[p - 1])
                } else if p >= ra.len() || rb[q] < ra[p] {
                    q += 1;
                    (rb[q - 1], beta * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ra[p - 1], alpha * va[p - 1] + beta * vb[q - 1])
                };
                if v != ZERO {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = Complex64::new(1.0, 0.0);
        self.lincomb(one, other, one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lincomb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Sparse product `self * other` (Gustavson, dense accumulator per column).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch");
        let mut acc = vec![ZERO; self.nrows];
        let mut mark = vec![usize::MAX; self.nrows];
        let mut touched: Vec<usize> = Vec::new();
        let mut col_ptr = Vec::with_capacity(other.ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..other.ncols {
            touched.clear();
            let (rb, vb) = other.col(j);
            for (&k, &bkj) in rb.iter().zip(vb) {
                let (ra, va) = self.col(k);
                for (&i, &aik) in ra.iter().zip(va) {
                    if mark[i] != j {
                        mark[i] = j;
                        acc[i] = ZERO;
                        touched.push(i);
                    }
                    acc[i] += aik * bkj;
                }
            }
            touched.sort_unstable();
            for &i in &touched {
                if acc[i] != ZERO {
                    row_idx.push(i);
                    values.push(acc[i]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: self.nrows,
            ncols: other.ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        col_ptr.push(0);
        for ja in 0..self.ncols {
            let (ra, va) = self.col(ja);
            for jb in 0..other.ncols {
                let (rb, vb) = other.col(jb);
                for (&ia, &a) in ra.iter().zip(va) {
                    for (&ib, &b) in rb.iter().zip(vb) {
                        let v = a * b;
                        if v != ZERO {
                            row_idx.push(ia * other.nrows + ib);
                            values.push(v);
                        }
                    }
                }
                col_ptr.push(row_idx.len());
            }
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.fill(ZERO);
        self.mul_vec_acc(x, y);
    }

    /// `y += self * x`.
    pub fn mul_vec_acc(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = x^T self` (row vector times matrix), i.e. `self^T x`.
    pub fn tr_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.nrows);
        (0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&i, &v)| x[i] * v).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.nrows];
        for (i, _, v) in self.iter() {
            rows[i] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// True when `self == self†` entrywise within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.nrows == self.ncols && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Principal submatrix on `idx` (rows and columns), in the order given.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.nrows];
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let mut col_ptr = Vec::with_capacity(idx.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut buf: Vec<(usize, Complex64)> = Vec::new();
        col_ptr.push(0);
        for &j in idx {
            buf.clear();
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                if local[i] != usize::MAX {
                    buf.push((local[i], v));
                }
            }
            buf.sort_unstable_by_key(|e| e.0);
            for &(i, v) in &buf {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: idx.len(),
            ncols: idx.len(),
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Removes entries with modulus ≤ `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().filter(|e| e.2.norm() > tol),
        )
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != ZERO) {
            return;
        }
        *self = Self::from_triplets(self.nrows, self.ncols, self.iter());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> CscMatrix {
        CscMatrix::from_triplets(
            3,
            3,
            vec![
                (2, 0, c(1.0, 0.0)),
                (0, 0, c(2.0, 1.0)),
                (1, 2, c(0.0, 3.0)),
                (2, 0, c(-1.0, 0.0)),
                (0, 1, c(4.0, 0.0)),
                (0, 1, c(1.0, 0.0)),
            ],
        )
    }

    #[test]
    fn triplets_are_canonical() {
        let m = sample();
        assert_eq!(m.col_ptr(), &[0, 1, 2, 3]);
        assert_eq!(m.row_idx(), &[0, 0, 1]);
        assert_eq!(m.get(0, 1), c(5.0, 0.0));
        assert_eq!(m.get(2, 0), c(0.0, 0.0));
    }

    #[test]
    fn transpose_and_adjoint() {
        let m = sample();
        let t = m.transpose();
        assert_eq!(t.get(2, 1), c(0.0, 3.0));
        assert_eq!(m.adjoint().get(2, 1), c(0.0, -3.0));
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = sample();
        let b = a.adjoint().add(&CscMatrix::identity(3));
        let sparse = a.matmul(&b).to_dense();
        let dense = a.to_dense().matmul(&b.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                assert!((sparse[(i, j)] - dense[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kron_layout() {
        let a = CscMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0))]);
        let b = CscMatrix::from_triplets(2, 2, vec![(1, 0, c(2.0, 0.0))]);
        let k = a.kron(&b);
        assert_eq!(k.nnz(), 1);
        assert_eq!(k.get(1, 2), c(2.0, 0.0));
    }

    #[test]
    fn lincomb_drops_cancellations() {
        let a = sample();
        assert_eq!(a.sub(&a).nnz(), 0);
    }

    #[test]
    fn submatrix_reorders() {
        let a = sample();
        let s = a.principal_submatrix(&[1, 0]);
        assert_eq!(s.get(1, 0), c(5.0, 0.0));
        assert_eq!(s.get(1, 1), c(2.0, 1.0));
    }
}
