//! Column-major dense complex matrices with a blocked LU factorization.
//!
//! The level solver spends nearly all its time here, so the rank-k updates
//! go through `matrixmultiply::zgemm`.

use std::ops::{Index, IndexMut};

use matrixmultiply::CGemmOption;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const BLOCK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![ZERO; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Wraps column-major storage.
    pub fn from_col_major(nrows: usize, ncols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        // SAFETY: all three buffers are sized for the dimensions passed.
        unsafe {
            gemm(
                self.nrows,
                self.ncols,
                other.ncols,
                ONE,
                self.data.as_ptr(),
                self.nrows,
                other.data.as_ptr(),
                other.nrows,
                ZERO,
                out.data.as_mut_ptr(),
                out.nrows,
            );
        }
        out
    }

    /// `self -= a * b`.
    pub fn sub_matmul(&mut self, a: &Self, b: &Self) {
        assert_eq!(a.ncols, b.nrows);
        assert_eq!((self.nrows, self.ncols), (a.nrows, b.ncols));
        if a.ncols == 0 {
            return;
        }
        // SAFETY: shapes checked above; `self` does not alias `a` or `b`.
        unsafe {
            gemm(
                a.nrows,
                a.ncols,
                b.ncols,
                -ONE,
                a.data.as_ptr(),
                a.nrows,
                b.data.as_ptr(),
                b.nrows,
                ONE,
                self.data.as_mut_ptr(),
                self.nrows,
            );
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![ZERO; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let m = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)].conj())
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// LU factorization with partial pivoting. Fails on an exactly zero pivot.
    pub fn lu(self) -> Result<Lu, SingularPivot> {
        assert_eq!(self.nrows, self.ncols, "LU of a non-square matrix");
        let n = self.nrows;
        let mut a = self.data;
        let mut piv = vec![0usize; n];
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            let k1 = k0 + kb;
            for j in k0..k1 {
                let col = &a[j * n..(j + 1) * n];
                let mut p = j;
                let mut best = col[j].norm_sqr();
                for (i, v) in col.iter().enumerate().skip(j + 1) {
                    let m = v.norm_sqr();
                    if m > best {
                        best = m;
                        p = i;
                    }
                }
                if best == 0.0 {
                    return Err(SingularPivot { index: j });
                }
                piv[j] = p;
                if p != j {
                    for c in 0..n {
                        a.swap(c * n + j, c * n + p);
                    }
                }
                let inv = ONE / a[j * n + j];
                for v in &mut a[j * n + j + 1..(j + 1) * n] {
                    *v *= inv;
                }
                // rank-1 update inside the panel
                for c in j + 1..k1 {
                    let ujc = a[c * n + j];
                    if ujc == ZERO {
                        continue;
                    }
                    let (lo, hi) = a.split_at_mut(c * n);
                    let lcol = &lo[j * n + j + 1..(j + 1) * n];
                    for (x, &l) in hi[j + 1..n].iter_mut().zip(lcol) {
                        *x -= l * ujc;
                    }
                }
            }
            if k1 < n {
                // U12 = L11^{-1} A12
                for c in k1..n {
                    for j in k0..k1 {
                        let ujc = a[c * n + j];
                        if ujc == ZERO {
                            continue;
                        }
                        for i in j + 1..k1 {
                            let l = a[j * n + i];
                            a[c * n + i] -= l * ujc;
                        }
                    }
                }
                // A22 -= L21 U12
                let m = n - k1;
                let p = a.as_mut_ptr();
                // SAFETY: L21, U12 and A22 are disjoint blocks of the n×n buffer.
                unsafe {
                    gemm(
                        m,
                        kb,
                        m,
                        -ONE,
                        p.add(k0 * n + k1),
                        n,
                        p.add(k1 * n + k0),
                        n,
                        ONE,
                        p.add(k1 * n + k1),
                        n,
                    );
                }
            }
            k0 = k1;
        }
        Ok(Lu { n, lu: a, piv })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i + j * self.nrows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i + j * self.nrows]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularPivot {
    pub index: usize,
}

/// Packed LU factors: unit lower triangle below the diagonal, U on and above.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of smallest to largest |U_ii|; a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.n;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in 0..n {
            let d = self.lu[j * n + j].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n == 0 {
            1.0
        } else {
            lo / hi
        }
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut DenseMatrix) {
        let n = self.n;
        assert_eq!(b.nrows, n);
        let nrhs = b.ncols;
        if n == 0 || nrhs == 0 {
            return;
        }
        for (j, &p) in self.piv.iter().enumerate() {
            if p != j {
                for c in 0..nrhs {
                    b.data.swap(c * n + j, c * n + p);
                }
            }
        }
        let a = &self.lu;
        let mut s = 0;
        while s < n {
            let e = (s + BLOCK).min(n);
            for c in 0..nrhs {
                let col = &mut b.data[c * n..(c + 1) * n];
                for j in s..e {
                    let bj = col[j];
                    if bj == ZERO {
                        continue;
                    }
                    for i in j + 1..e {
                        col[i] -= a[j * n + i] * bj;
                    }
                }
            }
            if e < n {
                let bp = b.data.as_mut_ptr();
                // SAFETY: rows [s,e) and [e,n) of b are disjoint.
                unsafe {
                    gemm(
                        n - e,
                        e - s,
                        nrhs,
                        -ONE,
                        a.as_ptr().add(s * n + e),
                        n,
                        bp.add(s),
                        n,
                        ONE,
                        bp.add(e),
                        n,
                    );
                }
            }
            s = e;
        }
        let mut e = n;
        while e > 0 {
            let s = e.saturating_sub(BLOCK);
            for c in 0..nrhs {
                let col = &mut b.data[c * n..(c + 1) * n];
                for j in (s..e).rev() {
                    col[j] /= a[j * n + j];
                    let bj = col[j];
                    if bj == ZERO {
                        continue;
                    }
                    for i in s..j {
                        col[i] -= a[j * n + i] * bj;
                    }
                }
            }
            if s > 0 {
                let bp = b.data.as_mut_ptr();
                // SAFETY: rows [0,s) and [s,e) of b are disjoint.
                unsafe {
                    gemm(
                        s,
                        e - s,
                        nrhs,
                        -ONE,
                        a.as_ptr().add(s * n),
                        n,
                        bp.add(s),
                        n,
                        ONE,
                        bp,
                        n,
                    );
                }
            }
            e = s;
        }
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut m = DenseMatrix::from_col_major(b.len(), 1, b.to_vec());
        self.solve_in_place(&mut m);
        m.data
    }
}

/// `C = alpha A B + beta C` on column-major blocks with leading dimensions.
#[allow(clippy::too_many_arguments)]
unsafe fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: Complex64,
    a: *const Complex64,
    lda: usize,
    b: *const Complex64,
    ldb: usize,
    beta: Complex64,
    c: *mut Complex64,
    ldc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    // Complex64 is repr(C) {re, im}, identical in layout to [f64; 2].
    matrixmultiply::zgemm(
        CGemmOption::Standard,
        CGemmOption::Standard,
        m,
        k,
        n,
        [alpha.re, alpha.im],
        a as *const [f64; 2],
        1,
        lda as isize,
        b as *const [f64; 2],
        1,
        ldb as isize,
        [beta.re, beta.im],
        c as *mut [f64; 2],
        1,
        ldc as isize,
    );
}
