//! Dense row-major complex matrices with LU factorization.

use super::LinalgError;
use crate::scalar::{rf, Real};
use num_complex::Complex;
use std::ops::{Index, IndexMut};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Two disjoint row views (for rank-1 updates).
    fn two_rows_mut(&mut self, i: usize, k: usize) -> (&mut [Complex<T>], &[Complex<T>]) {
        assert_ne!(i, k);
        let cols = self.cols;
        if i > k {
            let (a, b) = self.data.split_at_mut(i * cols);
            (&mut b[..cols], &a[k * cols..(k + 1) * cols])
        } else {
            let (a, b) = self.data.split_at_mut(k * cols);
            let (ai, bk) = (&mut a[i * cols..(i + 1) * cols], &b[..cols]);
            (ai, bk)
        }
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (a, b) in row.iter().zip(x) {
                acc = acc + *a * *b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..orow.len() {
                    out_row[j] = out_row[j] + aik * orow[j];
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.data
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `self - sigma * other`.
    pub fn sub_scaled(&self, other: &Self, sigma: Complex<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o = *o - sigma * *b;
        }
        out
    }

    pub fn lu(self) -> Result<LuFactor<T>, LinalgError> {
        LuFactor::new(self)
    }
}

impl<T: Real> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct LuFactor<T: Real> {
    lu: CMat<T>,
    piv: Vec<usize>,
}

impl<T: Real> LuFactor<T> {
    pub fn new(mut a: CMat<T>) -> Result<Self, LinalgError> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU requires a square matrix");
        let mut piv = vec![0usize; n];
        let scale = a.norm_fro().max(rf(1e-300));
        for k in 0..n {
            // pivot search
            let mut p = k;
            let mut best = a[(k, k)].norm_sqr();
            for i in k + 1..n {
                let v = a[(i, k)].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best.sqrt() <= rf::<T>(1e-15) * scale / rf(n as f64) {
                return Err(LinalgError::Singular {
                    step: k,
                    pivot: best.sqrt().to_f64().unwrap_or(0.0),
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
            }
            let inv = Complex::new(T::one(), T::zero()) / a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] * inv;
                a[(i, k)] = l;
                if l != Complex::new(T::zero(), T::zero()) {
                    let (ri, rk) = a.two_rows_mut(i, k);
                    for j in k + 1..n {
                        ri[j] = ri[j] - l * rk[j];
                    }
                }
            }
        }
        Ok(Self { lu: a, piv })
    }

    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_in_place(&self, b: &mut [Complex<T>]) {
        let n = self.n();
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        // forward: L y = Pb (unit lower)
        for i in 1..n {
            let row = self.lu.row(i);
            let mut acc = b[i];
            for j in 0..i {
                acc = acc - row[j] * b[j];
            }
            b[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = b[i];
            for j in i + 1..n {
                acc = acc - row[j] * b[j];
            }
            b[i] = acc / row[i];
        }
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn rand_mat(n: usize, seed: u64) -> CMat<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_fn(n, n, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn lu_solves() {
        let n = 40;
        let a = rand_mat(n, 42);
        let x_true: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let b = a.matvec(&x_true);
        let f = a.clone().lu().unwrap();
        let x = f.solve(&b);
        let err: f64 = x
            .iter()
            .zip(&x_true)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err={err}");
    }

    #[test]
    fn singular_detected() {
        let mut a = CMat::<f64>::zeros(3, 3);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(1.0, 0.0);
        // row 2 zero
        assert!(a.lu().is_err());
    }
}
