//! Banded complex LU with partial pivoting (LAPACK gbtrf-style storage).

use super::LinalgError;
use crate::scalar::{rf, Real};
use num_complex::Complex;

/// Band matrix with `kl` sub- and `ku` superdiagonals, stored with room for
/// the `kl` extra superdiagonals that pivoting fills in.
#[derive(Debug, Clone)]
pub struct BandMat<T: Real> {
    n: usize,
    kl: usize,
    ku: usize,
    /// `data[d * n + j]` holds `A[i, j]` with `d = kl + ku + i - j`;
    /// `d` ranges over `0..(2*kl + ku + 1)`.
    data: Vec<Complex<T>>,
}

impl<T: Real> BandMat<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![Complex::new(T::zero(), T::zero()); (2 * kl + ku + 1) * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let d = self.kl + self.ku + i - j;
        d * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        if i + self.kl + self.ku < j || j + self.kl < i {
            return Complex::new(T::zero(), T::zero());
        }
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        assert!(
            i + self.kl + self.ku >= j && j + self.kl >= i,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: Complex<T>) {
        let k = self.idx(i, j);
        self.data[k] = self.data[k] + v;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Factor in place.
    pub fn lu(mut self) -> Result<BandLu<T>, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let kb = self.kl + self.ku; // effective upper bandwidth after pivoting
        let mut piv = vec![0usize; n];
        let scale = self
            .data
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
            .max(rf(1e-300));
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = self.get(j, j).norm_sqr();
            for q in 1..=km {
                let v = self.get(j + q, j).norm_sqr();
                if v > best {
                    best = v;
                    p = q;
                }
            }
            piv[j] = j + p;
            if best.sqrt() <= rf::<T>(1e-16) * scale {
                return Err(LinalgError::Singular {
                    step: j,
                    pivot: best.sqrt().to_f64().unwrap_or(0.0),
                });
            }
            if p != 0 {
                let jmax = (j + kb).min(n - 1);
                for c in j..=jmax {
                    let a = self.get(j, c);
                    let b = self.get(j + p, c);
                    self.set(j, c, b);
                    self.set(j + p, c, a);
                }
            }
            let inv = Complex::new(T::one(), T::zero()) / self.get(j, j);
            for q in 1..=km {
                let l = self.get(j + q, j) * inv;
                self.set(j + q, j, l);
            }
            let jmax = (j + kb).min(n - 1);
            for c in j + 1..=jmax {
                let ujc = self.get(j, c);
                if ujc != Complex::new(T::zero(), T::zero()) {
                    for q in 1..=km {
                        let l = self.get(j + q, j);
                        let cur = self.get(j + q, c);
                        self.set(j + q, c, cur - l * ujc);
                    }
                }
            }
        }
        Ok(BandLu { mat: self, piv })
    }
}

/// Factored band matrix.
pub struct BandLu<T: Real> {
    mat: BandMat<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn solve_in_place(&self, b: &mut [Complex<T>]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let kb = self.mat.kl + self.mat.ku;
        assert_eq!(b.len(), n);
        // L (with row exchanges interleaved, as in gbtrs)
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for q in 1..=km {
                let l = self.mat.get(j + q, j);
                b[j + q] = b[j + q] - l * b[j];
            }
        }
        // U
        for i in (0..n).rev() {
            let jmax = (i + kb).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=jmax {
                acc = acc - self.mat.get(i, j) * b[j];
            }
            b[i] = acc / self.mat.get(i, i);
        }
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
