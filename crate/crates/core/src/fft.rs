//! Minimal radix-2 FFT for power-of-two trace lengths.

use crate::scalar::{rf, Real};
use num_complex::Complex;

/// In-place forward DFT (no normalization): `X_k = Σ_j x_j e^{-2πi jk/N}`.
/// Length must be a power of two.
pub fn fft<T: Real>(data: &mut [Complex<T>]) {
    transform(data, false)
}

/// In-place inverse DFT including the 1/N factor.
pub fn ifft<T: Real>(data: &mut [Complex<T>]) {
    transform(data, true);
    let n = rf::<T>(data.len() as f64);
    for v in data.iter_mut() {
        *v = *v / n;
    }
}

fn transform<T: Real>(data: &mut [Complex<T>], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            data.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2usize;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex::new(rf::<T>(ang.cos()), rf::<T>(ang.sin()));
        let mut i = 0;
        while i < n {
            let mut w = Complex::new(T::one(), T::zero());
            for k in 0..len / 2 {
                let u = data[i + k];
                let v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w = w * wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn matches_direct_dft() {
        let n = 64;
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos()))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &xj) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                acc += xj * Complex64::new(ang.cos(), ang.sin());
            }
            assert!((y[k] - acc).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip() {
        let n = 128;
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, -(j as f64))).collect();
        let mut y = x.clone();
        fft(&mut y);
        ifft(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
