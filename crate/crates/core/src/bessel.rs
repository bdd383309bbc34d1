//! Bessel functions of the first/second kind, Hankel functions and
//! spherical Bessel functions, for the moderate orders and arguments the
//! experiments need.
//!
//! `J_n` uses Miller's backward recurrence normalized by
//! `J_0 + 2 Σ J_{2k} = 1`, which stays accurate through the turning point.
//! `Y_0`, `Y_1` come from the ascending series and higher orders from the
//! (stable) forward recurrence. Spherical `j_l` uses backward recurrence
//! normalized by `Σ (2l+1) j_l^2 = 1`.

use crate::scalar::{rf, Real};
use num_complex::Complex;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

/// `J_n(x)` for integer `n` (any sign) and real `x`.
pub fn bessel_j<T: Real>(n: i32, x: T) -> T {
    let (n_abs, sign_n) = if n < 0 {
        ((-n) as usize, if n % 2 != 0 { -T::one() } else { T::one() })
    } else {
        (n as usize, T::one())
    };
    let (x_abs, sign_x) = if x < T::zero() {
        (-x, if n_abs % 2 == 1 { -T::one() } else { T::one() })
    } else {
        (x, T::one())
    };
    sign_n * sign_x * bessel_j_nonneg(n_abs, x_abs)
}

fn bessel_j_nonneg<T: Real>(n: usize, x: T) -> T {
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    let xf = x.to_f64().unwrap();
    let start = n.max(xf.ceil() as usize) + 26;
    let tiny = T::min_positive_value().sqrt();
    let huge = T::max_value().sqrt() * rf(1e-3);
    let mut jp1 = T::zero();
    let mut j = tiny;
    let mut result = T::zero();
    let mut norm = T::zero();
    let two = rf::<T>(2.0);
    for m in (0..=start).rev() {
        let jm1 = rf::<T>(2.0 * (m as f64 + 1.0)) / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_m; jp1 holds J_{m+1}
        if m == n {
            result = j;
        }
        if m % 2 == 0 {
            norm = norm + if m == 0 { j } else { two * j };
        }
        // Rescale to avoid overflow of the unnormalized recurrence.
        if j.abs() > huge {
            let scale = T::one() / huge;
            j = j * scale;
            jp1 = jp1 * scale;
            norm = norm * scale;
            result = result * scale;
        }
    }
    result / norm
}

/// `J_n'(x)`.
pub fn bessel_j_prime<T: Real>(n: i32, x: T) -> T {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        (bessel_j(n - 1, x) - bessel_j(n + 1, x)) * rf::<T>(0.5)
    }
}

/// `Y_n(x)` for `x > 0`, integer `n ≥ 0` (negative orders via symmetry).
pub fn bessel_y<T: Real>(n: i32, x: T) -> T {
    assert!(x > T::zero(), "Y_n requires x > 0");
    let (n_abs, sign) = if n < 0 {
        ((-n) as usize, if n % 2 != 0 { -T::one() } else { T::one() })
    } else {
        (n as usize, T::one())
    };
    let y0 = bessel_y0(x);
    if n_abs == 0 {
        return sign * y0;
    }
    let y1 = bessel_y1(x);
    if n_abs == 1 {
        return sign * y1;
    }
    let mut ym1 = y0;
    let mut y = y1;
    for m in 1..n_abs {
        let yp1 = rf::<T>(2.0 * m as f64) / x * y - ym1;
        ym1 = y;
        y = yp1;
    }
    sign * y
}

fn bessel_y0<T: Real>(x: T) -> T {
    let j0 = bessel_j(0, x);
    let half_x = x * rf::<T>(0.5);
    let log_term = (half_x.ln() + rf(EULER_GAMMA)) * j0;
    // Σ_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2
    let q = half_x * half_x;
    let mut term = T::one();
    let mut hk = T::zero();
    let mut sum = T::zero();
    for k in 1..200 {
        let kf = rf::<T>(k as f64);
        term = term * q / (kf * kf);
        hk += T::one() / kf;
        let contrib = if k % 2 == 1 { term * hk } else { -(term * hk) };
        sum = sum + contrib;
        if term.abs() * hk < rf::<T>(1e-18) * sum.abs().max(T::one()) {
            break;
        }
    }
    rf::<T>(2.0 / std::f64::consts::PI) * (log_term + sum)
}

fn bessel_y1<T: Real>(x: T) -> T {
    let j1 = bessel_j(1, x);
    let half_x = x * rf::<T>(0.5);
    let log_term = (half_x.ln() + rf(EULER_GAMMA)) * j1;
    // Σ_{k>=0} (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1} / (k! (k+1)!)
    let q = half_x * half_x;
    let mut term = half_x; // k = 0: (x/2) / (0! 1!)
    let mut hk = T::zero();
    let mut hk1 = T::one();
    let mut sum = term * (hk + hk1);
    for k in 1..200 {
        let kf = rf::<T>(k as f64);
        term = term * q / (kf * (kf + T::one()));
        hk += T::one() / kf;
        hk1 += T::one() / (kf + T::one());
        let c = term * (hk + hk1);
        sum = sum + if k % 2 == 0 { c } else { -c };
        if c.abs() < rf::<T>(1e-18) * sum.abs().max(T::one()) {
            break;
        }
    }
    rf::<T>(2.0 / std::f64::consts::PI) * (log_term - T::one() / x) - sum / rf::<T>(std::f64::consts::PI)
}

/// `Y_n'(x)`.
pub fn bessel_y_prime<T: Real>(n: i32, x: T) -> T {
    if n == 0 {
        -bessel_y(1, x)
    } else {
        (bessel_y(n - 1, x) - bessel_y(n + 1, x)) * rf::<T>(0.5)
    }
}

/// Hankel function of the first kind `H_n^{(1)}(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1<T: Real>(n: i32, x: T) -> Complex<T> {
    Complex::new(bessel_j(n, x), bessel_y(n, x))
}

/// `H_n^{(1)'}(x)`.
pub fn hankel1_prime<T: Real>(n: i32, x: T) -> Complex<T> {
    Complex::new(bessel_j_prime(n, x), bessel_y_prime(n, x))
}

/// `J_n(z)` for complex argument via the ascending series (|z| ≲ 30).
pub fn bessel_j_complex<T: Real>(n: i32, z: Complex<T>) -> Complex<T> {
    let (n_abs, sign) = if n < 0 {
        ((-n) as u32, if n % 2 != 0 { -T::one() } else { T::one() })
    } else {
        (n as u32, T::one())
    };
    debug_assert!(
        z.norm() <= rf(40.0),
        "ascending series loses accuracy for |z| > 40"
    );
    let half = z * rf::<T>(0.5);
    // leading (z/2)^n / n!
    let mut lead = Complex::new(T::one(), T::zero());
    for j in 1..=n_abs {
        lead = lead * half / rf::<T>(j as f64);
    }
    let q = half * half;
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    for k in 1..250 {
        let kf = rf::<T>(k as f64);
        term = -term * q / (kf * rf::<T>((k + n_abs as usize) as f64));
        sum = sum + term;
        if term.norm() < rf::<T>(1e-18) * sum.norm().max(T::one()) {
            break;
        }
    }
    lead * sum * sign
}

/// `J_n'(z)` for complex argument.
pub fn bessel_j_complex_prime<T: Real>(n: i32, z: Complex<T>) -> Complex<T> {
    if n == 0 {
        -bessel_j_complex(1, z)
    } else {
        (bessel_j_complex(n - 1, z) - bessel_j_complex(n + 1, z)) * rf::<T>(0.5)
    }
}

/// Spherical Bessel function `j_l(t)`, `l ≥ 0`, `t ≥ 0`.
pub fn spherical_j<T: Real>(l: usize, t: T) -> T {
    if t == T::zero() {
        return if l == 0 { T::one() } else { T::zero() };
    }
    if l == 0 {
        return if t.abs() < rf(1e-4) {
            // sin t / t with the series to avoid cancellation noise at tiny t
            let t2 = t * t;
            T::one() - t2 / rf(6.0) + t2 * t2 / rf(120.0)
        } else {
            t.sin() / t
        };
    }
    // Backward recurrence normalized by Σ (2l+1) j_l^2 = 1.
    let tf = t.to_f64().unwrap();
    let start = l.max(tf.ceil() as usize) + 22;
    let tiny = T::min_positive_value().powf(rf(0.25));
    let huge = T::max_value().powf(rf(0.25));
    let mut jp1 = T::zero();
    let mut j = tiny;
    let mut result = T::zero();
    let mut norm = T::zero();
    for m in (0..=start).rev() {
        let jm1 = rf::<T>(2.0 * m as f64 + 3.0) / t * j - jp1;
        jp1 = j;
        j = jm1;
        if m == l {
            result = j;
        }
        norm = norm + rf::<T>(2.0 * m as f64 + 1.0) * j * j;
        if j.abs() > huge {
            let scale = T::one() / huge;
            j = j * scale;
            jp1 = jp1 * scale;
            norm = norm * scale * scale;
            result = result * scale;
        }
    }
    let scale = T::one() / norm.sqrt();
    // Fix the overall sign using j_0 = sin(t)/t.
    let j0_true = t.sin() / t;
    let sign = if (j * scale - j0_true).abs() <= (j * scale + j0_true).abs() {
        T::one()
    } else {
        -T::one()
    };
    result * scale * sign
}

/// Double factorial `(2l+1)!!` as the working scalar.
pub fn odd_double_factorial<T: Real>(l: usize) -> T {
    let mut acc = T::one();
    let mut k = 1usize;
    while k <= 2 * l + 1 {
        acc = acc * rf::<T>(k as f64);
        k += 2;
    }
    acc
}
