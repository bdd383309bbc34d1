//! The planar CGO solution `u0(sx) = exp(-sqrt(sr) e^{i θ/2})`, its exact
//! sector and boundary integrals, decay-rate fits and the boundary-expansion
//! check against the closed-form leading term.

use crate::geometry::Sector;
use crate::herglotz::FourierKernel;
use crate::quad::{gk_adaptive, graded_breakpoints, quad_sector_polar, QuadError, Tol};
use crate::scalar::{rf, Real};
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CgoError {
    #[error("point lies on the branch cut (negative real axis)")]
    BranchCut,
    #[error("gradient is singular at r = 0")]
    OriginSingularity,
    #[error("s must be positive, got {0}")]
    BadS(f64),
    #[error("decay fit needs at least 5 grid points, got {0}")]
    TooFewSamples(usize),
    #[error("decay fit requires positive samples; sample {index} is {value}")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("boundary expansion requires k*h < 1, got k*h = {0}")]
    KhTooLarge(f64),
    #[error("quadrature failure: {0}")]
    Quad(#[from] QuadError),
}

/// CGO frequency parameter `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgoParams<T: Real> {
    s: T,
}

impl<T: Real> CgoParams<T> {
    pub fn new(s: T) -> Result<Self, CgoError> {
        if s > T::zero() {
            Ok(Self { s })
        } else {
            Err(CgoError::BadS(s.to_f64().unwrap_or(f64::NAN)))
        }
    }

    pub fn s(&self) -> T {
        self.s
    }
}

/// Unit-modulus phase `μ(θ) = -cos(θ/2+π) - i sin(θ/2+π) = e^{iθ/2}`.
pub fn mu<T: Real>(theta: T) -> Complex<T> {
    let half = theta * rf::<T>(0.5);
    let shifted = half + T::PI();
    Complex::new(-shifted.cos(), -shifted.sin())
}

/// `ω(θ) = -cos(θ/2+π) = Re μ(θ)`.
pub fn omega<T: Real>(theta: T) -> T {
    -(theta * rf::<T>(0.5) + T::PI()).cos()
}

/// `μ(θ_m)^{-2} + μ(θ_M)^{-2}`; algebraically `e^{-iθ_m} + e^{-iθ_M}`.
pub fn mu_sum<T: Real>(theta_m: T, theta_max: T) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    let a = mu(theta_m);
    let b = mu(theta_max);
    one / (a * a) + one / (b * b)
}

/// `u0(s x)` in polar coordinates; `θ` must avoid the branch cut `θ = ±π`.
pub fn eval_u0_polar<T: Real>(s: T, r: T, theta: T) -> Result<Complex<T>, CgoError> {
    if s <= T::zero() {
        return Err(CgoError::BadS(s.to_f64().unwrap_or(f64::NAN)));
    }
    if r < T::zero() || theta <= -T::PI() || theta >= T::PI() {
        return Err(CgoError::BranchCut);
    }
    Ok(eval_u0_unchecked(s, r, theta))
}

#[inline]
pub(crate) fn eval_u0_unchecked<T: Real>(s: T, r: T, theta: T) -> Complex<T> {
    // exp(sqrt(sr) (cos(θ/2+π) + i sin(θ/2+π))) = exp(-sqrt(sr) μ(θ))
    let amp = (s * r).sqrt();
    (-mu(theta) * amp).exp()
}

/// `u0(s x)` at a Cartesian point; errors on the closed negative real axis.
pub fn eval_u0<T: Real>(s: T, x: [T; 2]) -> Result<Complex<T>, CgoError> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == T::zero() {
        // exponent vanishes
        return Ok(Complex::new(T::one(), T::zero()));
    }
    if x[1] == T::zero() && x[0] < T::zero() {
        return Err(CgoError::BranchCut);
    }
    let theta = x[1].atan2(x[0]);
    eval_u0_polar(s, r, theta)
}

/// Cartesian gradient of `u0(s x)`:
/// `∂_1 u0 = -(1/2) sqrt(s/r) e^{-iθ/2} u0`, `∂_2 u0 = i ∂_1 u0`.
pub fn grad_u0<T: Real>(s: T, x: [T; 2]) -> Result<[Complex<T>; 2], CgoError> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == T::zero() {
        return Err(CgoError::OriginSingularity);
    }
    if x[1] == T::zero() && x[0] < T::zero() {
        return Err(CgoError::BranchCut);
    }
    let theta = x[1].atan2(x[0]);
    let u = eval_u0_unchecked(s, r, theta);
    let half_theta = theta * rf::<T>(0.5);
    let phase = Complex::new(half_theta.cos(), -half_theta.sin());
    let mag = (s / r).sqrt() * rf::<T>(0.5);
    let d1 = -phase * u * mag;
    let d2 = d1 * Complex::new(T::zero(), T::one());
    Ok([d1, d2])
}

/// Radial derivative `∂_r u0(sx) = -(1/2) sqrt(s/r) μ(θ) u0`.
pub fn du0_dr<T: Real>(s: T, r: T, theta: T) -> Result<Complex<T>, CgoError> {
    if r <= T::zero() {
        return Err(CgoError::OriginSingularity);
    }
    let u = eval_u0_polar(s, r, theta)?;
    Ok(-mu(theta) * u * ((s / r).sqrt() * rf::<T>(0.5)))
}

/// Exact integral of `u0(sx)` over the full (untruncated) sector:
/// `6i (e^{-2iθ_M} - e^{-2iθ_m}) s^{-2}`.
pub fn sector_integral_u0<T: Real>(theta_m: T, theta_max: T, s: T) -> Complex<T> {
    let two = rf::<T>(2.0);
    let i6 = Complex::new(T::zero(), rf::<T>(6.0));
    let em = Complex::new(T::zero(), -two * theta_max).exp();
    let e0 = Complex::new(T::zero(), -two * theta_m).exp();
    i6 * (em - e0) / (s * s)
}

/// Exact integral of `u0` along the ray `θ` over `r ∈ (0,h)`:
/// `2 s^{-1} (μ^{-2} - μ^{-2} e^{-√(sh) μ} - μ^{-1} √(sh) e^{-√(sh) μ})`.
pub fn boundary_integral_u0<T: Real>(theta: T, s: T, h: T) -> Complex<T> {
    let m = mu(theta);
    let one = Complex::new(T::one(), T::zero());
    let minv = one / m;
    let minv2 = minv * minv;
    let t = (s * h).sqrt();
    let decay = (-m * t).exp();
    (minv2 - minv2 * decay - minv * t * decay) * (rf::<T>(2.0) / s)
}

/// Closed-form bound of the weighted sector integral
/// `∫_W |u0| |x|^α ≤ 2 (θ_M-θ_m) Γ(2α+4) δ_W^{-(2α+4)} s^{-(α+2)}`.
pub fn xalpha_bound<T: Real>(sector: &Sector<T>, alpha: T, s: T) -> T {
    let opening = sector.opening();
    let dw = sector.delta_w();
    let g = gamma_fn(rf::<T>(2.0) * alpha + rf(4.0));
    rf::<T>(2.0) * opening * g / dw.powf(rf::<T>(2.0) * alpha + rf(4.0)) / s.powf(alpha + rf(2.0))
}

/// Tail bound `∫_{W\B_h} |u0| ≤ 6 (θ_M-θ_m) δ_W^{-4} s^{-2} e^{-δ_W √(hs)/2}`.
///
/// The estimate is asymptotic: it genuinely dominates the tail once
/// `δ_W √(hs)` is moderately large (≈14 or more).
pub fn tail_bound<T: Real>(sector: &Sector<T>, s: T) -> T {
    let dw = sector.delta_w();
    let opening = sector.opening();
    rf::<T>(6.0) * opening / dw.powi(4) / (s * s) * (-dw * (sector.h() * s).sqrt() * rf(0.5)).exp()
}

/// Squared-norm bound `‖u0‖²_{L²(S_h)} ≤ (θ_M-θ_m) h²/2` (the Θ=0 member of
/// the mean-value family, the only computable one).
pub fn u0_l2_bound<T: Real>(sector: &Sector<T>) -> T {
    sector.opening() * sector.h() * sector.h() * rf(0.5)
}

/// Bound `‖|x|^α u0‖²_{L²(S_h)} ≤ s^{-(2α+2)} 2(θ_M-θ_m) Γ(4α+4) / (4δ_W²)^{2α+2}`.
pub fn weighted_l2_bound<T: Real>(sector: &Sector<T>, alpha: T, s: T) -> T {
    let opening = sector.opening();
    let dw = sector.delta_w();
    let e = rf::<T>(2.0) * alpha + rf(2.0);
    let g = gamma_fn(rf::<T>(4.0) * alpha + rf(4.0));
    rf::<T>(2.0) * opening * g / (rf::<T>(4.0) * dw * dw).powf(e) / s.powf(e)
}

/// Adaptive polar quadrature of a complex integrand over the truncated
/// sector `S_h` (measure `r dr dθ` applied internally).
pub fn quad_sector<T: Real, F>(
    integrand: &F,
    sector: &Sector<T>,
    tol: T,
) -> Result<Complex<T>, CgoError>
where
    F: Fn(T, T) -> Complex<T>,
{
    let q = quad_sector_polar(
        integrand,
        sector.theta_m(),
        sector.theta_max(),
        sector.h(),
        Tol::new(tol, tol),
        100_000,
    )?;
    Ok(q.value)
}

/// Quadrature of `∫_{S_h} u0(sx) dx`.
pub fn quad_u0_over_sector<T: Real>(sector: &Sector<T>, s: T, tol: T) -> Result<Complex<T>, CgoError> {
    quad_sector(&|r, th| eval_u0_unchecked(s, r, th), sector, tol)
}

/// Quadrature of `∫_{S_h} |u0(sx)| |x|^α dx`.
pub fn quad_abs_u0_xalpha<T: Real>(
    sector: &Sector<T>,
    alpha: T,
    s: T,
    tol: T,
) -> Result<T, CgoError> {
    let v = quad_sector(
        &|r: T, th: T| {
            Complex::new(
                r.powf(alpha) * (-(s * r).sqrt() * (th * rf::<T>(0.5)).cos()).exp(),
                T::zero(),
            )
        },
        sector,
        tol,
    )?;
    Ok(v.re)
}

/// Quadrature of `∫_{S_H \ B_h} |u0| dx` for `H = grow*h` (the far part is
/// exponentially negligible once `grow` is moderately large).
pub fn quad_abs_u0_tail<T: Real>(sector: &Sector<T>, s: T, grow: T, tol: T) -> Result<T, CgoError> {
    let h = sector.h();
    let big = h * grow;
    let f = |r: T, th: T| {
        Complex::new((-(s * r).sqrt() * (th * rf::<T>(0.5)).cos()).exp(), T::zero())
    };
    // Integrate over (h, big) by shifting the radial variable.
    let inner_tol = Tol::new(tol, tol);
    let brk: Vec<T> = graded_breakpoints(big - h, 8);
    let span = sector.opening();
    let radial = |th: T| {
        let g = |u: T| {
            let r = h + u;
            f(r, th) * r
        };
        match gk_adaptive(&g, T::zero(), big - h, inner_tol, 20_000, &brk) {
            Ok(q) => q.value,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    };
    let outer = gk_adaptive(
        &radial,
        sector.theta_m(),
        sector.theta_max(),
        Tol::new(tol * span, tol),
        50_000,
        &[],
    )?;
    Ok(outer.value.re)
}

/// Squared `L²(S_h)` norm of `|x|^α u0` by quadrature.
pub fn quad_weighted_l2_sq<T: Real>(sector: &Sector<T>, alpha: T, s: T, tol: T) -> Result<T, CgoError> {
    let two = rf::<T>(2.0);
    let v = quad_sector(
        &|r, th| {
            let a = (-(s * r).sqrt() * (th * rf::<T>(0.5)).cos()).exp();
            Complex::new(r.powf(two * alpha) * a * a, T::zero())
        },
        sector,
        tol,
    )?;
    Ok(v.re)
}

/// Least-squares slope of `log(value)` against `log(s)`, discarding the two
/// smallest grid points (pre-asymptotic regime).
pub fn decay_slope<T: Real, F>(sampler: F, s_grid: &[T]) -> Result<T, CgoError>
where
    F: Fn(T) -> T,
{
    if s_grid.len() < 5 {
        return Err(CgoError::TooFewSamples(s_grid.len()));
    }
    let mut pts: Vec<(T, T)> = Vec::with_capacity(s_grid.len());
    for (i, &s) in s_grid.iter().enumerate() {
        let v = sampler(s);
        if !(v > T::zero()) {
            return Err(CgoError::NonPositiveSample {
                index: i,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        pts.push((s.ln(), v.ln()));
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let used = &pts[2.min(pts.len() - 3)..];
    let n = rf::<T>(used.len() as f64);
    let sx: T = used.iter().map(|p| p.0).sum();
    let sy: T = used.iter().map(|p| p.1).sum();
    let sxx: T = used.iter().map(|p| p.0 * p.0).sum();
    let sxy: T = used.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Report of the boundary-expansion check (closed-form leading term of the
/// ray integrals `I_2^± = ∫ η0 u0 v dσ`).
#[derive(Debug, Clone)]
pub struct BoundaryExpansionReport<T: Real> {
    /// `(s, I2_total, leading_term, |remainder|)` per grid point.
    pub rows: Vec<(T, Complex<T>, Complex<T>, T)>,
    /// Log-log slope of the remainder magnitude.
    pub remainder_slope: T,
    /// Relative error between the closed-form leading term and direct
    /// quadrature of `η0 v(0) ∫ u0` at the largest s.
    pub leading_match_rel_err: T,
}

/// Compare the two-ray boundary integral `∫_{Γ_h^±} η0 u0 v_kernel dσ`
/// against its closed-form leading term and fit the remainder decay.
///
/// Requires `k h < 1` (hypothesis of the boundary expansion).
pub fn boundary_expansion_check<T: Real>(
    sector: &Sector<T>,
    kernel: &FourierKernel<T>,
    eta0: Complex<T>,
    s_grid: &[T],
) -> Result<BoundaryExpansionReport<T>, CgoError> {
    let h = sector.h();
    let kh = kernel.k() * h;
    if !(kh < T::one()) {
        return Err(CgoError::KhTooLarge(kh.to_f64().unwrap_or(f64::NAN)));
    }
    let v0 = kernel.value_at_origin();
    let tol = Tol::new(rf::<T>(1e-13), rf::<T>(1e-12));
    let brk = graded_breakpoints(h, 10);
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let mut total = Complex::new(T::zero(), T::zero());
        let mut lead = Complex::new(T::zero(), T::zero());
        for theta in [sector.theta_m(), sector.theta_max()] {
            let dir = [theta.cos(), theta.sin()];
            let f = |r: T| {
                let x = [dir[0] * r, dir[1] * r];
                eval_u0_unchecked(s, r, theta) * kernel.eval_jacobi_anger(x, 60) * eta0
            };
            let q = gk_adaptive(&f, T::zero(), h, tol, 40_000, &brk)?;
            total = total + q.value;
            lead = lead + eta0 * v0 * boundary_integral_u0(theta, s, h);
        }
        let rem = (total - lead).norm();
        rows.push((s, total, lead, rem));
    }
    let slope = {
        let xs: Vec<T> = rows.iter().map(|r| r.0).collect();
        let pairs: Vec<(T, T)> = rows.iter().map(|r| (r.0, r.3)).collect();
        if pairs.iter().all(|p| p.1 > T::zero()) {
            decay_slope(
                |s| {
                    pairs
                        .iter()
                        .find(|p| p.0 == s)
                        .map(|p| p.1)
                        .unwrap_or(T::one())
                },
                &xs,
            )
            .unwrap_or(T::zero())
        } else {
            T::neg_infinity() // identically-zero remainder (e.g. zero kernel)
        }
    };
    // Leading-term cross-check against direct quadrature of η0 v(0) ∫ u0.
    let s_big = s_grid
        .iter()
        .cloned()
        .fold(T::neg_infinity(), T::max);
    let mut lead_quad = Complex::new(T::zero(), T::zero());
    let mut lead_closed = Complex::new(T::zero(), T::zero());
    for theta in [sector.theta_m(), sector.theta_max()] {
        let f = |r: T| eval_u0_unchecked(s_big, r, theta) * eta0 * v0;
        let q = gk_adaptive(&f, T::zero(), h, tol, 40_000, &brk)?;
        lead_quad = lead_quad + q.value;
        lead_closed = lead_closed + eta0 * v0 * boundary_integral_u0(theta, s_big, h);
    }
    let leading_match_rel_err = (lead_quad - lead_closed).norm() / lead_closed.norm().max(rf(1e-300));
    Ok(BoundaryExpansionReport {
        rows,
        remainder_slope: slope,
        leading_match_rel_err,
    })
}

/// Gamma function (real argument) via the Lanczos approximation.
pub fn gamma_fn<T: Real>(x: T) -> T {
    rf(gamma_f64(x.to_f64().unwrap()))
}

fn gamma_f64(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma_f64(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let g = 7.0;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + g + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sector;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn sym_sector(h: f64) -> Sector<f64> {
        Sector::new(-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3, h).unwrap()
    }

    #[test]
    fn u0_at_origin_is_one() {
        assert_eq!(eval_u0(2.0, [0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn u0_reference_values() {
        // s=4, r=1, θ=0 → e^{-2}, real
        let v = eval_u0(4.0, [1.0, 0.0]).unwrap();
        assert_relative_eq!(v.re, (-2.0f64).exp(), max_relative = 1e-14);
        assert!(v.im.abs() < 1e-16);
        // s=1, r=1, θ=π/2 → |u0| = e^{-cos(π/4)}
        let v = eval_u0(1.0, [0.0, 1.0]).unwrap();
        assert_relative_eq!(
            v.norm(),
            (-std::f64::consts::FRAC_PI_4.cos()).exp(),
            max_relative = 1e-14
        );
        // modulus identity at a generic point
        let (s, r, th) = (3.0f64, 0.7f64, 1.1f64);
        let v = eval_u0_polar(s, r, th).unwrap();
        assert_relative_eq!(
            v.norm(),
            (-(s * r).sqrt() * (th / 2.0).cos()).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn u0_branch_cut_rejected() {
        assert!(matches!(eval_u0(1.0, [-1.0, 0.0]), Err(CgoError::BranchCut)));
        assert!(eval_u0(1.0, [-1.0, 1e-12]).is_ok());
    }

    #[test]
    fn grad_matches_finite_differences() {
        let s = 5.0;
        let mut rng = 1234u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let r = 0.2 + next();
            let th = (next() - 0.5) * 5.5; // within (-2.75, 2.75) ⊂ (-π, π)
            let x = [r * th.cos(), r * th.sin()];
            let g = grad_u0(s, x).unwrap();
            let eps = 1e-6;
            for dim in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[dim] += eps;
                xm[dim] -= eps;
                let fd = (eval_u0(s, xp).unwrap() - eval_u0(s, xm).unwrap()) / (2.0 * eps);
                assert!(
                    (g[dim] - fd).norm() / g[dim].norm().max(1e-12) < 1e-6,
                    "dim {dim} at r={r} th={th}"
                );
            }
        }
    }

    #[test]
    fn grad_magnitude_scaling_and_origin_error() {
        let (s, r, th) = (9.0f64, 0.5f64, 0.3f64);
        let x = [r * th.cos(), r * th.sin()];
        let g = grad_u0(s, x).unwrap();
        let u = eval_u0(s, x).unwrap();
        let expected = (s / r).sqrt() * u.norm() / 2.0;
        let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        // |∂1 u|=|∂2 u| = expected each; Euclidean norm is sqrt(2)·expected
        assert_relative_eq!(norm, expected * 2f64.sqrt(), max_relative = 1e-12);
        assert!(grad_u0(1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn harmonicity_five_point_stencil() {
        // Δu0 = 0: 5-point stencil residual decays at O(h²)
        let s = 2.0;
        let x = [0.6, 0.35];
        let mut prev = f64::INFINITY;
        for &h in &[1e-2, 5e-3, 2.5e-3] {
            let lap = (eval_u0(s, [x[0] + h, x[1]]).unwrap()
                + eval_u0(s, [x[0] - h, x[1]]).unwrap()
                + eval_u0(s, [x[0], x[1] + h]).unwrap()
                + eval_u0(s, [x[0], x[1] - h]).unwrap()
                - eval_u0(s, x).unwrap() * 4.0)
                / (h * h);
            let n = lap.norm();
            assert!(n < prev);
            prev = n;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn mu_properties() {
        for &th in &[-2.9, -1.0, 0.0, 0.4, 2.2] {
            let m = mu(th);
            assert_relative_eq!(m.norm(), 1.0, max_relative = 1e-14);
            assert!(m.re > 0.0);
            assert_relative_eq!(m.re, omega(th), max_relative = 1e-14);
            // μ(θ)^{-2} = e^{-iθ}
            let inv2 = Complex64::new(1.0, 0.0) / (m * m);
            let expect = Complex64::new(0.0, -th).exp();
            assert!((inv2 - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn mu_sum_reference() {
        // θ_m=0, θ_M=π/2 → 1 - i
        let v = mu_sum(0.0, std::f64::consts::FRAC_PI_2);
        assert!((v - Complex64::new(1.0, -1.0)).norm() < 1e-14);
        // degenerate opening π
        let v = mu_sum(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn sector_integral_reference() {
        // θ_m=-π/3, θ_M=π/3, s=1 → 6√3 (purely real)
        let v = sector_integral_u0(-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3, 1.0);
        assert_relative_eq!(v.re, 6.0 * 3f64.sqrt(), max_relative = 1e-14);
        assert!(v.im.abs() < 1e-13);
        // s^{-2} scaling
        let v10 = sector_integral_u0(-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3, 10.0);
        assert_relative_eq!(v10.re, 6.0 * 3f64.sqrt() / 100.0, max_relative = 1e-13);
        // empty sector
        let v0 = sector_integral_u0(0.7, 0.7, 2.0);
        assert!(v0.norm() < 1e-15);
    }

    #[test]
    fn quadrature_reproduces_sector_integral() {
        // h s = 1600 ⇒ tail below 1e-8 relative
        for &s in &[1.0, 25.0] {
            let sector = sym_sector(1600.0 / s);
            let quad = quad_u0_over_sector(&sector, s, 1e-11).unwrap();
            let closed = sector_integral_u0(sector.theta_m(), sector.theta_max(), s);
            let tail = tail_bound(&sector, s);
            assert!(
                (quad - closed).norm() <= 1e-7 * closed.norm() + tail,
                "s={s}: quad={quad} closed={closed} tail={tail}"
            );
        }
    }

    #[test]
    fn boundary_integral_matches_quadrature() {
        let h = 1.0;
        for &s in &[1.0, 10.0, 100.0] {
            for &th in &[0.0, -0.7, 1.2] {
                let closed = boundary_integral_u0(th, s, h);
                let f = |r: f64| eval_u0_unchecked(s, r, th);
                let brk = graded_breakpoints(h, 10);
                let q = gk_adaptive(&f, 0.0, h, Tol::rel(1e-12), 20_000, &brk).unwrap();
                assert!(
                    (q.value - closed).norm() < 1e-8 * closed.norm(),
                    "s={s} th={th}"
                );
            }
        }
        // θ=0 (μ=1), sh→∞ → 2/s
        let v = boundary_integral_u0(0.0, 4.0, 1e6);
        assert_relative_eq!(v.re, 0.5, max_relative = 1e-12);
        // h→0 → 0
        assert!(boundary_integral_u0(0.3, 2.0, 1e-14).norm() < 1e-13);
    }

    #[test]
    fn quad_sector_area_and_xalpha_inequality() {
        let sector = sym_sector(2.0);
        let area = quad_sector(&|_r, _t| Complex64::new(1.0, 0.0), &sector, 1e-12).unwrap();
        assert_relative_eq!(
            area.re,
            sector.opening() * 2.0 * 2.0 / 2.0,
            max_relative = 1e-10
        );
        // |u0|·|x|^α below the closed-form bound for s ∈ {10,100,1000}, α=0.5
        let alpha = 0.5;
        for &s in &[10.0, 100.0, 1000.0] {
            let sec = sym_sector(1600.0 / s);
            let q = quad_abs_u0_xalpha(&sec, alpha, s, 1e-11).unwrap();
            assert!(q < xalpha_bound(&sec, alpha, s), "s={s}");
        }
    }

    #[test]
    fn decay_slope_exact_power_law() {
        let grid: Vec<f64> = (0..9).map(|i| 100.0 * 10f64.powf(i as f64 / 2.0)).collect();
        let slope = decay_slope(|s| s.powi(-3), &grid).unwrap();
        assert_relative_eq!(slope, -3.0, epsilon = 1e-10);
    }

    #[test]
    fn decay_slope_zeta_integral() {
        // ∫_0^h r^ζ e^{-√(sr) ω} dr = O(s^{-ζ-1}) with ζ=1, ω=0.9 → slope -2
        let grid: Vec<f64> = (0..9).map(|i| 100.0 * 10f64.powf(i as f64 / 2.0)).collect();
        let slope = decay_slope(
            |s| {
                let f = |r: f64| Complex64::new((-(s * r).sqrt() * 0.9).exp() * r, 0.0);
                let brk = graded_breakpoints(1.0, 12);
                gk_adaptive(&f, 0.0, 1.0, Tol::rel(1e-12), 30_000, &brk)
                    .unwrap()
                    .value
                    .re
            },
            &grid,
        )
        .unwrap();
        assert!((slope + 2.0).abs() < 0.05, "slope={slope}");
    }

    #[test]
    fn decay_slope_errors() {
        assert!(decay_slope(|s: f64| s, &[1.0, 2.0]).is_err());
        let grid = [1.0, 2.0, 4.0, 8.0, 16.0];
        assert!(decay_slope(|s| 1.0 - s, &grid).is_err());
    }

    #[test]
    fn tail_bound_holds_on_admissible_grid() {
        // δ_W √(hs) ≥ 15 makes the closed-form tail bound valid
        let sector = sym_sector(3.0);
        for &s in &[100.0, 1000.0, 10_000.0] {
            let tail = quad_abs_u0_tail(&sector, s, 6.0, 1e-12).unwrap();
            assert!(
                tail <= tail_bound(&sector, s),
                "s={s}: tail={tail} bound={}",
                tail_bound(&sector, s)
            );
        }
    }

    #[test]
    fn boundary_expansion_constant_kernel() {
        use crate::herglotz::FourierKernel;
        let sector = sym_sector(1.0);
        let k = 0.8; // k h < 1
        let kernel = FourierKernel::constant(k, Complex64::new(1.0, 0.0));
        let grid: Vec<f64> = (0..7).map(|i| 100.0 * 10f64.powf(i as f64 / 3.0)).collect();
        let rep =
            boundary_expansion_check(&sector, &kernel, Complex64::new(1.0, 0.0), &grid).unwrap();
        // leading term itself matches direct quadrature of η0 v(0) ∫ u0
        assert!(
            rep.leading_match_rel_err < 1e-8,
            "leading-term match {}",
            rep.leading_match_rel_err
        );
        // remainder decays at least like s^{-2} (here s^{-3}: the cosine
        // moments of a constant kernel vanish)
        assert!(
            rep.remainder_slope <= -2.0 + 0.1,
            "remainder slope {}",
            rep.remainder_slope
        );
        // k h >= 1 rejected
        let bad = FourierKernel::constant(1.2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            boundary_expansion_check(&sector, &bad, Complex64::new(1.0, 0.0), &grid),
            Err(CgoError::KhTooLarge(_))
        ));
    }

    #[test]
    fn boundary_expansion_zero_kernel() {
        use crate::herglotz::FourierKernel;
        let sector = sym_sector(1.0);
        let kernel = FourierKernel::constant(0.5, Complex64::new(0.0, 0.0));
        let grid = [100.0, 1000.0, 1e4, 1e5, 1e6];
        let rep =
            boundary_expansion_check(&sector, &kernel, Complex64::new(1.0, 0.0), &grid).unwrap();
        for (_, total, lead, rem) in &rep.rows {
            assert!(total.norm() < 1e-14 && lead.norm() < 1e-14 && *rem < 1e-14);
        }
        assert!(rep.remainder_slope == f64::NEG_INFINITY);
    }

    #[test]
    fn f32_smoke() {
        let v = eval_u0(4.0f32, [1.0f32, 0.0]).unwrap();
        assert!((v.re - (-2.0f32).exp()).abs() < 1e-6);
        let m = mu(0.5f32);
        assert!((m.norm() - 1.0).abs() < 1e-6);
        let closed = sector_integral_u0(-1.0f32, 1.0f32, 2.0f32);
        assert!(closed.norm() > 0.0);
    }

    #[test]
    fn gamma_reference() {
        assert_relative_eq!(gamma_fn(4.0_f64), 6.0, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(5.5_f64), 52.34277778455352, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(1.0_f64), 1.0, max_relative = 1e-12);
    }
}
