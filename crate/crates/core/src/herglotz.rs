//! Herglotz wave fields: evaluation by circle quadrature and by the
//! Jacobi–Anger series, cosine moments, and regularized kernel fitting in a
//! discrete H¹ norm.

use crate::bessel::bessel_j;
use crate::fem::{assemble_mass, assemble_stiffness, h1_semi_norm_sq, l2_norm_sq};
use crate::geometry::TriMesh;
use crate::linalg::{CMat, LinalgError};
use crate::scalar::{i_pow, rf, Real};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HerglotzError {
    #[error("kernel coefficient list must have odd length (p = -P..P), got {0}")]
    BadCoeffCount(usize),
    #[error("fields live on different meshes ({0} vs {1} nodes)")]
    MeshMismatch(usize, usize),
    #[error(
        "normal equations are numerically singular at reg_lambda = {0:e}; increase the regularization"
    )]
    SingularNormalEquations(f64),
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("kernel JSON: {0}")]
    Json(String),
}

/// Herglotz kernel on the unit circle as truncated Fourier coefficients:
/// `g(φ) = Σ_{|p| ≤ P} c_p e^{ipφ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierKernel<T: Real> {
    k: T,
    /// Ordered `p = -P..P`.
    coeffs: Vec<Complex<T>>,
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    k: f64,
    coeffs: Vec<[f64; 2]>,
}

impl<T: Real> FourierKernel<T> {
    pub fn new(k: T, coeffs: Vec<Complex<T>>) -> Result<Self, HerglotzError> {
        if coeffs.is_empty() || coeffs.len() % 2 == 0 {
            return Err(HerglotzError::BadCoeffCount(coeffs.len()));
        }
        Ok(Self { k, coeffs })
    }

    /// Constant kernel `g ≡ c0`.
    pub fn constant(k: T, c0: Complex<T>) -> Self {
        Self {
            k,
            coeffs: vec![c0],
        }
    }

    /// Single harmonic `g(φ) = e^{ipφ}`.
    pub fn harmonic(k: T, p: i64) -> Self {
        let pa = p.unsigned_abs() as usize;
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); 2 * pa + 1];
        coeffs[(p + pa as i64) as usize] = Complex::new(T::one(), T::zero());
        Self { k, coeffs }
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn p_max(&self) -> i64 {
        (self.coeffs.len() as i64 - 1) / 2
    }

    pub fn coeff(&self, p: i64) -> Complex<T> {
        let pm = self.p_max();
        if p < -pm || p > pm {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[(p + pm) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Kernel value on the circle.
    pub fn eval_g(&self, phi: T) -> Complex<T> {
        let pm = self.p_max();
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in -pm..=pm {
            let ang = rf::<T>(p as f64) * phi;
            acc = acc + self.coeff(p) * Complex::new(ang.cos(), ang.sin());
        }
        acc
    }

    /// `‖g‖_{L²(S¹)}` through Parseval: `(2π Σ |c_p|²)^{1/2}`.
    pub fn l2_norm(&self) -> T {
        let s: T = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (rf::<T>(2.0 * std::f64::consts::PI) * s).sqrt()
    }

    /// `v(0) = ∫ g dσ = 2π c_0`.
    pub fn value_at_origin(&self) -> Complex<T> {
        self.coeff(0) * rf::<T>(2.0 * std::f64::consts::PI)
    }

    /// Cosine moment `γ_p = ∫ g(φ) cos(pφ) dφ = π (c_p + c_{-p})`, `p ≥ 1`.
    pub fn gamma_p(&self, p: i64) -> Complex<T> {
        assert!(p >= 1, "gamma_p is defined for p >= 1");
        (self.coeff(p) + self.coeff(-p)) * rf::<T>(std::f64::consts::PI)
    }

    /// Trapezoid quadrature of `∫_{S¹} e^{ikξ·x} g(ξ) dσ(ξ)` with a
    /// spectrally sufficient node count `N ≥ max(64, 4(P + k|x|))`.
    pub fn eval_quadrature(&self, x: [T; 2]) -> Complex<T> {
        let kr = (self.k * (x[0] * x[0] + x[1] * x[1]).sqrt()).to_f64().unwrap_or(0.0);
        let n = (4.0 * (self.p_max() as f64 + kr.abs())).ceil().max(64.0) as usize;
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            let phi = rf::<T>(2.0 * std::f64::consts::PI * j as f64 / n as f64);
            let xi = [phi.cos(), phi.sin()];
            let phase = self.k * (xi[0] * x[0] + xi[1] * x[1]);
            acc = acc + Complex::new(phase.cos(), phase.sin()) * self.eval_g(phi);
        }
        acc * rf::<T>(2.0 * std::f64::consts::PI / n as f64)
    }

    /// Jacobi–Anger evaluation
    /// `v(x) = 2π Σ_p c_p i^{|p|} J_{|p|}(k|x|) e^{ip·arg x}`,
    /// truncated at `|p| ≤ min(P, L)`.
    pub fn eval_jacobi_anger(&self, x: [T; 2], truncation: usize) -> Complex<T> {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let theta = if r > T::zero() {
            x[1].atan2(x[0])
        } else {
            T::zero()
        };
        let kr = self.k * r;
        let pm = self.p_max().min(truncation as i64);
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in -pm..=pm {
            let c = self.coeff(p);
            if c == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            let pa = p.unsigned_abs() as i32;
            let bess = bessel_j(pa, kr);
            let ang = rf::<T>(p as f64) * theta;
            acc = acc + c * i_pow::<T>(pa as i64) * bess * Complex::new(ang.cos(), ang.sin());
        }
        acc * rf::<T>(2.0 * std::f64::consts::PI)
    }

    /// Gradient of the Herglotz field by circle quadrature.
    pub fn grad_quadrature(&self, x: [T; 2]) -> [Complex<T>; 2] {
        let kr = (self.k * (x[0] * x[0] + x[1] * x[1]).sqrt()).to_f64().unwrap_or(0.0);
        let n = (4.0 * (self.p_max() as f64 + kr.abs())).ceil().max(64.0) as usize;
        let mut gx = Complex::new(T::zero(), T::zero());
        let mut gy = Complex::new(T::zero(), T::zero());
        let ik = Complex::new(T::zero(), self.k);
        for j in 0..n {
            let phi = rf::<T>(2.0 * std::f64::consts::PI * j as f64 / n as f64);
            let xi = [phi.cos(), phi.sin()];
            let phase = self.k * (xi[0] * x[0] + xi[1] * x[1]);
            let val = Complex::new(phase.cos(), phase.sin()) * self.eval_g(phi) * ik;
            gx = gx + val * xi[0];
            gy = gy + val * xi[1];
        }
        let w = rf::<T>(2.0 * std::f64::consts::PI / n as f64);
        [gx * w, gy * w]
    }

    pub fn to_json(&self) -> String {
        let j = KernelJson {
            k: self.k.to_f64().unwrap_or(f64::NAN),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| [c.re.to_f64().unwrap_or(0.0), c.im.to_f64().unwrap_or(0.0)])
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("kernel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HerglotzError> {
        let j: KernelJson =
            serde_json::from_str(text).map_err(|e| HerglotzError::Json(e.to_string()))?;
        Self::new(
            rf(j.k),
            j.coeffs
                .iter()
                .map(|c| Complex::new(rf(c[0]), rf(c[1])))
                .collect(),
        )
    }
}

/// Standard Bessel function of the first kind (the series/recurrence
/// implementation shared with the rest of the crate).
pub fn bessel_big_j<T: Real>(p: u32, t: T) -> T {
    bessel_j(p as i32, t)
}

/// Diagnostics of a kernel fit: the `(residual, kernel norm)` pair the
/// approximation hypothesis trades off, plus the knobs that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport<T: Real> {
    pub residual_h1: T,
    pub kernel_norm: T,
    pub reg_lambda: T,
    pub truncation: usize,
}

/// Discrete `H¹` misfit `(‖a-b‖² + ‖∇a-∇b‖²)^{1/2}` of two nodal fields.
pub fn h1_misfit<T: Real>(
    a: &[Complex<T>],
    b: &[Complex<T>],
    mesh: &TriMesh<T>,
) -> Result<T, HerglotzError> {
    if a.len() != b.len() || a.len() != mesh.nodes.len() {
        return Err(HerglotzError::MeshMismatch(a.len(), b.len()));
    }
    let d: Vec<Complex<T>> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
    Ok((l2_norm_sq(mesh, &d) + h1_semi_norm_sq(mesh, &d)).sqrt())
}

/// Fit a truncated Fourier kernel to a nodal Helmholtz field on a mesh by
/// minimizing `‖v_g - target‖²_{H¹} + reg_lambda ‖g‖²_{L²}`.
///
/// `reg_lambda = None` picks `1e-8` times the largest normal-equation
/// eigenvalue. Column equilibration keeps high harmonics (whose fields are
/// tiny on a small domain) from destroying the conditioning.
pub fn fit_kernel<T: Real>(
    mesh: &TriMesh<T>,
    target: &[Complex<T>],
    k: T,
    p_max: usize,
    reg_lambda: Option<T>,
) -> Result<(FourierKernel<T>, FitReport<T>), HerglotzError> {
    if target.len() != mesh.nodes.len() {
        return Err(HerglotzError::MeshMismatch(target.len(), mesh.nodes.len()));
    }
    let n = mesh.nodes.len();
    let nb = 2 * p_max + 1;
    // Basis fields: columns of G are Herglotz fields of kernels e^{ipφ}.
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(nb);
    for p in -(p_max as i64)..=(p_max as i64) {
        let kern = FourierKernel::harmonic(k, p);
        basis.push(mesh.nodes.iter().map(|&x| kern.eval_jacobi_anger(x, 2 * p_max + 64)).collect());
    }
    let mass = assemble_mass(mesh, &|_| Complex::new(T::one(), T::zero())).to_csr();
    let stiff = assemble_stiffness(mesh).to_csr();
    let apply_e = |v: &[Complex<T>]| -> Vec<Complex<T>> {
        let mv = mass.matvec(v);
        let kv = stiff.matvec(v);
        mv.iter().zip(&kv).map(|(a, b)| *a + *b).collect()
    };
    let e_basis: Vec<Vec<Complex<T>>> = basis.iter().map(|c| apply_e(c)).collect();
    let e_target = apply_e(target);
    // Normal matrix and right-hand side.
    let mut normal = CMat::zeros(nb, nb);
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); nb];
    for i in 0..nb {
        for j in 0..nb {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..n {
                acc = acc + basis[i][r].conj() * e_basis[j][r];
            }
            normal[(i, j)] = acc;
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..n {
            acc = acc + basis[i][r].conj() * e_target[r];
        }
        rhs[i] = acc;
    }
    // ‖g‖² in coefficients is 2π Σ|c_p|².
    let two_pi = rf::<T>(2.0 * std::f64::consts::PI);
    let lam = match reg_lambda {
        Some(l) => l,
        None => rf::<T>(1e-8) * power_iteration_lmax(&normal),
    };
    for i in 0..nb {
        normal[(i, i)] = normal[(i, i)] + Complex::new(lam * two_pi, T::zero());
    }
    // Column equilibration by the diagonal.
    let mut d = vec![T::one(); nb];
    for i in 0..nb {
        let dv = normal[(i, i)].norm().sqrt();
        d[i] = if dv > rf(1e-150) { dv } else { T::one() };
    }
    let mut scaled = CMat::zeros(nb, nb);
    for i in 0..nb {
        for j in 0..nb {
            scaled[(i, j)] = normal[(i, j)] / (d[i] * d[j]);
        }
    }
    let rhs_scaled: Vec<Complex<T>> = rhs.iter().zip(&d).map(|(r, di)| *r / *di).collect();
    let lu = scaled
        .lu()
        .map_err(|_| HerglotzError::SingularNormalEquations(lam.to_f64().unwrap_or(0.0)))?;
    let y = lu.solve(&rhs_scaled);
    let coeffs: Vec<Complex<T>> = y.iter().zip(&d).map(|(c, di)| *c / *di).collect();
    let kernel = FourierKernel::new(k, coeffs)?;
    // Residual in the discrete H¹ norm.
    let mut fitted = vec![Complex::new(T::zero(), T::zero()); n];
    for (i, col) in basis.iter().enumerate() {
        let c = kernel.coeffs[i];
        for (f, v) in fitted.iter_mut().zip(col) {
            *f = *f + c * *v;
        }
    }
    let residual = h1_misfit(&fitted, target, mesh)?;
    let report = FitReport {
        residual_h1: residual,
        kernel_norm: kernel.l2_norm(),
        reg_lambda: lam,
        truncation: p_max,
    };
    Ok((kernel, report))
}

fn power_iteration_lmax<T: Real>(m: &CMat<T>) -> T {
    let n = m.rows();
    let mut v = vec![Complex::new(T::one(), T::zero()); n];
    let mut lam = T::one();
    for _ in 0..30 {
        let w = m.matvec(&v);
        lam = w.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if lam <= rf(1e-280) {
            return T::one();
        }
        v = w.into_iter().map(|c| c / lam).collect();
    }
    lam
}

/// Max over samples of `(|v| + |∇v|) / (√(2π)(1+k)‖g‖)`; bounded by 1.
pub fn c1_bound_ratio<T: Real>(kernel: &FourierKernel<T>, samples: &[[T; 2]]) -> T {
    let denom = (rf::<T>(2.0 * std::f64::consts::PI)).sqrt()
        * (T::one() + kernel.k())
        * kernel.l2_norm();
    let mut worst = T::zero();
    for &x in samples {
        let v = kernel.eval_quadrature(x);
        let g = kernel.grad_quadrature(x);
        let total = v.norm() + (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        worst = worst.max(total / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use crate::geometry::{triangulate, Domain, Sector};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn constant_kernel_gives_bessel() {
        let k = 2.0;
        let kern = FourierKernel::constant(k, Complex64::new(1.0, 0.0));
        for &x in &[[0.3, 0.1], [1.0, -0.7], [0.0, 2.0]] {
            let q = kern.eval_quadrature(x);
            let r = (x[0] * x[0] as f64 + x[1] * x[1]).sqrt();
            let exact = 2.0 * std::f64::consts::PI * bessel_j(0, k * r);
            assert!((q - Complex64::new(exact, 0.0)).norm() < 1e-10, "x={x:?}");
        }
    }

    #[test]
    fn value_at_origin_is_total_mass() {
        let kern = FourierKernel::new(
            1.5,
            vec![
                Complex64::new(0.2, -0.1),
                Complex64::new(0.7, 0.3),
                Complex64::new(-0.4, 0.0),
            ],
        )
        .unwrap();
        let q = kern.eval_quadrature([0.0, 0.0]);
        assert!((q - kern.value_at_origin()).norm() < 1e-12);
        assert!((kern.value_at_origin() - Complex64::new(0.7, 0.3) * 2.0 * std::f64::consts::PI).norm() < 1e-14);
    }

    #[test]
    fn harmonic_kernel_reference() {
        let k = 1.3;
        for p in [1i64, 3, -2] {
            let kern = FourierKernel::harmonic(k, p);
            let x = [0.8, 0.45];
            let r = (x[0] * x[0] as f64 + x[1] * x[1]).sqrt();
            let th = x[1].atan2(x[0]);
            let pa = p.unsigned_abs() as i32;
            let exact = 2.0 * std::f64::consts::PI
                * Complex64::i().powi(pa)
                * bessel_j(pa, k * r)
                * Complex64::new(0.0, p as f64 * th).exp();
            let q = kern.eval_quadrature(x);
            assert!((q - exact).norm() < 1e-11, "p={p}: {q} vs {exact}");
        }
    }

    #[test]
    fn jacobi_anger_matches_quadrature() {
        let k = 2.5;
        let kern = FourierKernel::new(
            k,
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.3, 0.4),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.2, -0.7),
                Complex64::new(0.05, 0.0),
            ],
        )
        .unwrap();
        for &x in &[[0.0, 0.0], [0.5, 0.2], [1.2, -1.4], [-0.4, 1.9]] {
            let a = kern.eval_quadrature(x);
            let b = kern.eval_jacobi_anger(x, 40);
            assert!(
                (a - b).norm() < 1e-10 * a.norm().max(1.0),
                "x={x:?}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn jacobi_anger_truncation_superexponential() {
        // Large-P kernel evaluated with increasing truncation.
        let k = 1.0;
        let pmax = 30i64;
        let coeffs: Vec<Complex64> = (-pmax..=pmax)
            .map(|p| Complex64::new(1.0 / (1.0 + p.abs() as f64), 0.0))
            .collect();
        let kern = FourierKernel::new(k, coeffs).unwrap();
        let x = [2.0, 1.0]; // k|x| = sqrt(5)
        let full = kern.eval_jacobi_anger(x, 200);
        let kr = k * (5f64).sqrt();
        let l_knee = (std::f64::consts::E * kr / 2.0).ceil() as usize;
        let mut errs = Vec::new();
        for l in [l_knee, l_knee + 4, l_knee + 8, l_knee + 12] {
            errs.push((kern.eval_jacobi_anger(x, l) - full).norm());
        }
        // each +4 orders shrinks the error by a large factor
        assert!(errs[1] < errs[0] * 1e-2, "{errs:?}");
        assert!(errs[2] < errs[1] * 1e-2, "{errs:?}");
        // x = 0: only p=0 survives
        let v0 = kern.eval_jacobi_anger([0.0, 0.0], 0);
        assert!((v0 - kern.value_at_origin()).norm() < 1e-12);
    }

    #[test]
    fn gamma_moments() {
        let k = 1.0;
        let kern = FourierKernel::constant(k, Complex64::new(1.0, 0.0));
        for p in 1..5 {
            assert!(kern.gamma_p(p).norm() < 1e-15);
        }
        // g = cos φ = (e^{iφ}+e^{-iφ})/2 → γ_1 = π
        let cosk = FourierKernel::new(
            k,
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        assert!((cosk.gamma_p(1) - Complex64::new(std::f64::consts::PI, 0.0)).norm() < 1e-14);
        // |γ_p| ≤ sqrt(2π) ‖g‖ on pseudo-random kernels
        let mut s = 99u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..50 {
            let coeffs: Vec<Complex64> = (0..7).map(|_| Complex64::new(next(), next())).collect();
            let kern = FourierKernel::new(k, coeffs).unwrap();
            let bound = (2.0 * std::f64::consts::PI).sqrt() * kern.l2_norm();
            for p in 1..4 {
                assert!(kern.gamma_p(p).norm() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn parseval_consistency() {
        let kern = FourierKernel::new(
            1.0,
            vec![
                Complex64::new(0.3, -0.2),
                Complex64::new(1.0, 0.5),
                Complex64::new(-0.1, 0.1),
            ],
        )
        .unwrap();
        // quadrature of ∫ |g|² dφ
        let n = 4096;
        let mut acc = 0.0;
        for j in 0..n {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            acc += kern.eval_g(phi).norm_sqr();
        }
        acc *= 2.0 * std::f64::consts::PI / n as f64;
        assert_relative_eq!(acc.sqrt(), kern.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn helmholtz_residual_second_order() {
        // Herglotz fields solve Δv + k²v = 0; 5-point stencil residual O(h²).
        let k = 1.7;
        let kern = FourierKernel::new(
            k,
            vec![
                Complex64::new(0.4, 0.1),
                Complex64::new(1.0, -0.3),
                Complex64::new(-0.2, 0.6),
            ],
        )
        .unwrap();
        let x = [0.37, -0.21];
        let mut prev = f64::INFINITY;
        for &h in &[2e-2, 1e-2, 5e-3] {
            let lap = (kern.eval_quadrature([x[0] + h, x[1]])
                + kern.eval_quadrature([x[0] - h, x[1]])
                + kern.eval_quadrature([x[0], x[1] + h])
                + kern.eval_quadrature([x[0], x[1] - h])
                - kern.eval_quadrature(x) * 4.0)
                / (h * h);
            let res = (lap + kern.eval_quadrature(x) * k * k).norm();
            assert!(res < prev, "residual should decrease");
            prev = res;
        }
        assert!(prev < 2e-4);
    }

    #[test]
    fn c1_bound_holds() {
        let kern = FourierKernel::new(
            2.0,
            vec![
                Complex64::new(0.2, -0.4),
                Complex64::new(0.9, 0.0),
                Complex64::new(0.3, 0.25),
            ],
        )
        .unwrap();
        let mut samples = Vec::new();
        for i in 0..15 {
            for j in 0..15 {
                samples.push([-1.0 + 2.0 * i as f64 / 14.0, -1.0 + 2.0 * j as f64 / 14.0]);
            }
        }
        let ratio = c1_bound_ratio(&kern, &samples);
        assert!(ratio <= 1.0 + 1e-12, "ratio={ratio}");
    }

    #[test]
    fn h1_misfit_examples() {
        let sector = Sector::new(0.2, 1.4, 1.0).unwrap();
        let mesh = triangulate(&Domain::Polygon(sector.to_polygon(16)), 0.15).unwrap();
        let a: Vec<Complex64> = mesh.nodes.iter().map(|n| Complex64::new(n[0], n[1])).collect();
        assert_eq!(h1_misfit(&a, &a, &mesh).unwrap(), 0.0);
        // a - b ≡ const c → c sqrt(area)
        let c = Complex64::new(0.7, -0.2);
        let b: Vec<Complex64> = a.iter().map(|v| v - c).collect();
        let area = mesh.total_area();
        assert_relative_eq!(
            h1_misfit(&a, &b, &mesh).unwrap(),
            c.norm() * area.sqrt(),
            max_relative = 1e-12
        );
        let short = vec![Complex64::new(0.0, 0.0); 3];
        assert!(h1_misfit(&a, &short, &mesh).is_err());
    }

    #[test]
    fn h1_misfit_linear_oracle_on_square() {
        use crate::geometry::Polygon;
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.2).unwrap();
        let a: Vec<Complex64> = mesh.nodes.iter().map(|n| Complex64::new(n[0], 0.0)).collect();
        let b = vec![Complex64::new(0.0, 0.0); mesh.nodes.len()];
        // ‖x‖²_{H¹} = ∫x² + ∫1 = 1/3 + 1
        assert_relative_eq!(
            h1_misfit(&a, &b, &mesh).unwrap(),
            (1.0f64 / 3.0 + 1.0).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn fit_recovers_planted_kernel() {
        let k = 3.0;
        let sector = Sector::new(-1.1, 1.3, 1.0).unwrap();
        let mesh = triangulate(&Domain::Polygon(sector.to_polygon(24)), 0.12).unwrap();
        let truth = FourierKernel::new(
            k,
            vec![
                Complex64::new(0.3, -0.2),
                Complex64::new(-0.5, 0.1),
                Complex64::new(1.0, 0.4),
                Complex64::new(0.2, 0.0),
                Complex64::new(-0.15, 0.35),
            ],
        )
        .unwrap();
        let target: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|&x| truth.eval_jacobi_anger(x, 80))
            .collect();
        let (fitted, report) = fit_kernel(&mesh, &target, k, 2, Some(1e-12)).unwrap();
        for p in -2i64..=2 {
            assert!(
                (fitted.coeff(p) - truth.coeff(p)).norm() < 1e-8,
                "p={p}: {:?} vs {:?}",
                fitted.coeff(p),
                truth.coeff(p)
            );
        }
        assert!(report.residual_h1 < 1e-7, "residual={}", report.residual_h1);
    }

    #[test]
    fn tikhonov_tradeoff_monotone() {
        let k = 2.0;
        let sector = Sector::new(-0.9, 1.0, 1.0).unwrap();
        let mesh = triangulate(&Domain::Polygon(sector.to_polygon(20)), 0.16).unwrap();
        // target: Helmholtz solution singular-free near the sector
        let x0 = [2.5f64, 1.5f64];
        let target: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|n| {
                let r = ((n[0] - x0[0]).powi(2) + (n[1] - x0[1]).powi(2)).sqrt();
                Complex64::new(bessel_j(0, k * r), 0.0)
            })
            .collect();
        let mut last_res = -1.0;
        let mut last_norm = f64::INFINITY;
        for lam in [1e-10, 1e-6, 1e-2] {
            let (_, rep) = fit_kernel(&mesh, &target, k, 6, Some(lam)).unwrap();
            assert!(rep.residual_h1 >= last_res - 1e-13, "residual must grow with reg");
            assert!(rep.kernel_norm <= last_norm * (1.0 + 1e-10), "norm must shrink with reg");
            last_res = rep.residual_h1;
            last_norm = rep.kernel_norm;
        }
    }

    #[test]
    fn density_sweep_residual_decreases() {
        let k = 2.0;
        let sector = Sector::new(-0.9, 1.0, 1.0).unwrap();
        let mesh = triangulate(&Domain::Polygon(sector.to_polygon(20)), 0.14).unwrap();
        let x0 = [1.8f64, 1.2f64];
        let target: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|n| {
                let r = ((n[0] - x0[0]).powi(2) + (n[1] - x0[1]).powi(2)).sqrt();
                Complex64::new(bessel_j(0, k * r), 0.0)
            })
            .collect();
        let mut last = f64::INFINITY;
        for p in [2usize, 4, 8, 12] {
            let (_, rep) = fit_kernel(&mesh, &target, k, p, Some(1e-12)).unwrap();
            assert!(
                rep.residual_h1 <= last * (1.0 + 1e-9) + 1e-14,
                "P={p}: {} vs {}",
                rep.residual_h1,
                last
            );
            last = rep.residual_h1;
        }
        assert!(last < 1e-3, "fit should be accurate by P=12: {last}");
    }

    #[test]
    fn unregularized_overparameterized_fit_errors() {
        // far more basis functions than nodes: the Gram matrix is singular
        // and reg_lambda = 0 must fail with advice rather than garbage
        let sector = Sector::new(-0.5, 0.5, 0.5).unwrap();
        let mesh = triangulate(&Domain::Polygon(sector.to_polygon(4)), 0.5).unwrap();
        let target = vec![Complex64::new(1.0, 0.0); mesh.nodes.len()];
        let err = fit_kernel(&mesh, &target, 1.0, 24, Some(0.0));
        assert!(
            matches!(err, Err(HerglotzError::SingularNormalEquations(_))),
            "{err:?}"
        );
        // the same fit succeeds once regularized
        assert!(fit_kernel(&mesh, &target, 1.0, 24, None).is_ok());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_kernel() -> impl Strategy<Value = FourierKernel<f64>> {
            (
                0.2f64..4.0,
                proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..9),
            )
                .prop_map(|(k, raw)| {
                    let mut coeffs: Vec<Complex64> =
                        raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                    if coeffs.len() % 2 == 0 {
                        coeffs.push(Complex64::new(0.1, 0.0));
                    }
                    FourierKernel::new(k, coeffs).unwrap()
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Parseval: the coefficient norm equals the circle quadrature
            /// of ∫|g|² to near machine precision.
            #[test]
            fn parseval_holds(kern in arb_kernel()) {
                let n = 2048;
                let mut acc = 0.0;
                for j in 0..n {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                    acc += kern.eval_g(phi).norm_sqr();
                }
                acc *= 2.0 * std::f64::consts::PI / n as f64;
                prop_assert!((acc.sqrt() - kern.l2_norm()).abs() < 1e-10 * (1.0 + kern.l2_norm()));
            }

            /// |γ_p| ≤ √(2π) ‖g‖ for every cosine moment.
            #[test]
            fn gamma_moment_bound(kern in arb_kernel(), p in 1i64..6) {
                let bound = (2.0 * std::f64::consts::PI).sqrt() * kern.l2_norm();
                prop_assert!(kern.gamma_p(p).norm() <= bound * (1.0 + 1e-12));
            }

            /// The two evaluation routes agree on random kernels and points.
            #[test]
            fn evaluation_routes_agree(
                kern in arb_kernel(),
                x in (-1.5f64..1.5, -1.5f64..1.5),
            ) {
                let p = [x.0, x.1];
                let a = kern.eval_quadrature(p);
                let b = kern.eval_jacobi_anger(p, 48);
                prop_assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn kernel_json_roundtrip() {
        let kern = FourierKernel::new(
            1.25,
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.3, 0.4),
            ],
        )
        .unwrap();
        let s = kern.to_json();
        let back = FourierKernel::<f64>::from_json(&s).unwrap();
        assert_eq!(kern, back);
        assert!(FourierKernel::<f64>::from_json("{bad").is_err());
    }
}
