//! Adaptive Gauss–Kronrod quadrature for complex integrands, plus fixed
//! rules on triangles and edges.
//!
//! The 1D driver is a worst-panel-first bisection scheme on the 15-point
//! Kronrod rule with the embedded 7-point Gauss rule as error estimator.
//! Panels are processed in a deterministic order so results are
//! bit-reproducible.

use crate::scalar::{rf, Real};
use num_complex::Complex;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Kronrod abscissae on [0,1] side of the symmetric 15-point rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// 7-point Gauss weights (for abscissae XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T: Real> {
    pub value: Complex<T>,
    /// Estimated absolute error.
    pub err: T,
    /// Number of panels processed.
    pub panels: usize,
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not reach the requested tolerance within {panels} panels (best value {best_re}+{best_im}i, error estimate {err})")]
    NoConvergence {
        panels: usize,
        best_re: f64,
        best_im: f64,
        err: f64,
    },
    #[error("empty or inverted integration interval")]
    BadInterval,
}

/// Absolute/relative tolerance pair.
#[derive(Debug, Clone, Copy)]
pub struct Tol<T: Real> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tol<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel }
    }

    pub fn rel(rel: f64) -> Self {
        Self {
            abs: rf(1e-300),
            rel: rf(rel),
        }
    }
}

/// One Kronrod application on [a,b]: returns (kronrod value, |K - G|).
fn gk15_panel<T: Real, F>(f: &F, a: T, b: T) -> (Complex<T>, T)
where
    F: Fn(T) -> Complex<T>,
{
    let half = rf::<T>(0.5);
    let c = (a + b) * half;
    let hw = (b - a) * half;
    let fc = f(c);
    let mut resk = fc * rf::<T>(WGK[7]);
    let mut resg = fc * rf::<T>(WG[3]);
    for j in 0..7 {
        let dx = hw * rf::<T>(XGK[j]);
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let sum = f1 + f2;
        resk = resk + sum * rf::<T>(WGK[j]);
        if j % 2 == 1 {
            resg = resg + sum * rf::<T>(WG[j / 2]);
        }
    }
    resk = resk * hw;
    resg = resg * hw;
    let err = (resk - resg).norm();
    (resk, err)
}

struct Panel<T: Real> {
    a: T,
    b: T,
    value: Complex<T>,
    err: T,
    seq: usize,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Worst error first; ties broken by insertion order for determinism.
        match self.err.partial_cmp(&other.err) {
            Some(Ordering::Equal) | None => other.seq.cmp(&self.seq),
            Some(ord) => ord,
        }
    }
}

/// Adaptive Gauss–Kronrod integration of a complex-valued integrand over
/// `[a,b]`. `breakpoints` seeds the initial panel set (useful to grade panels
/// toward an integrable singularity); it is filtered to the open interval.
pub fn gk_adaptive<T: Real, F>(
    f: &F,
    a: T,
    b: T,
    tol: Tol<T>,
    max_panels: usize,
    breakpoints: &[T],
) -> Result<QuadResult<T>, QuadError>
where
    F: Fn(T) -> Complex<T>,
{
    if !(b > a) {
        if b == a {
            return Ok(QuadResult {
                value: Complex::new(T::zero(), T::zero()),
                err: T::zero(),
                panels: 0,
            });
        }
        return Err(QuadError::BadInterval);
    }
    let mut pts: Vec<T> = Vec::with_capacity(breakpoints.len() + 2);
    pts.push(a);
    for &p in breakpoints {
        if p > a && p < b {
            pts.push(p);
        }
    }
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| *x == *y);

    let mut heap: BinaryHeap<Panel<T>> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut total = Complex::new(T::zero(), T::zero());
    let mut total_err = T::zero();
    for w in pts.windows(2) {
        let (v, e) = gk15_panel(f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
            seq,
        });
        seq += 1;
    }

    let mut panels = heap.len();
    loop {
        let target = tol.abs.max(tol.rel * total.norm());
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                err: total_err,
                panels,
            });
        }
        if panels >= max_panels {
            return Err(QuadError::NoConvergence {
                panels,
                best_re: total.re.to_f64().unwrap_or(f64::NAN),
                best_im: total.im.to_f64().unwrap_or(f64::NAN),
                err: total_err.to_f64().unwrap_or(f64::NAN),
            });
        }
        let worst = heap.pop().expect("heap cannot be empty while err > 0");
        let mid = (worst.a + worst.b) * rf::<T>(0.5);
        if mid <= worst.a || mid >= worst.b {
            // Interval at machine resolution; accept its estimate as-is.
            total_err = total_err - worst.err;
            continue;
        }
        let (v1, e1) = gk15_panel(f, worst.a, mid);
        let (v2, e2) = gk15_panel(f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.err + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
            seq,
        });
        seq += 1;
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
            seq,
        });
        seq += 1;
        panels += 2;
    }
}

/// Geometric breakpoints `h * ratio^j` (j = levels..1) used to grade panels
/// toward r = 0 where CGO-type integrands have unbounded derivatives.
pub fn graded_breakpoints<T: Real>(h: T, levels: usize) -> Vec<T> {
    let ratio = rf::<T>(0.25);
    let mut out = Vec::with_capacity(levels);
    let mut x = h;
    for _ in 0..levels {
        x = x * ratio;
        out.push(x);
    }
    out
}

/// Adaptive quadrature of `∫∫ f(r,θ) r dr dθ` over the truncated sector
/// `r ∈ (0,h), θ ∈ (θ_m,θ_M)`, nested adaptive in both variables.
pub fn quad_sector_polar<T: Real, F>(
    f: &F,
    theta_m: T,
    theta_max: T,
    h: T,
    tol: Tol<T>,
    max_panels: usize,
) -> Result<QuadResult<T>, QuadError>
where
    F: Fn(T, T) -> Complex<T>,
{
    let brk = graded_breakpoints(h, 10);
    let span = theta_max - theta_m;
    if span <= T::zero() || h <= T::zero() {
        return Ok(QuadResult {
            value: Complex::new(T::zero(), T::zero()),
            err: T::zero(),
            panels: 0,
        });
    }
    let inner_tol = Tol::new(tol.abs / span * rf(0.2), tol.rel * rf(0.2));
    let inner_budget = (max_panels / 16).max(200);
    let inner_err = std::cell::Cell::new(T::zero());
    let inner_panels = std::cell::Cell::new(0usize);
    let radial = |theta: T| -> Complex<T> {
        let g = |r: T| f(r, theta) * r;
        match gk_adaptive(&g, T::zero(), h, inner_tol, inner_budget, &brk) {
            Ok(q) => {
                inner_err.set(inner_err.get().max(q.err));
                inner_panels.set(inner_panels.get() + q.panels);
                q.value
            }
            Err(QuadError::NoConvergence { best_re, best_im, err, .. }) => {
                inner_err.set(inner_err.get().max(rf(err)));
                Complex::new(rf(best_re), rf(best_im))
            }
            Err(QuadError::BadInterval) => Complex::new(T::zero(), T::zero()),
        }
    };
    let outer = gk_adaptive(&radial, theta_m, theta_max, tol, max_panels, &[])?;
    Ok(QuadResult {
        value: outer.value,
        err: outer.err + inner_err.get() * span,
        panels: outer.panels + inner_panels.get(),
    })
}

/// 3-point Gauss–Legendre rule on a straight segment; exact through degree 5.
pub fn gauss3_segment<T: Real, F>(f: &F, p0: [T; 2], p1: [T; 2]) -> Complex<T>
where
    F: Fn([T; 2]) -> Complex<T>,
{
    let half = rf::<T>(0.5);
    let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
    let mid = [(p0[0] + p1[0]) * half, (p0[1] + p1[1]) * half];
    let dir = [(p1[0] - p0[0]) * half, (p1[1] - p0[1]) * half];
    let t = rf::<T>(0.7745966692414834); // sqrt(3/5)
    let w0 = rf::<T>(8.0 / 9.0);
    let w1 = rf::<T>(5.0 / 9.0);
    let at = |s: T| [mid[0] + dir[0] * s, mid[1] + dir[1] * s];
    (f(mid) * w0 + (f(at(t)) + f(at(-t))) * w1) * (len * half)
}

/// 7-point degree-5 rule on a triangle (barycentric), scaled by area.
pub fn tri7<T: Real, F>(f: &F, a: [T; 2], b: [T; 2], c: [T; 2]) -> Complex<T>
where
    F: Fn([T; 2]) -> Complex<T>,
{
    const PTS: [(f64, f64, f64, f64); 7] = [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
        (
            0.059715871789770,
            0.470142064105115,
            0.470142064105115,
            0.132394152788506,
        ),
        (
            0.470142064105115,
            0.059715871789770,
            0.470142064105115,
            0.132394152788506,
        ),
        (
            0.470142064105115,
            0.470142064105115,
            0.059715871789770,
            0.132394152788506,
        ),
        (
            0.797426985353087,
            0.101286507323456,
            0.101286507323456,
            0.125939180544827,
        ),
        (
            0.101286507323456,
            0.797426985353087,
            0.101286507323456,
            0.125939180544827,
        ),
        (
            0.101286507323456,
            0.101286507323456,
            0.797426985353087,
            0.125939180544827,
        ),
    ];
    let area = triangle_area(a, b, c);
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(l1, l2, l3, w) in &PTS {
        let x = [
            a[0] * rf(l1) + b[0] * rf(l2) + c[0] * rf(l3),
            a[1] * rf(l1) + b[1] * rf(l2) + c[1] * rf(l3),
        ];
        acc = acc + f(x) * rf::<T>(w);
    }
    acc * area
}

/// `tri7` after `depth` levels of uniform 4-way subdivision.
pub fn tri7_subdiv<T: Real, F>(f: &F, a: [T; 2], b: [T; 2], c: [T; 2], depth: usize) -> Complex<T>
where
    F: Fn([T; 2]) -> Complex<T>,
{
    if depth == 0 {
        return tri7(f, a, b, c);
    }
    let half = rf::<T>(0.5);
    let ab = [(a[0] + b[0]) * half, (a[1] + b[1]) * half];
    let bc = [(b[0] + c[0]) * half, (b[1] + c[1]) * half];
    let ca = [(c[0] + a[0]) * half, (c[1] + a[1]) * half];
    tri7_subdiv(f, a, ab, ca, depth - 1)
        + tri7_subdiv(f, ab, b, bc, depth - 1)
        + tri7_subdiv(f, ca, bc, c, depth - 1)
        + tri7_subdiv(f, ab, bc, ca, depth - 1)
}

/// Signed-area-free triangle area.
pub fn triangle_area<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) * rf::<T>(0.5)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn integrates_exponential() {
        let f = |x: f64| Complex64::new(x.exp(), 0.0);
        let q = gk_adaptive(&f, -1.0, 1.0, Tol::rel(1e-13), 1000, &[]).unwrap();
        assert_relative_eq!(q.value.re, 1f64.exp() - (-1f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn integrates_oscillatory_complex() {
        // ∫_0^1 e^{i w x} dx = (e^{iw} - 1)/(iw)
        let w = 40.0;
        let f = |x: f64| (Complex64::i() * w * x).exp();
        let q = gk_adaptive(&f, 0.0, 1.0, Tol::rel(1e-12), 10_000, &[]).unwrap();
        let exact = ((Complex64::i() * w).exp() - 1.0) / (Complex64::i() * w);
        assert!((q.value - exact).norm() < 1e-11);
    }

    #[test]
    fn handles_sqrt_layer_with_grading() {
        // ∫_0^1 e^{-sqrt(s r)} dr = 2/s (1 - e^{-sqrt(s)}(1+sqrt(s)))
        let s = 1e6f64;
        let f = |r: f64| Complex64::new((-(s * r).sqrt()).exp(), 0.0);
        let brk = graded_breakpoints(1.0, 12);
        let q = gk_adaptive(&f, 0.0, 1.0, Tol::rel(1e-12), 20_000, &brk).unwrap();
        let t = s.sqrt();
        let exact = 2.0 / s * (1.0 - (-t).exp() * (1.0 + t));
        assert_relative_eq!(q.value.re, exact, max_relative = 1e-10);
    }

    #[test]
    fn sector_area() {
        let f = |_r: f64, _t: f64| Complex64::new(1.0, 0.0);
        let q = quad_sector_polar(&f, -0.4, 1.1, 2.0, Tol::rel(1e-12), 100_000).unwrap();
        assert_relative_eq!(q.value.re, 1.5 * 2.0 * 2.0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn tri7_degree5_exact() {
        // ∫ x^2 y^3 over unit triangle (0,0),(1,0),(0,1) = 1/280 * B(3,4)-type value
        let f = |x: [f64; 2]| Complex64::new(x[0] * x[0] * x[1] * x[1] * x[1], 0.0);
        let v = tri7(&f, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        // ∫_0^1 ∫_0^{1-x} x^2 y^3 dy dx = ∫ x^2 (1-x)^4/4 = B(3,5)/4 = (2!4!/7!)/4
        let exact = (2.0 * 24.0 / 5040.0) / 4.0;
        assert_relative_eq!(v.re, exact, max_relative = 1e-14);
    }

    #[test]
    fn gauss3_segment_cubic_exact() {
        let f = |x: [f64; 2]| Complex64::new(x[0].powi(3), 0.0);
        let v = gauss3_segment(&f, [0.0, 0.0], [2.0, 0.0]);
        assert_relative_eq!(v.re, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn f32_smoke() {
        let f = |x: f32| Complex::new(x, 0.0f32);
        let q = gk_adaptive(&f, 0.0f32, 1.0f32, Tol::new(1e-6, 1e-6), 100, &[]).unwrap();
        assert!((q.value.re - 0.5).abs() < 1e-6);
    }
}
