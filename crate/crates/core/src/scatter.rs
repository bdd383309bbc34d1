//! Forward conductive scattering: FEM interior coupled to a truncated
//! Dirichlet-to-Neumann ring, far-field extraction from ring traces, and
//! the conductive-disk series oracle.
//!
//! Model: total field `u` with `Δu + k²q u = 0` in Ω, `Δu + k²u = 0`
//! outside, conductive jump `∂_ν u⁺ + η u⁺ = ∂_ν u⁻` on ∂Ω, and the
//! radiating part `u - u^i` satisfying the outgoing condition, imposed
//! exactly per retained Fourier mode on the circle `|x| = R`.

use crate::bessel::{
    bessel_j, bessel_j_complex, bessel_j_complex_prime, bessel_j_prime, hankel1, hankel1_prime,
};
use crate::fem::{assemble_mass, assemble_stiffness};
use crate::fft::fft;
use crate::geometry::{
    ball_average_abs, triangulate_with_interface, BoundaryEdge, Domain, GeometryError,
    InterfacedMesh, MeshOptions, TriMesh,
};
use crate::linalg::{rcm_order, BandMat, CMat, CooMat, LinalgError};
use crate::scalar::{i_pow, rf, Real};
use crate::teig::{ConductiveMedium, TeigError};
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("incident wave requires |d| = 1 and k > 0")]
    BadIncident,
    #[error("DtN ring (radius {ring}) must strictly contain the scatterer (extent {extent})")]
    RingTooSmall { ring: f64, extent: f64 },
    #[error("modal 2x2 system is singular at mode {0} (transmission resonance)")]
    SingularMode(i32),
    #[error("linear system is singular; enlarge the ring radius or the truncation order")]
    SingularSystem,
    #[error("far fields live on different grids ({0} vs {1} samples)")]
    GridMismatch(usize, usize),
    #[error("trace needs at least 4N power-of-two samples ({got} < {need})")]
    TooFewSamples { got: usize, need: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Teig(#[from] TeigError),
}

/// Plane incident wave `u^i = e^{i k x·d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave<T: Real> {
    pub k: T,
    pub d: [T; 2],
}

impl<T: Real> IncidentWave<T> {
    pub fn new(k: T, d: [T; 2]) -> Result<Self, ScatterError> {
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if !(k > T::zero()) || (n - T::one()).abs() > rf(1e-12) {
            return Err(ScatterError::BadIncident);
        }
        Ok(Self { k, d })
    }

    pub fn from_angle(k: T, angle: T) -> Result<Self, ScatterError> {
        Self::new(k, [angle.cos(), angle.sin()])
    }

    pub fn eval(&self, x: [T; 2]) -> Complex<T> {
        let phase = self.k * (self.d[0] * x[0] + self.d[1] * x[1]);
        Complex::new(phase.cos(), phase.sin())
    }

    pub fn angle(&self) -> T {
        self.d[1].atan2(self.d[0])
    }
}

/// Truncated modal DtN coupling circle.
#[derive(Debug, Clone, Copy)]
pub struct DtnRing<T: Real> {
    pub radius: T,
    /// Fourier truncation order `N`.
    pub order: usize,
}

impl<T: Real> DtnRing<T> {
    /// Default truncation `N = ceil(kR) + 12`.
    pub fn new(radius: T, k: T) -> Self {
        let order = (k * radius).to_f64().unwrap_or(1.0).ceil() as usize + 12;
        Self { radius, order }
    }

    /// DtN symbol `τ_n = k H_n'(kR)/H_n(kR)` of one Fourier mode.
    pub fn symbol(&self, k: T, n: i32) -> Complex<T> {
        let kr = k * self.radius;
        hankel1_prime(n, kr) / hankel1(n, kr) * k
    }
}

/// Far-field pattern sampled at uniformly spaced angles `θ_j = 2πj/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField<T: Real> {
    pub k: T,
    pub samples: Vec<Complex<T>>,
}

impl<T: Real> FarField<T> {
    pub fn angles(&self) -> Vec<T> {
        let m = self.samples.len();
        (0..m)
            .map(|j| rf::<T>(2.0 * std::f64::consts::PI * j as f64 / m as f64))
            .collect()
    }

    /// `L²(S¹)` norm by the (exact for uniform periodic grids) trapezoid rule.
    pub fn l2_norm(&self) -> T {
        let m = self.samples.len();
        let w = rf::<T>(2.0 * std::f64::consts::PI / m as f64);
        (self
            .samples
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            * w)
            .sqrt()
    }
}

/// Physical constants to wavenumber and conductive parameter:
/// `k = ω √(ε0 μ0)`, `η = i ω γ μ0`.
pub fn eta_from_physics<T: Real>(omega: T, gamma: T, mu0: T, eps0: T) -> (T, Complex<T>) {
    let k = omega * (eps0 * mu0).sqrt();
    let eta = Complex::new(T::zero(), omega * gamma * mu0);
    (k, eta)
}

// ---------------------------------------------------------------------------
// Disk series oracle
// ---------------------------------------------------------------------------

/// Modal solution of scattering by a centered conductive disk.
#[derive(Debug, Clone)]
pub struct DiskSeries<T: Real> {
    pub k: T,
    pub k1: Complex<T>,
    pub radius: T,
    pub eta: Complex<T>,
    /// incident direction angle
    pub theta_d: T,
    /// interior coefficients, `n = -N..N`
    pub a: Vec<Complex<T>>,
    /// scattered coefficients, `n = -N..N`
    pub b: Vec<Complex<T>>,
}

/// Solve the per-mode 2×2 systems for a centered disk:
/// `a_n J_n(k₁R) - b_n H_n(kR) = c_n J_n(kR)`,
/// `a_n k₁ J_n'(k₁R) - b_n (k H_n'(kR) + η H_n(kR)) = c_n (k J_n'(kR) + η J_n(kR))`,
/// with `c_n = i^n e^{-inθ_d}` the plane-wave coefficient.
pub fn disk_series_forward<T: Real>(
    radius: T,
    q: Complex<T>,
    eta: Complex<T>,
    inc: &IncidentWave<T>,
    order: usize,
) -> Result<DiskSeries<T>, ScatterError> {
    let k = inc.k;
    let k1 = Complex::new(k, T::zero()) * q.sqrt();
    let theta_d = inc.angle();
    let n_max = order as i32;
    let mut a = Vec::with_capacity(2 * order + 1);
    let mut b = Vec::with_capacity(2 * order + 1);
    for n in -n_max..=n_max {
        let kr = k * radius;
        let jk = Complex::new(bessel_j(n, kr), T::zero());
        let jk_p = Complex::new(bessel_j_prime(n, kr), T::zero());
        let h = hankel1(n, kr);
        let h_p = hankel1_prime(n, kr);
        let j1 = bessel_j_complex(n, k1 * radius);
        let j1_p = bessel_j_complex_prime(n, k1 * radius);
        let rhs1 = jk;
        let rhs2 = jk_p * k + jk * eta;
        // [ j1, -h; k1 j1', -(k h' + η h) ] (a_n, b_n) = c_n (rhs1, rhs2)
        let m11 = j1;
        let m12 = -h;
        let m21 = k1 * j1_p;
        let m22 = -(h_p * k + h * eta);
        let det = m11 * m22 - m12 * m21;
        if det.norm() < rf(1e-300) {
            return Err(ScatterError::SingularMode(n));
        }
        let ang = rf::<T>(n as f64) * theta_d;
        let c_n = i_pow::<T>(n as i64) * Complex::new(ang.cos(), -ang.sin());
        let an = (rhs1 * m22 - m12 * rhs2) / det * c_n;
        let bn = (m11 * rhs2 - rhs1 * m21) / det * c_n;
        a.push(an);
        b.push(bn);
    }
    Ok(DiskSeries {
        k,
        k1,
        radius,
        eta,
        theta_d,
        a,
        b,
    })
}

impl<T: Real> DiskSeries<T> {
    fn n_max(&self) -> i32 {
        (self.b.len() as i32 - 1) / 2
    }

    pub fn coeff_b(&self, n: i32) -> Complex<T> {
        self.b[(n + self.n_max()) as usize]
    }

    /// Total field at a point (interior series inside the disk, incident +
    /// scattered outside).
    pub fn total_field(&self, x: [T; 2]) -> Complex<T> {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let th = if r > T::zero() {
            x[1].atan2(x[0])
        } else {
            T::zero()
        };
        let n_max = self.n_max();
        let mut acc = Complex::new(T::zero(), T::zero());
        if r <= self.radius {
            for n in -n_max..=n_max {
                let jn = bessel_j_complex(n, self.k1 * r);
                let ang = rf::<T>(n as f64) * th;
                acc = acc + self.a[(n + n_max) as usize] * jn * Complex::new(ang.cos(), ang.sin());
            }
        } else {
            for n in -n_max..=n_max {
                let ang = rf::<T>(n as f64) * th;
                let ang_d = rf::<T>(n as f64) * self.theta_d;
                let inc = i_pow::<T>(n as i64)
                    * Complex::new(ang_d.cos(), -ang_d.sin())
                    * bessel_j(n, self.k * r);
                let sca = self.b[(n + n_max) as usize] * hankel1(n, self.k * r);
                acc = acc + (inc + sca) * Complex::new(ang.cos(), ang.sin());
            }
        }
        acc
    }

    /// Scattered-field trace on the circle of radius `r ≥ disk radius` at
    /// uniformly spaced angles.
    pub fn scattered_trace(&self, r: T, samples: usize) -> Vec<Complex<T>> {
        let n_max = self.n_max();
        (0..samples)
            .map(|j| {
                let th = rf::<T>(2.0 * std::f64::consts::PI * j as f64 / samples as f64);
                let mut acc = Complex::new(T::zero(), T::zero());
                for n in -n_max..=n_max {
                    let ang = rf::<T>(n as f64) * th;
                    acc = acc
                        + self.b[(n + n_max) as usize]
                            * hankel1(n, self.k * r)
                            * Complex::new(ang.cos(), ang.sin());
                }
                acc
            })
            .collect()
    }

    /// Closed-form far field `u^∞(θ) = √(2/(πk)) e^{-iπ/4} Σ b_n (-i)^n e^{inθ}`.
    pub fn far_field(&self, samples: usize) -> FarField<T> {
        let n_max = self.n_max();
        let amp = (rf::<T>(2.0) / (T::PI() * self.k)).sqrt();
        let quarter = rf::<T>(std::f64::consts::FRAC_PI_4);
        let phase = Complex::new(quarter.cos(), -quarter.sin());
        let samples_v: Vec<Complex<T>> = (0..samples)
            .map(|j| {
                let th = rf::<T>(2.0 * std::f64::consts::PI * j as f64 / samples as f64);
                let mut acc = Complex::new(T::zero(), T::zero());
                for n in -n_max..=n_max {
                    let ang = rf::<T>(n as f64) * th;
                    acc = acc
                        + self.b[(n + n_max) as usize]
                            * i_pow::<T>(-(n as i64))
                            * Complex::new(ang.cos(), ang.sin());
                }
                acc * amp * phase
            })
            .collect();
        FarField {
            k: self.k,
            samples: samples_v,
        }
    }

    /// `Im ∮ ū ∂_r u dσ` on a circle of radius `r` outside the disk, from
    /// the modal coefficients (energy flux; ≈ 0 for lossless media).
    pub fn flux_imag(&self, r: T) -> T {
        let n_max = self.n_max();
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in -n_max..=n_max {
            let ang_d = rf::<T>(n as f64) * self.theta_d;
            let cn = i_pow::<T>(n as i64) * Complex::new(ang_d.cos(), -ang_d.sin());
            let u_n = cn * bessel_j(n, self.k * r) + self.coeff_b(n) * hankel1(n, self.k * r);
            let du_n = (cn * bessel_j_prime(n, self.k * r)
                + self.coeff_b(n) * hankel1_prime(n, self.k * r))
                * self.k;
            acc = acc + u_n.conj() * du_n;
        }
        (acc * rf::<T>(2.0 * std::f64::consts::PI) * r).im
    }
}

// ---------------------------------------------------------------------------
// Far-field map from ring traces
// ---------------------------------------------------------------------------

/// Far field from a scattered-field trace sampled at `M` uniform angles on
/// the circle of radius `ring.radius`; `M` must be a power of two with
/// `M ≥ 4N`. Returns the far field on the same angular grid plus an
/// aliasing flag (energy in the top quartile of retained modes > 1%).
pub fn far_field_from_ring<T: Real>(
    trace: &[Complex<T>],
    ring: &DtnRing<T>,
    k: T,
) -> Result<(FarField<T>, bool), ScatterError> {
    let m = trace.len();
    let need = 4 * ring.order;
    if m < need || !m.is_power_of_two() {
        return Err(ScatterError::TooFewSamples { got: m, need });
    }
    let mut data = trace.to_vec();
    fft(&mut data);
    let n_max = ring.order as i32;
    let minv = T::one() / rf::<T>(m as f64);
    // modal coefficients c_n (trace = Σ c_n e^{inθ})
    let coeff = |n: i32| -> Complex<T> {
        let idx = n.rem_euclid(m as i32) as usize;
        data[idx] * minv
    };
    // aliasing check on the retained band
    let mut total = T::zero();
    let mut top = T::zero();
    for n in -n_max..=n_max {
        let e = coeff(n).norm_sqr();
        total += e;
        if n.unsigned_abs() as usize * 4 >= 3 * ring.order {
            top += e;
        }
    }
    let aliasing = total > T::zero() && top > rf::<T>(0.01) * total;
    let amp = (rf::<T>(2.0) / (T::PI() * k)).sqrt();
    let quarter = rf::<T>(std::f64::consts::FRAC_PI_4);
    let phase = Complex::new(quarter.cos(), -quarter.sin());
    let kr = k * ring.radius;
    let mut modes: Vec<Complex<T>> = Vec::with_capacity(2 * ring.order + 1);
    for n in -n_max..=n_max {
        modes.push(coeff(n) * i_pow::<T>(-(n as i64)) / hankel1(n, kr) * amp * phase);
    }
    let samples: Vec<Complex<T>> = (0..m)
        .map(|j| {
            let th = rf::<T>(2.0 * std::f64::consts::PI * j as f64 / m as f64);
            let mut acc = Complex::new(T::zero(), T::zero());
            for n in -n_max..=n_max {
                let ang = rf::<T>(n as f64) * th;
                acc = acc + modes[(n + n_max) as usize] * Complex::new(ang.cos(), ang.sin());
            }
            acc
        })
        .collect();
    Ok((FarField { k, samples }, aliasing))
}

// ---------------------------------------------------------------------------
// FEM forward solver
// ---------------------------------------------------------------------------

/// Meshed scattering geometry: ring disk with the scatterer boundary as an
/// internal interface.
pub struct ScatterMesh<T: Real> {
    pub mesh: TriMesh<T>,
    pub interface_edges: Vec<BoundaryEdge>,
    /// per-triangle: inside the scatterer
    pub inside: Vec<bool>,
    pub ring: DtnRing<T>,
}

/// Build the computational mesh for a scatterer inside a DtN ring.
pub fn scatter_mesh<T: Real>(
    medium: &ConductiveMedium<T>,
    ring: &DtnRing<T>,
    target_h: T,
    seed: u64,
) -> Result<ScatterMesh<T>, ScatterError> {
    let poly = medium.domain.as_polygon(target_h);
    let extent = poly
        .vertices()
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(T::zero(), T::max);
    if extent >= ring.radius * rf(0.98) {
        return Err(ScatterError::RingTooSmall {
            ring: ring.radius.to_f64().unwrap_or(f64::NAN),
            extent: extent.to_f64().unwrap_or(f64::NAN),
        });
    }
    let outer = Domain::Disk {
        center: [T::zero(), T::zero()],
        radius: ring.radius,
    };
    let im: InterfacedMesh<T> =
        triangulate_with_interface(&outer, &poly, &MeshOptions::new(target_h).with_seed(seed))?;
    Ok(ScatterMesh {
        mesh: im.mesh,
        interface_edges: im.interface_edges,
        inside: im.inside,
        ring: *ring,
    })
}

/// Solved total field with the data needed for far-field extraction.
pub struct ForwardSolution<T: Real> {
    pub u: Vec<Complex<T>>,
    pub inc: IncidentWave<T>,
    pub ring: DtnRing<T>,
    /// ring nodes ordered counterclockwise by angle
    pub ring_nodes: Vec<usize>,
}

/// Solve the forward conductive scattering problem on a prepared mesh.
///
/// Weak form: `∫∇u·∇φ - k²∫q̃ uφ - ∮_{∂Ω} η u φ - ∮_R T(u - u^i)φ = ∮_R ∂_r u^i φ`
/// with the modal DtN `T` on the ring. The band-plus-dense-border structure
/// (the DtN couples every pair of ring nodes) is solved by a Schur
/// complement on the ring block.
pub fn solve_forward<T: Real>(
    medium: &ConductiveMedium<T>,
    inc: &IncidentWave<T>,
    smesh: &ScatterMesh<T>,
) -> Result<ForwardSolution<T>, ScatterError> {
    let mesh = &smesh.mesh;
    let n = mesh.nodes.len();
    let k = inc.k;
    let one = Complex::new(T::one(), T::zero());
    let k2 = Complex::new(k * k, T::zero());

    // S = K - k² M_q̃ - E_η
    let stiff = assemble_stiffness(mesh).to_csr();
    let mass = assemble_mass(mesh, &|ti| if smesh.inside[ti] { medium.q } else { one }).to_csr();
    let mut coo = CooMat::new(n, n);
    for i in 0..n {
        for ptr in stiff.row_ptr[i]..stiff.row_ptr[i + 1] {
            coo.push(i, stiff.col_idx[ptr], stiff.vals[ptr]);
        }
        for ptr in mass.row_ptr[i]..mass.row_ptr[i + 1] {
            coo.push(i, mass.col_idx[ptr], -k2 * mass.vals[ptr]);
        }
    }
    let sixth = rf::<T>(1.0 / 6.0);
    for be in &smesh.interface_edges {
        let Some(eta) = medium.eta.of_tag(be.tag) else {
            return Err(ScatterError::Teig(TeigError::DanglingTag(be.tag)));
        };
        let a = mesh.nodes[be.a];
        let b = mesh.nodes[be.b];
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let w = eta * (len * sixth);
        coo.push(be.a, be.a, -w * rf::<T>(2.0));
        coo.push(be.b, be.b, -w * rf::<T>(2.0));
        coo.push(be.a, be.b, -w);
        coo.push(be.b, be.a, -w);
    }
    let s = coo.to_csr();

    // ring nodes, ordered by angle
    let mask = mesh.boundary_mask();
    let mut ring_nodes: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    ring_nodes.sort_by(|&a, &b| {
        let ta = mesh.nodes[a][1].atan2(mesh.nodes[a][0]);
        let tb = mesh.nodes[b][1].atan2(mesh.nodes[b][0]);
        ta.partial_cmp(&tb).unwrap()
    });
    let nr = ring_nodes.len();
    let n_modes = smesh.ring.order as i32;

    // modal hat-function integrals q_n[i] = ∮ φ_i e^{-inθ} dσ
    let qn = ring_hat_moments(mesh, &ring_nodes, smesh.ring.radius, n_modes);

    // interior (non-ring) ordering by RCM
    let mut is_ring = vec![false; n];
    for &i in &ring_nodes {
        is_ring[i] = true;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &mesh.triangles {
        for a in 0..3 {
            for b in 0..3 {
                if a != b && !adj[t[a]].contains(&t[b]) {
                    adj[t[a]].push(t[b]);
                }
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }
    let order = rcm_order(n, &|v| adj[v].clone());
    let interior_order: Vec<usize> = order.iter().copied().filter(|&v| !is_ring[v]).collect();
    let nin = interior_order.len();
    let mut pos = vec![usize::MAX; n]; // node -> position (interior: 0..nin, ring: nin..)
    for (p, &v) in interior_order.iter().enumerate() {
        pos[v] = p;
    }
    for (p, &v) in ring_nodes.iter().enumerate() {
        pos[v] = nin + p;
    }

    // banded interior block + borders
    let mut bw = 1usize;
    for i in 0..n {
        if is_ring[i] {
            continue;
        }
        for ptr in s.row_ptr[i]..s.row_ptr[i + 1] {
            let j = s.col_idx[ptr];
            if !is_ring[j] {
                bw = bw.max(pos[i].abs_diff(pos[j]));
            }
        }
    }
    let mut band = BandMat::zeros(nin.max(1), bw, bw);
    let mut s_ir: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); nr];
    let mut s_ri: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); nr];
    let mut s_rr = CMat::zeros(nr, nr);
    for i in 0..n {
        for ptr in s.row_ptr[i]..s.row_ptr[i + 1] {
            let j = s.col_idx[ptr];
            let v = s.vals[ptr];
            match (is_ring[i], is_ring[j]) {
                (false, false) => band.add(pos[i], pos[j], v),
                (false, true) => s_ir[pos[j] - nin].push((pos[i], v)),
                (true, false) => s_ri[pos[i] - nin].push((pos[j], v)),
                (true, true) => {
                    s_rr[(pos[i] - nin, pos[j] - nin)] = s_rr[(pos[i] - nin, pos[j] - nin)] + v
                }
            }
        }
    }
    // DtN block: S_rr -= T_ring with T[i,j] = Σ_n τ_n/(2πR) conj(q_n[i]) q_n[j]
    let two_pi_r = rf::<T>(2.0 * std::f64::consts::PI) * smesh.ring.radius;
    for ni in -n_modes..=n_modes {
        let tau = smesh.ring.symbol(k, ni);
        let row = &qn[(ni + n_modes) as usize];
        for i in 0..nr {
            let qi = row[i].conj() * tau / two_pi_r;
            if qi.norm() == T::zero() {
                continue;
            }
            for j in 0..nr {
                s_rr[(i, j)] = s_rr[(i, j)] - qi * row[j];
            }
        }
    }

    // RHS on ring nodes: Σ_n i^n e^{-inθ_d} (-2i/(πR H_n(kR))) conj(q_n[i])
    let theta_d = inc.angle();
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    let pi_r = T::PI() * smesh.ring.radius;
    for ni in -n_modes..=n_modes {
        let h = hankel1(ni, k * smesh.ring.radius);
        let ang = rf::<T>(ni as f64) * theta_d;
        let coef = i_pow::<T>(ni as i64)
            * Complex::new(ang.cos(), -ang.sin())
            * Complex::new(T::zero(), -rf::<T>(2.0))
            / (h * pi_r);
        let row = &qn[(ni + n_modes) as usize];
        for (i, &node) in ring_nodes.iter().enumerate() {
            rhs[node] = rhs[node] + coef * row[i].conj();
        }
    }

    // Schur complement solve
    let band_lu = band.lu().map_err(|_| ScatterError::SingularSystem)?;
    let mut schur = s_rr.clone();
    let mut y_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(nr);
    for jc in 0..nr {
        let mut col = vec![Complex::new(T::zero(), T::zero()); nin.max(1)];
        for &(i, v) in &s_ir[jc] {
            col[i] = col[i] + v;
        }
        if nin > 0 {
            band_lu.solve_in_place(&mut col);
        }
        for ir in 0..nr {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &(jcol, v) in &s_ri[ir] {
                acc = acc + v * col[jcol];
            }
            schur[(ir, jc)] = schur[(ir, jc)] - acc;
        }
        y_cols.push(col);
    }
    let schur_lu = schur.lu().map_err(|_| ScatterError::SingularSystem)?;
    let mut b_i = vec![Complex::new(T::zero(), T::zero()); nin.max(1)];
    let mut b_r = vec![Complex::new(T::zero(), T::zero()); nr];
    for node in 0..n {
        if is_ring[node] {
            b_r[pos[node] - nin] = rhs[node];
        } else {
            b_i[pos[node]] = rhs[node];
        }
    }
    let mut b_i_solved = b_i;
    if nin > 0 {
        band_lu.solve_in_place(&mut b_i_solved);
    }
    let mut rhs_r = b_r;
    for ir in 0..nr {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(jcol, v) in &s_ri[ir] {
            acc = acc + v * b_i_solved[jcol];
        }
        rhs_r[ir] = rhs_r[ir] - acc;
    }
    let x_r = schur_lu.solve(&rhs_r);
    let mut x_i = b_i_solved;
    for (jc, col) in y_cols.iter().enumerate() {
        let xr = x_r[jc];
        if xr.norm() == T::zero() {
            continue;
        }
        for i in 0..nin {
            x_i[i] = x_i[i] - col[i] * xr;
        }
    }
    let mut u = vec![Complex::new(T::zero(), T::zero()); n];
    for node in 0..n {
        if is_ring[node] {
            u[node] = x_r[pos[node] - nin];
        } else {
            u[node] = x_i[pos[node]];
        }
    }
    Ok(ForwardSolution {
        u,
        inc: *inc,
        ring: smesh.ring,
        ring_nodes,
    })
}

/// `∮ φ_i e^{-inθ} dσ` for the angularly-ordered ring hat functions
/// (piecewise linear in the angle, `dσ ≈ R dθ`).
fn ring_hat_moments<T: Real>(
    mesh: &TriMesh<T>,
    ring_nodes: &[usize],
    radius: T,
    n_modes: i32,
) -> Vec<Vec<Complex<T>>> {
    let nr = ring_nodes.len();
    let thetas: Vec<T> = ring_nodes
        .iter()
        .map(|&i| mesh.nodes[i][1].atan2(mesh.nodes[i][0]))
        .collect();
    let two_pi = rf::<T>(2.0 * std::f64::consts::PI);
    let mut out = Vec::with_capacity(2 * n_modes as usize + 1);
    for n in -n_modes..=n_modes {
        let mut row = vec![Complex::new(T::zero(), T::zero()); nr];
        for i in 0..nr {
            let t_prev = if i == 0 {
                thetas[nr - 1] - two_pi
            } else {
                thetas[i - 1]
            };
            let t_cur = thetas[i];
            let t_next = if i + 1 == nr {
                thetas[0] + two_pi
            } else {
                thetas[i + 1]
            };
            row[i] = (ramp_moment(t_prev, t_cur, true, n) + ramp_moment(t_cur, t_next, false, n))
                * radius;
        }
        out.push(row);
    }
    out
}

/// `∫_{ta}^{tb} ramp(θ) e^{-inθ} dθ` with a linear ramp 0→1 (`rising`) or
/// 1→0 over the interval.
fn ramp_moment<T: Real>(ta: T, tb: T, rising: bool, n: i32) -> Complex<T> {
    let len = tb - ta;
    if len <= T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    if n == 0 {
        return Complex::new(len * rf(0.5), T::zero());
    }
    let nf = rf::<T>(n as f64);
    let e = |t: T| -> Complex<T> {
        let a = -nf * t;
        Complex::new(a.cos(), a.sin())
    };
    let i_n = Complex::new(T::zero(), -nf); // d/dθ e^{-inθ} = -in e^{-inθ}
    let int_e = (e(tb) - e(ta)) / i_n;
    let int_te = (e(tb) * tb - e(ta) * ta) / i_n - int_e / i_n;
    if rising {
        (int_te - int_e * ta) / len
    } else {
        (int_e * tb - int_te) / len
    }
}

impl<T: Real> ForwardSolution<T> {
    /// Scattered-field trace `u - u^i` sampled at `M` uniform angles on the
    /// ring (P1 interpolation along the ring chain in angle).
    pub fn scattered_ring_trace(&self, mesh: &TriMesh<T>, samples: usize) -> Vec<Complex<T>> {
        let nr = self.ring_nodes.len();
        let thetas: Vec<T> = self
            .ring_nodes
            .iter()
            .map(|&i| mesh.nodes[i][1].atan2(mesh.nodes[i][0]))
            .collect();
        let two_pi = rf::<T>(2.0 * std::f64::consts::PI);
        (0..samples)
            .map(|j| {
                let th = two_pi * rf::<T>(j as f64 / samples as f64);
                let mut t = th;
                while t < thetas[0] {
                    t += two_pi;
                }
                while t >= thetas[0] + two_pi {
                    t -= two_pi;
                }
                let mut lo = 0usize;
                let mut hi = nr;
                while lo + 1 < hi {
                    let mid = (lo + hi) / 2;
                    if thetas[mid] <= t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let i0 = lo;
                let i1 = (lo + 1) % nr;
                let t0 = thetas[i0];
                let mut t1 = thetas[i1];
                if t1 <= t0 {
                    t1 += two_pi;
                }
                let frac = (t - t0) / (t1 - t0);
                let n0 = self.ring_nodes[i0];
                let n1 = self.ring_nodes[i1];
                let p = [
                    mesh.nodes[n0][0] + (mesh.nodes[n1][0] - mesh.nodes[n0][0]) * frac,
                    mesh.nodes[n0][1] + (mesh.nodes[n1][1] - mesh.nodes[n0][1]) * frac,
                ];
                let u_here = self.u[n0] + (self.u[n1] - self.u[n0]) * frac;
                u_here - self.inc.eval(p)
            })
            .collect()
    }

    /// Far field of the solution (trace → modal map), with aliasing flag.
    pub fn far_field(
        &self,
        mesh: &TriMesh<T>,
        samples: usize,
    ) -> Result<(FarField<T>, bool), ScatterError> {
        let m = samples.max(4 * self.ring.order).next_power_of_two();
        let trace = self.scattered_ring_trace(mesh, m);
        far_field_from_ring(&trace, &self.ring, self.inc.k)
    }

    /// `Im ∮ ū ∂_r u dσ` of the computed total field on the ring, evaluated
    /// modally (the radial derivative of the scattered part comes from the
    /// outgoing Hankel quotient, the incident part is known analytically).
    /// Vanishes for lossless media up to discretization error.
    pub fn flux_imag(&self, mesh: &TriMesh<T>) -> T {
        let m = (4 * self.ring.order).next_power_of_two();
        let mut trace = self.scattered_ring_trace(mesh, m);
        fft(&mut trace);
        let minv = T::one() / rf::<T>(m as f64);
        let k = self.inc.k;
        let kr = k * self.ring.radius;
        let theta_d = self.inc.angle();
        let n_max = self.ring.order as i32;
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in -n_max..=n_max {
            let c_n = trace[n.rem_euclid(m as i32) as usize] * minv;
            let ang = rf::<T>(n as f64) * theta_d;
            let inc_n = i_pow::<T>(n as i64) * Complex::new(ang.cos(), -ang.sin());
            let u_n = inc_n * bessel_j(n, kr) + c_n;
            let du_n = inc_n * bessel_j_prime(n, kr) * k
                + c_n * hankel1_prime(n, kr) / hankel1(n, kr) * k;
            acc = acc + u_n.conj() * du_n;
        }
        (acc * rf::<T>(2.0 * std::f64::consts::PI) * self.ring.radius).im
    }
}

/// Report of the total-field non-vanishing check.
#[derive(Debug, Clone)]
pub struct NonvanishingReport<T: Real> {
    /// `(probe point, ball average of |u|)`
    pub entries: Vec<([T; 2], T)>,
    pub min_average: T,
    pub threshold: T,
    pub admissible: bool,
}

/// Minimum of shrinking-ball averages of `|u|` over a probe grid; the
/// admissibility verdict is `min > threshold`. Probe points whose ball
/// leaves the mesh are skipped.
pub fn nonvanishing_check<T: Real>(
    mesh: &TriMesh<T>,
    u: &[Complex<T>],
    probe_points: &[[T; 2]],
    rho: T,
    threshold: T,
) -> NonvanishingReport<T> {
    let mut entries = Vec::with_capacity(probe_points.len());
    let mut min_average = T::infinity();
    for &p in probe_points {
        if let Ok(avg) = ball_average_abs(mesh, u, p, rho) {
            min_average = min_average.min(avg);
            entries.push((p, avg));
        }
    }
    NonvanishingReport {
        entries,
        min_average,
        threshold,
        admissible: min_average > threshold,
    }
}

/// Uniform probe grid covering a centered square of half-width `half`.
pub fn probe_grid<T: Real>(half: T, n_per_side: usize) -> Vec<[T; 2]> {
    let mut pts = Vec::new();
    let n = n_per_side.max(2);
    for i in 0..n {
        for j in 0..n {
            let fx = rf::<T>(i as f64 / (n - 1) as f64) * rf::<T>(2.0) - T::one();
            let fy = rf::<T>(j as f64 / (n - 1) as f64) * rf::<T>(2.0) - T::one();
            pts.push([half * fx, half * fy]);
        }
    }
    pts
}
