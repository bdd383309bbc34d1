//! The conductive transmission eigenproblem on a bounded 2D domain:
//!
//! ```text
//!   Δw + k² q w = 0,   Δv + k² v = 0   in Ω,
//!   w = v,   ∂_ν v + η v = ∂_ν w       on ∂Ω.
//! ```
//!
//! Discretization: P1 elements with a shared boundary trace (`w = v = t` on
//! `∂Ω` holds strongly), the conductive condition entering weakly through a
//! boundary mass term. The unknown layout is `x = [w_int; v_int; t_bnd]`,
//! and the `v` block equations are negated so the assembled pencil is
//! complex symmetric.
//!
//! The module also carries the separation-of-variables disk oracle, the
//! corner-vanishing profiles, and the Green/master integral identities used
//! to verify the implementation.

use crate::bessel::{bessel_j_complex, bessel_j_complex_prime};
use crate::cgo::{du0_dr, eval_u0_unchecked, CgoError};
use crate::fem::{assemble_boundary_mass, assemble_mass, assemble_stiffness, l2_norm_sq, P1Field};
use crate::geometry::{
    ball_average_complex, shrinking_ball_average, CornerProbe, Domain, GeometryError,
    ProfileEntry, TriMesh,
};
use crate::linalg::{
    generalized_eig, polish_pencil_pair, rcm_order, shift_invert_subspace, CooMat, CsrMat,
    LinalgError,
};
use crate::quad::{gauss3_segment, gk_adaptive, graded_breakpoints, tri7_subdiv, QuadError, Tol};
use crate::scalar::{rf, Real};
use num_complex::Complex;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TeigError {
    #[error("boundary tag {0} has no η value (dangling tag)")]
    DanglingTag(usize),
    #[error("medium contrast q must be nonzero")]
    ZeroContrast,
    #[error("problem dimension {n} exceeds the dense budget {budget}; coarsen the mesh")]
    OverBudget { n: usize, budget: usize },
    #[error("probe regime violated: {0}")]
    ProbeRegime(String),
    #[error("no eigenvalue found in the search window")]
    Empty,
    #[error("disk mode requires k != 0")]
    ZeroWavenumber,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Cgo(#[from] CgoError),
}

/// Boundary parameter: one constant, or one constant per edge tag.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaSpec<T: Real> {
    Uniform(Complex<T>),
    PerTag(BTreeMap<usize, Complex<T>>),
}

impl<T: Real> EtaSpec<T> {
    pub fn of_tag(&self, tag: usize) -> Option<Complex<T>> {
        match self {
            EtaSpec::Uniform(e) => Some(*e),
            EtaSpec::PerTag(map) => map.get(&tag).copied(),
        }
    }
}

/// Domain with a piecewise-constant contrast `q = 1 + V` and a boundary
/// parameter `η` (constant per edge).
#[derive(Debug, Clone, PartialEq)]
pub struct ConductiveMedium<T: Real> {
    pub domain: Domain<T>,
    pub q: Complex<T>,
    pub eta: EtaSpec<T>,
}

impl<T: Real> ConductiveMedium<T> {
    pub fn new(domain: Domain<T>, q: Complex<T>, eta: EtaSpec<T>) -> Result<Self, TeigError> {
        if q.norm() == T::zero() {
            return Err(TeigError::ZeroContrast);
        }
        Ok(Self { domain, q, eta })
    }
}

/// Node-to-DOF maps for the `[w_int; v_int; t_bnd]` layout.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_interior: usize,
    pub n_boundary: usize,
    /// node → interior index (usize::MAX on boundary nodes)
    pub interior_id: Vec<usize>,
    /// node → boundary index (usize::MAX on interior nodes)
    pub boundary_id: Vec<usize>,
    pub node_of_interior: Vec<usize>,
    pub node_of_boundary: Vec<usize>,
}

impl DofMap {
    fn new<T: Real>(mesh: &TriMesh<T>) -> Self {
        let mask = mesh.boundary_mask();
        let mut interior_id = vec![usize::MAX; mesh.nodes.len()];
        let mut boundary_id = vec![usize::MAX; mesh.nodes.len()];
        let mut node_of_interior = Vec::new();
        let mut node_of_boundary = Vec::new();
        for (i, &on_boundary) in mask.iter().enumerate() {
            if on_boundary {
                boundary_id[i] = node_of_boundary.len();
                node_of_boundary.push(i);
            } else {
                interior_id[i] = node_of_interior.len();
                node_of_interior.push(i);
            }
        }
        Self {
            n_interior: node_of_interior.len(),
            n_boundary: node_of_boundary.len(),
            interior_id,
            boundary_id,
            node_of_interior,
            node_of_boundary,
        }
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_interior + self.n_boundary
    }

    /// Column of the `w` expansion for a node.
    fn w_col(&self, node: usize) -> usize {
        if self.interior_id[node] != usize::MAX {
            self.interior_id[node]
        } else {
            2 * self.n_interior + self.boundary_id[node]
        }
    }

    /// Column of the `v` expansion for a node.
    fn v_col(&self, node: usize) -> usize {
        if self.interior_id[node] != usize::MAX {
            self.n_interior + self.interior_id[node]
        } else {
            2 * self.n_interior + self.boundary_id[node]
        }
    }
}

/// Assembled generalized pencil `A x = k² B x`.
pub struct TransmissionPencil<T: Real> {
    pub a: CsrMat<T>,
    pub b: CsrMat<T>,
    pub dofs: DofMap,
}

/// Assemble the transmission pencil for a medium on a mesh.
///
/// Row blocks: interior-tested weak Helmholtz for `w` (contrast `q`),
/// negated interior-tested weak Helmholtz for `v`, and the boundary-tested
/// difference equation carrying the natural term `∮ η t φ` (the weak form of
/// `∂_ν(v-w) = -η v`). Negating the `v` rows makes `A`, `B` complex
/// symmetric, so right eigenvectors of distinct eigenvalues are
/// `B`-orthogonal in the bilinear (transpose) pairing.
pub fn assemble<T: Real>(
    medium: &ConductiveMedium<T>,
    mesh: &TriMesh<T>,
) -> Result<TransmissionPencil<T>, TeigError> {
    for be in &mesh.boundary_edges {
        if medium.eta.of_tag(be.tag).is_none() {
            return Err(TeigError::DanglingTag(be.tag));
        }
    }
    let dofs = DofMap::new(mesh);
    let n = dofs.n_dofs();
    let q = medium.q;
    let one = Complex::new(T::one(), T::zero());
    let stiff = assemble_stiffness(mesh).to_csr();
    let mass = assemble_mass(mesh, &|_| one).to_csr();
    let bmass = assemble_boundary_mass(mesh, &|tag| medium.eta.of_tag(tag)).to_csr();

    let mut a = CooMat::new(n, n);
    let mut b = CooMat::new(n, n);
    let ni = dofs.n_interior;
    for node_i in 0..mesh.nodes.len() {
        let interior = dofs.interior_id[node_i] != usize::MAX;
        if interior {
            let iw = dofs.interior_id[node_i];
            let iv = ni + iw;
            for ptr in stiff.row_ptr[node_i]..stiff.row_ptr[node_i + 1] {
                let j = stiff.col_idx[ptr];
                let kij = stiff.vals[ptr];
                a.push(iw, dofs.w_col(j), kij);
                a.push(iv, dofs.v_col(j), -kij);
            }
            for ptr in mass.row_ptr[node_i]..mass.row_ptr[node_i + 1] {
                let j = mass.col_idx[ptr];
                let mij = mass.vals[ptr];
                b.push(iw, dofs.w_col(j), q * mij);
                b.push(iv, dofs.v_col(j), -mij);
            }
        } else {
            let it = 2 * ni + dofs.boundary_id[node_i];
            for ptr in stiff.row_ptr[node_i]..stiff.row_ptr[node_i + 1] {
                let j = stiff.col_idx[ptr];
                let kij = stiff.vals[ptr];
                // ∫∇(w-v)·∇φ: shared-trace columns cancel exactly.
                if dofs.interior_id[j] != usize::MAX {
                    a.push(it, dofs.w_col(j), kij);
                    a.push(it, dofs.v_col(j), -kij);
                }
            }
            for ptr in bmass.row_ptr[node_i]..bmass.row_ptr[node_i + 1] {
                let j = bmass.col_idx[ptr];
                a.push(it, dofs.w_col(j), -bmass.vals[ptr]);
            }
            for ptr in mass.row_ptr[node_i]..mass.row_ptr[node_i + 1] {
                let j = mass.col_idx[ptr];
                let mij = mass.vals[ptr];
                if dofs.interior_id[j] != usize::MAX {
                    b.push(it, dofs.w_col(j), q * mij);
                    b.push(it, dofs.v_col(j), -mij);
                } else {
                    b.push(it, dofs.w_col(j), (q - one) * mij);
                }
            }
        }
    }
    Ok(TransmissionPencil {
        a: a.to_csr(),
        b: b.to_csr(),
        dofs,
    })
}

/// Residual diagnostics of a discrete eigenpair, one per equation block.
#[derive(Debug, Clone, Copy)]
pub struct EigenResiduals<T: Real> {
    pub pde_w: T,
    pub pde_v: T,
    pub bc_dirichlet: T,
    pub bc_conductive: T,
}

impl<T: Real> EigenResiduals<T> {
    pub fn max(&self) -> T {
        self.pde_w
            .max(self.pde_v)
            .max(self.bc_dirichlet)
            .max(self.bc_conductive)
    }
}

/// Discrete conductive transmission eigenpair with nodal fields.
#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub k: Complex<T>,
    pub v: Vec<Complex<T>>,
    pub w: Vec<Complex<T>>,
    pub residuals: EigenResiduals<T>,
    /// Raw DOF vector (normalized).
    pub vector: Vec<Complex<T>>,
}

impl<T: Real> TransmissionPencil<T> {
    /// Expand a DOF vector into nodal `(w, v)` fields.
    pub fn split_fields(
        &self,
        x: &[Complex<T>],
        mesh: &TriMesh<T>,
    ) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let mut w = vec![Complex::new(T::zero(), T::zero()); mesh.nodes.len()];
        let mut v = w.clone();
        for node in 0..mesh.nodes.len() {
            w[node] = x[self.dofs.w_col(node)];
            v[node] = x[self.dofs.v_col(node)];
        }
        (w, v)
    }

    /// Normalize a DOF vector so that `‖v‖_{L²} + ‖w‖_{L²} = 1` and build the
    /// eigenpair record with per-block residuals.
    pub fn make_pair(
        &self,
        mesh: &TriMesh<T>,
        lambda: Complex<T>,
        x: &[Complex<T>],
    ) -> EigenPair<T> {
        let (w_raw, v_raw) = self.split_fields(x, mesh);
        let scale = l2_norm_sq(mesh, &v_raw).sqrt() + l2_norm_sq(mesh, &w_raw).sqrt();
        let inv = if scale > T::zero() {
            T::one() / scale
        } else {
            T::one()
        };
        let xs: Vec<Complex<T>> = x.iter().map(|c| *c * inv).collect();
        let (w, v) = self.split_fields(&xs, mesh);
        let residuals = self.block_residuals(lambda, &xs);
        let k = sqrt_principal(lambda);
        EigenPair {
            k,
            v,
            w,
            residuals,
            vector: xs,
        }
    }

    /// Per-block relative residuals of `A x = λ B x`.
    pub fn block_residuals(&self, lambda: Complex<T>, x: &[Complex<T>]) -> EigenResiduals<T> {
        let ax = self.a.matvec(x);
        let bx = self.b.matvec(x);
        let ni = self.dofs.n_interior;
        let norm_x = x.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        let scale_a = self
            .a
            .vals
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |p, q| p + q)
            .sqrt();
        let scale_b = self
            .b
            .vals
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |p, q| p + q)
            .sqrt();
        let denom = (scale_a + lambda.norm() * scale_b) * norm_x;
        let block = |lo: usize, hi: usize| -> T {
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + (ax[i] - lambda * bx[i]).norm_sqr();
            }
            acc.sqrt() / denom.max(rf(1e-300))
        };
        EigenResiduals {
            pde_w: block(0, ni),
            pde_v: block(ni, 2 * ni),
            bc_conductive: block(2 * ni, self.dofs.n_dofs()),
            // shared trace: w and v coincide on the boundary by construction
            bc_dirichlet: T::zero(),
        }
    }
}

fn sqrt_principal<T: Real>(lambda: Complex<T>) -> Complex<T> {
    let k = lambda.sqrt();
    if k.re < T::zero() {
        -k
    } else {
        k
    }
}

/// Rectangular search window in the complex `k²` plane.
#[derive(Debug, Clone, Copy)]
pub struct SearchWindow<T: Real> {
    pub re: (T, T),
    pub im: (T, T),
}

impl<T: Real> SearchWindow<T> {
    /// Real interval `(0, k_max]` in `k`, with a generous imaginary margin.
    pub fn real_k_interval(k_max: T) -> Self {
        let lam = k_max * k_max;
        Self {
            re: (rf(1e-9), lam),
            im: (-lam * rf(0.5), lam * rf(0.5)),
        }
    }

    /// Default window for a mesh: `k_max` from the resolution rule
    /// `k · h_mesh < 0.5`.
    pub fn for_mesh_size(h_mesh: T) -> Self {
        Self::real_k_interval(rf::<T>(0.5) / h_mesh)
    }

    pub fn contains(&self, lambda: Complex<T>) -> bool {
        lambda.re >= self.re.0
            && lambda.re <= self.re.1
            && lambda.im >= self.im.0
            && lambda.im <= self.im.1
    }

    pub fn center(&self) -> Complex<T> {
        Complex::new(
            (self.re.0 + self.re.1) * rf(0.5),
            (self.im.0 + self.im.1) * rf(0.5),
        )
    }
}

/// Residual threshold of the spurious-mode filter.
const SPURIOUS_RESIDUAL: f64 = 1e-6;

/// Dense full-spectrum solve (generalized Schur route) of the transmission
/// pencil inside a window of the complex `k²` plane.
///
/// Eigenpairs are polished with one inverse-iteration step and filtered by
/// the residual threshold; infinite/spurious modes from the `B`-nullspace
/// drop out at that stage. Matrices above `dense_budget` are rejected.
pub fn solve_dense<T: Real>(
    pencil: &TransmissionPencil<T>,
    mesh: &TriMesh<T>,
    window: &SearchWindow<T>,
    dense_budget: usize,
) -> Result<Vec<EigenPair<T>>, TeigError> {
    let n = pencil.dofs.n_dofs();
    if n > dense_budget {
        return Err(TeigError::OverBudget {
            n,
            budget: dense_budget,
        });
    }
    let a = pencil.a.to_dense();
    let b = pencil.b.to_dense();
    let mut sigma = window.center();
    // keep the shift off the real axis where the spectrum tends to live
    if sigma.im.abs() < rf::<T>(1e-6) * sigma.norm().max(T::one()) {
        sigma = sigma + Complex::new(T::zero(), sigma.norm().max(T::one()) * rf(0.05));
    }
    let pairs = generalized_eig(&a, &b, sigma)?;
    let mut out = Vec::new();
    for p in pairs {
        if !p.lambda.norm().is_finite() || !window.contains(p.lambda) {
            continue;
        }
        let polished = polish_pencil_pair(&a, &b, &p);
        if polished.residual.to_f64().unwrap_or(1.0) > SPURIOUS_RESIDUAL {
            continue;
        }
        out.push(pencil.make_pair(mesh, polished.lambda, &polished.vector));
    }
    out.sort_by(|x, y| x.k.norm().partial_cmp(&y.k.norm()).unwrap());
    Ok(out)
}

/// Banded shift-invert solve targeting the eigenvalues nearest `sigma`
/// (in the `k²` plane). DOFs are interleaved along a reverse Cuthill–McKee
/// node order to keep the band narrow, so this scales to meshes the dense
/// path cannot touch.
pub fn solve_banded_near<T: Real>(
    pencil: &TransmissionPencil<T>,
    mesh: &TriMesh<T>,
    sigma: Complex<T>,
    block: usize,
    seed: u64,
) -> Result<Vec<EigenPair<T>>, TeigError> {
    let n = pencil.dofs.n_dofs();
    // node adjacency from triangles
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); mesh.nodes.len()];
    for t in &mesh.triangles {
        for i in 0..3 {
            for j in 0..3 {
                if i != j && !adj[t[i]].contains(&t[j]) {
                    adj[t[i]].push(t[j]);
                }
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    let node_order = rcm_order(mesh.nodes.len(), &|v| adj[v].clone());
    // interleaved DOF permutation: perm[new] = old
    let mut perm = Vec::with_capacity(n);
    for &node in &node_order {
        if pencil.dofs.interior_id[node] != usize::MAX {
            perm.push(pencil.dofs.w_col(node));
            perm.push(pencil.dofs.v_col(node));
        } else {
            perm.push(pencil.dofs.w_col(node));
        }
    }
    debug_assert_eq!(perm.len(), n);
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let permute = |m: &CsrMat<T>| -> CsrMat<T> {
        let mut coo = CooMat::new(n, n);
        for i in 0..n {
            for ptr in m.row_ptr[i]..m.row_ptr[i + 1] {
                coo.push(inv[i], inv[m.col_idx[ptr]], m.vals[ptr]);
            }
        }
        coo.to_csr()
    };
    let ap = permute(&pencil.a);
    let bp = permute(&pencil.b);
    let mut sigma = sigma;
    if sigma.im.abs() < rf::<T>(1e-8) * sigma.norm().max(T::one()) {
        sigma = sigma + Complex::new(T::zero(), sigma.norm().max(T::one()) * rf(0.02));
    }
    let raw = shift_invert_subspace(&ap, &bp, sigma, block, 60, rf(1e-9), seed)?;
    let mut out = Vec::new();
    for p in raw {
        if p.residual.to_f64().unwrap_or(1.0) > SPURIOUS_RESIDUAL {
            continue;
        }
        // un-permute
        let mut x = vec![Complex::new(T::zero(), T::zero()); n];
        for (new, &old) in perm.iter().enumerate() {
            x[old] = p.vector[new];
        }
        out.push(pencil.make_pair(mesh, p.lambda, &x));
    }
    if out.is_empty() {
        return Err(TeigError::Empty);
    }
    Ok(out)
}

/// `B`-orthogonality residual in the bilinear (transpose) pairing for the
/// complex-symmetric pencil: `max_{i≠j} |x_iᵀ B x_j| / (‖B‖ ‖x_i‖ ‖x_j‖)`.
pub fn b_orthogonality_residual<T: Real>(
    pencil: &TransmissionPencil<T>,
    pairs: &[EigenPair<T>],
) -> T {
    let scale_b = pencil
        .b
        .vals
        .iter()
        .map(|c| c.norm_sqr())
        .fold(T::zero(), |p, q| p + q)
        .sqrt();
    let mut worst = T::zero();
    for i in 0..pairs.len() {
        let bxi = pencil.b.matvec(&pairs[i].vector);
        for j in 0..pairs.len() {
            if i == j {
                continue;
            }
            let mut acc = Complex::new(T::zero(), T::zero());
            for (xa, xb) in pairs[j].vector.iter().zip(&bxi) {
                acc = acc + *xa * *xb; // bilinear, no conjugation
            }
            let ni = pairs[i]
                .vector
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<T>()
                .sqrt();
            let nj = pairs[j]
                .vector
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<T>()
                .sqrt();
            worst = worst.max(acc.norm() / (scale_b * ni * nj).max(rf(1e-300)));
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Disk oracle (separation of variables)
// ---------------------------------------------------------------------------

/// One angular mode of the transmission problem on a centered disk.
#[derive(Debug, Clone, Copy)]
pub struct DiskModeProblem<T: Real> {
    pub radius: T,
    pub q: T,
    pub eta: Complex<T>,
    pub mode: i32,
}

/// Modal determinant
/// `d_n(k) = J_n(k₁R) (k J_n'(kR) + η J_n(kR)) - k₁ J_n'(k₁R) J_n(kR)`,
/// `k₁ = k√q`; zeros are the mode-`n` transmission eigenvalues.
pub fn disk_determinant<T: Real>(
    problem: &DiskModeProblem<T>,
    k: Complex<T>,
) -> Result<Complex<T>, TeigError> {
    if k.norm() == T::zero() {
        return Err(TeigError::ZeroWavenumber);
    }
    let n = problem.mode;
    let r = problem.radius;
    let k1 = k * problem.q.sqrt();
    let jk = bessel_j_complex(n, k * r);
    let jk_p = bessel_j_complex_prime(n, k * r);
    let jk1 = bessel_j_complex(n, k1 * r);
    let jk1_p = bessel_j_complex_prime(n, k1 * r);
    Ok(jk1 * (k * jk_p + problem.eta * jk) - k1 * jk1_p * jk)
}

/// All real roots of the modal determinant in `(k_lo, k_hi)`, located by
/// sign-change bracketing on a scan grid and refined by bisection to ~1e-12
/// relative; each root is validated by `|d_n| < 1e-10`.
/// Requires a real η (the determinant is then real on the real axis).
pub fn disk_eigenvalues<T: Real>(
    problem: &DiskModeProblem<T>,
    k_lo: T,
    k_hi: T,
    scan_steps: usize,
) -> Result<Vec<T>, TeigError> {
    assert!(
        problem.eta.im == T::zero(),
        "real-root search requires real η"
    );
    assert!(problem.q > T::zero(), "real-root search requires q > 0");
    if !(k_hi > k_lo && k_lo > T::zero()) {
        return Ok(Vec::new());
    }
    let f = |k: T| -> Result<T, TeigError> {
        Ok(disk_determinant(problem, Complex::new(k, T::zero()))?.re)
    };
    let mut roots = Vec::new();
    let steps = scan_steps.max(16);
    let mut k_prev = k_lo;
    let mut f_prev = f(k_prev)?;
    for i in 1..=steps {
        let k_cur = k_lo + (k_hi - k_lo) * rf::<T>(i as f64 / steps as f64);
        let f_cur = f(k_cur)?;
        if (f_prev > T::zero()) != (f_cur > T::zero()) {
            let mut lo = k_prev;
            let mut hi = k_cur;
            let mut flo = f_prev;
            for _ in 0..100 {
                let mid = (lo + hi) * rf::<T>(0.5);
                let fm = f(mid)?;
                if (flo > T::zero()) != (fm > T::zero()) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < rf::<T>(1e-13) * hi.max(T::one()) {
                    break;
                }
            }
            let root = (lo + hi) * rf::<T>(0.5);
            let val = disk_determinant(problem, Complex::new(root, T::zero()))?.norm();
            if val < rf(1e-10) {
                roots.push(root);
            }
        }
        k_prev = k_cur;
        f_prev = f_cur;
    }
    Ok(roots)
}

/// Smallest real transmission eigenvalue over modes `0..=mode_max`, with the
/// mode index that attains it.
pub fn disk_smallest_eigenvalue<T: Real>(
    radius: T,
    q: T,
    eta: Complex<T>,
    k_hi: T,
    mode_max: i32,
) -> Result<Option<(T, i32)>, TeigError> {
    let mut best: Option<(T, i32)> = None;
    for mode in 0..=mode_max {
        let problem = DiskModeProblem {
            radius,
            q,
            eta,
            mode,
        };
        let roots = disk_eigenvalues(&problem, rf(0.05), k_hi, 600)?;
        if let Some(&r) = roots.first() {
            if best.map_or(true, |(b, _)| r < b) {
                best = Some((r, mode));
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Corner-vanishing experiments
// ---------------------------------------------------------------------------

/// Shrinking-ball profile `M(ρ)` of `|v|` at a domain corner.
///
/// The probe vertex must coincide with a polygon corner whose opening is not
/// `π`; for the conductive regime η at the two incident edges must be
/// nonzero.
pub fn corner_vanishing_profile<T: Real>(
    medium: &ConductiveMedium<T>,
    mesh: &TriMesh<T>,
    pair: &EigenPair<T>,
    probe: &CornerProbe<T>,
    require_eta_nonzero: bool,
) -> Result<Vec<ProfileEntry<T>>, TeigError> {
    let poly = medium.domain.as_polygon(rf(0.05));
    let (ci, dist) = nearest_vertex(&poly, probe.vertex);
    let tol = rf::<T>(1e-9) * poly.bbox_diag();
    if dist > tol {
        return Err(TeigError::ProbeRegime(format!(
            "probe vertex is not a polygon corner (distance {:.3e})",
            dist.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let opening = poly.interior_angle(ci);
    if (opening - T::PI()).abs() < rf(1e-6) {
        return Err(TeigError::ProbeRegime(
            "corner opening equals π (degenerate)".into(),
        ));
    }
    let clearance = poly.clearance_at_vertex(ci);
    if probe.radii[0] >= clearance {
        return Err(TeigError::ProbeRegime(format!(
            "largest probe radius {:.3} reaches a non-adjacent boundary feature (clearance {:.3})",
            probe.radii[0].to_f64().unwrap_or(f64::NAN),
            clearance.to_f64().unwrap_or(f64::NAN)
        )));
    }
    if require_eta_nonzero {
        let nv = poly.vertices().len();
        let prev_tag = (ci + nv - 1) % nv;
        for tag in [prev_tag, ci] {
            match medium.eta.of_tag(tag) {
                Some(e) if e.norm() > T::zero() => {}
                _ => {
                    return Err(TeigError::ProbeRegime(format!(
                        "η vanishes on edge tag {tag} at the probed corner"
                    )))
                }
            }
        }
    }
    Ok(shrinking_ball_average(mesh, &pair.v, probe)?)
}

/// Interior-eigenfunction indicator for the η ≡ 0 regime: complex ball
/// averages of `V·w` (V = q - 1) around the corner.
pub fn interior_indicator<T: Real>(
    medium: &ConductiveMedium<T>,
    mesh: &TriMesh<T>,
    pair: &EigenPair<T>,
    probe: &CornerProbe<T>,
) -> Result<Vec<(T, Complex<T>)>, TeigError> {
    let poly = medium.domain.as_polygon(rf(0.05));
    let (ci, _) = nearest_vertex(&poly, probe.vertex);
    let nv = poly.vertices().len();
    let prev_tag = (ci + nv - 1) % nv;
    for tag in [prev_tag, ci] {
        if let Some(e) = medium.eta.of_tag(tag) {
            if e.norm() > T::zero() {
                return Err(TeigError::ProbeRegime(format!(
                    "interior indicator requires η = 0 near the corner (edge tag {tag})"
                )));
            }
        }
    }
    let v_field: Vec<Complex<T>> = pair
        .w
        .iter()
        .map(|w| (medium.q - Complex::new(T::one(), T::zero())) * *w)
        .collect();
    probe
        .radii
        .iter()
        .map(|&rho| {
            let avg = ball_average_complex(mesh, &v_field, probe.vertex, rho)?;
            Ok((rho, avg))
        })
        .collect()
}

fn nearest_vertex<T: Real>(poly: &crate::geometry::Polygon<T>, p: [T; 2]) -> (usize, T) {
    let mut best = (0usize, T::infinity());
    for (i, v) in poly.vertices().iter().enumerate() {
        let d = ((v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2)).sqrt();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Integral identities
// ---------------------------------------------------------------------------

/// A field with the data the Green identity needs.
pub struct AnalyticField<'a, T: Real> {
    pub value: Box<dyn Fn([T; 2]) -> Complex<T> + 'a>,
    pub grad: Box<dyn Fn([T; 2]) -> [Complex<T>; 2] + 'a>,
    pub laplacian: Box<dyn Fn([T; 2]) -> Complex<T> + 'a>,
}

/// Second Green identity on the meshed domain:
/// `∫ (g Δf - f Δg) = ∮ (g ∂_ν f - f ∂_ν g)`. Returns `(lhs, rhs, residual)`
/// with `residual = |lhs-rhs| / (|lhs|+|rhs|+ε)`.
pub fn green_identity<T: Real>(
    f: &AnalyticField<T>,
    g: &AnalyticField<T>,
    mesh: &TriMesh<T>,
) -> (Complex<T>, Complex<T>, T) {
    let mut lhs = Complex::new(T::zero(), T::zero());
    for t in &mesh.triangles {
        let (a, b, c) = (mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
        lhs = lhs
            + tri7_subdiv(
                &|x| (g.value)(x) * (f.laplacian)(x) - (f.value)(x) * (g.laplacian)(x),
                a,
                b,
                c,
                2,
            );
    }
    let mut rhs = Complex::new(T::zero(), T::zero());
    for be in &mesh.boundary_edges {
        let p0 = mesh.nodes[be.a];
        let p1 = mesh.nodes[be.b];
        let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
        let nu = [(p1[1] - p0[1]) / len, -(p1[0] - p0[0]) / len];
        rhs = rhs
            + gauss3_segment(
                &|x| {
                    let gf = (f.grad)(x);
                    let gg = (g.grad)(x);
                    let dnf = gf[0] * nu[0] + gf[1] * nu[1];
                    let dng = gg[0] * nu[0] + gg[1] * nu[1];
                    (g.value)(x) * dnf - (f.value)(x) * dng
                },
                p0,
                p1,
            );
    }
    let residual = (lhs - rhs).norm() / (lhs.norm() + rhs.norm() + rf(1e-30));
    (lhs, rhs, residual)
}

/// Corner frame for the master integral identity: the sector `S_h` sits at
/// `vertex` with rays at global angles `(theta_m, theta_max) ⊂ (-π, π)`.
#[derive(Debug, Clone, Copy)]
pub struct CornerFrame<T: Real> {
    pub vertex: [T; 2],
    pub theta_m: T,
    pub theta_max: T,
    pub h: T,
}

/// Field pair data consumed by the master identity.
pub struct PairFields<'a, T: Real> {
    pub v: Box<dyn Fn([T; 2]) -> Complex<T> + 'a>,
    pub w: Box<dyn Fn([T; 2]) -> Complex<T> + 'a>,
    pub grad_v: Box<dyn Fn([T; 2]) -> [Complex<T>; 2] + 'a>,
    pub grad_w: Box<dyn Fn([T; 2]) -> [Complex<T>; 2] + 'a>,
    /// `f1 - f2 = -k²(v - q w) = Δ(v - w)` for an exact pair.
    pub f1_minus_f2: Box<dyn Fn([T; 2]) -> Complex<T> + 'a>,
}

impl<'a, T: Real> PairFields<'a, T> {
    /// Wrap a FEM eigenpair (P1 interpolants) for identity checks.
    pub fn from_eigenpair(mesh: &'a TriMesh<T>, pair: &EigenPair<T>, q: Complex<T>) -> Self {
        let k2 = pair.k * pair.k;
        let vf = P1Field::new(mesh, pair.v.clone());
        let wf = P1Field::new(mesh, pair.w.clone());
        let vf2 = P1Field::new(mesh, pair.v.clone());
        let wf2 = P1Field::new(mesh, pair.w.clone());
        let vf3 = P1Field::new(mesh, pair.v.clone());
        let wf3 = P1Field::new(mesh, pair.w.clone());
        let zero = Complex::new(T::zero(), T::zero());
        PairFields {
            v: Box::new(move |x| vf.eval(x).unwrap_or(zero)),
            w: Box::new(move |x| wf.eval(x).unwrap_or(zero)),
            grad_v: Box::new(move |x| vf2.grad(x).unwrap_or([zero, zero])),
            grad_w: Box::new(move |x| wf2.grad(x).unwrap_or([zero, zero])),
            f1_minus_f2: Box::new(move |x| {
                let v = vf3.eval(x).unwrap_or(zero);
                let w = wf3.eval(x).unwrap_or(zero);
                -k2 * (v - q * w)
            }),
        }
    }
}

/// Report of one master-identity evaluation.
#[derive(Debug, Clone, Copy)]
pub struct MasterIdentityReport<T: Real> {
    pub s: T,
    pub volume_term: Complex<T>,
    pub arc_term: Complex<T>,
    pub ray_term: Complex<T>,
    /// `|volume - (arc - ray)| / (|volume| + |arc| + |ray| + ε)`
    pub residual: T,
}

/// Master integral identity at a corner:
/// `∫_{S_h} u0 (f1 - f2) = ∫_{Λ_h} (u0 ∂_ν(v-w) - (v-w) ∂_ν u0) - ∫_{Γ_h^±} η u0 v`.
///
/// `eta = 0` reduces it to the interior-transmission version with the ray
/// term absent.
pub fn master_identity_residual<T: Real>(
    frame: &CornerFrame<T>,
    fields: &PairFields<T>,
    eta: Complex<T>,
    s: T,
    tol: T,
) -> Result<MasterIdentityReport<T>, TeigError> {
    let vx = frame.vertex;
    let to_global = |r: T, th: T| -> [T; 2] { [vx[0] + r * th.cos(), vx[1] + r * th.sin()] };
    // volume term via polar quadrature around the corner
    let volume = crate::quad::quad_sector_polar(
        &|r: T, th: T| {
            let x = to_global(r, th);
            eval_u0_unchecked(s, r, th) * (fields.f1_minus_f2)(x)
        },
        frame.theta_m,
        frame.theta_max,
        frame.h,
        Tol::new(tol, tol),
        100_000,
    )?;
    // arc term on Λ_h (ν = radial direction)
    let h = frame.h;
    let arc = gk_adaptive(
        &|th: T| {
            let x = to_global(h, th);
            let dir = [th.cos(), th.sin()];
            let gv = (fields.grad_v)(x);
            let gw = (fields.grad_w)(x);
            let dn_vw = (gv[0] - gw[0]) * dir[0] + (gv[1] - gw[1]) * dir[1];
            let vw = (fields.v)(x) - (fields.w)(x);
            let u0 = eval_u0_unchecked(s, h, th);
            let du0 = du0_dr(s, h, th).expect("h > 0 off the cut");
            (u0 * dn_vw - vw * du0) * h
        },
        frame.theta_m,
        frame.theta_max,
        Tol::new(tol, tol),
        40_000,
        &[],
    )?;
    // ray term on Γ_h^±
    let brk = graded_breakpoints(h, 10);
    let mut ray = Complex::new(T::zero(), T::zero());
    if eta.norm() > T::zero() {
        for th in [frame.theta_m, frame.theta_max] {
            let q = gk_adaptive(
                &|r: T| {
                    let x = to_global(r, th);
                    eta * eval_u0_unchecked(s, r, th) * (fields.v)(x)
                },
                T::zero(),
                h,
                Tol::new(tol, tol),
                40_000,
                &brk,
            )?;
            ray = ray + q.value;
        }
    }
    let lhs = volume.value;
    let rhs = arc.value - ray;
    let residual =
        (lhs - rhs).norm() / (volume.value.norm() + arc.value.norm() + ray.norm() + rf(1e-30));
    Ok(MasterIdentityReport {
        s,
        volume_term: lhs,
        arc_term: arc.value,
        ray_term: ray,
        residual,
    })
}

/// Margin of `k²` to the nearest Dirichlet eigenvalue of `Δ + k² q` on the
/// mesh interior (hypothesis check for η recovery). Returns
/// `(relative margin, nearest eigenvalue)`.
pub fn dirichlet_margin<T: Real>(
    mesh: &TriMesh<T>,
    q: Complex<T>,
    k: T,
) -> Result<(T, T), TeigError> {
    let dofs = DofMap::new(mesh);
    let ni = dofs.n_interior;
    let stiff = assemble_stiffness(mesh).to_csr();
    let mass = assemble_mass(mesh, &|_| q).to_csr();
    let mut kk = CooMat::new(ni, ni);
    let mut mm = CooMat::new(ni, ni);
    for node in 0..mesh.nodes.len() {
        let i = dofs.interior_id[node];
        if i == usize::MAX {
            continue;
        }
        for ptr in stiff.row_ptr[node]..stiff.row_ptr[node + 1] {
            let j = dofs.interior_id[stiff.col_idx[ptr]];
            if j != usize::MAX {
                kk.push(i, j, stiff.vals[ptr]);
            }
        }
        for ptr in mass.row_ptr[node]..mass.row_ptr[node + 1] {
            let j = dofs.interior_id[mass.col_idx[ptr]];
            if j != usize::MAX {
                mm.push(i, j, mass.vals[ptr]);
            }
        }
    }
    let lam_target = k * k;
    let pairs = shift_invert_subspace(
        &kk.to_csr(),
        &mm.to_csr(),
        Complex::new(lam_target, rf(1e-3)),
        6,
        60,
        rf(1e-9),
        7,
    )?;
    let nearest = pairs
        .iter()
        .filter(|p| p.residual < rf(1e-6))
        .map(|p| p.lambda.re)
        .fold(T::infinity(), |acc, l| {
            if (l - lam_target).abs() < (acc - lam_target).abs() {
                l
            } else {
                acc
            }
        });
    let margin = (nearest - lam_target).abs() / lam_target;
    Ok((margin, nearest))
}
