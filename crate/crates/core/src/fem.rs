//! Piecewise-linear (P1) finite element assembly on triangle meshes.

use crate::geometry::{MeshLocator, TriMesh};
use crate::linalg::CooMat;
use crate::scalar::{rf, Real};
use num_complex::Complex;

/// Area and barycentric-basis gradients of a triangle.
pub fn tri_geometry<T: Real>(mesh: &TriMesh<T>, ti: usize) -> (T, [[T; 2]; 3]) {
    let t = mesh.triangles[ti];
    let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let area = det * rf::<T>(0.5);
    let inv = T::one() / det;
    let grads = [
        [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
        [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
        [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
    ];
    (area, grads)
}

/// Stiffness matrix `∫ ∇φ_i · ∇φ_j` over the whole mesh.
pub fn assemble_stiffness<T: Real>(mesh: &TriMesh<T>) -> CooMat<T> {
    let n = mesh.nodes.len();
    let mut coo = CooMat::new(n, n);
    for ti in 0..mesh.triangles.len() {
        let (area, g) = tri_geometry(mesh, ti);
        let t = mesh.triangles[ti];
        for i in 0..3 {
            for j in 0..3 {
                let v = (g[i][0] * g[j][0] + g[i][1] * g[j][1]) * area;
                coo.push(t[i], t[j], Complex::new(v, T::zero()));
            }
        }
    }
    coo
}

/// Mass matrix `∫ w φ_i φ_j` with a per-triangle complex weight.
pub fn assemble_mass<T: Real>(
    mesh: &TriMesh<T>,
    weight: &dyn Fn(usize) -> Complex<T>,
) -> CooMat<T> {
    let n = mesh.nodes.len();
    let mut coo = CooMat::new(n, n);
    let twelfth = rf::<T>(1.0 / 12.0);
    for ti in 0..mesh.triangles.len() {
        let area = mesh.triangle_area(ti);
        let w = weight(ti) * area * twelfth;
        let t = mesh.triangles[ti];
        for i in 0..3 {
            for j in 0..3 {
                let f = if i == j { rf::<T>(2.0) } else { T::one() };
                coo.push(t[i], t[j], w * f);
            }
        }
    }
    coo
}

/// Boundary mass `∮ η φ_i φ_j` with a per-tag complex weight (`None`
/// contributions are skipped).
pub fn assemble_boundary_mass<T: Real>(
    mesh: &TriMesh<T>,
    eta_of_tag: &dyn Fn(usize) -> Option<Complex<T>>,
) -> CooMat<T> {
    let n = mesh.nodes.len();
    let mut coo = CooMat::new(n, n);
    let sixth = rf::<T>(1.0 / 6.0);
    for be in &mesh.boundary_edges {
        let Some(eta) = eta_of_tag(be.tag) else {
            continue;
        };
        let a = mesh.nodes[be.a];
        let b = mesh.nodes[be.b];
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let w = eta * (len * sixth);
        coo.push(be.a, be.a, w * rf::<T>(2.0));
        coo.push(be.b, be.b, w * rf::<T>(2.0));
        coo.push(be.a, be.b, w);
        coo.push(be.b, be.a, w);
    }
    coo
}

/// Nodal interpolation of a function.
pub fn interpolate<T: Real, F>(mesh: &TriMesh<T>, f: F) -> Vec<Complex<T>>
where
    F: Fn([T; 2]) -> Complex<T>,
{
    mesh.nodes.iter().map(|&p| f(p)).collect()
}

/// `vᴴ (M + K) v` based discrete H¹ norm of a nodal field.
pub fn h1_norm<T: Real>(mesh: &TriMesh<T>, v: &[Complex<T>]) -> T {
    (l2_norm_sq(mesh, v) + h1_semi_norm_sq(mesh, v)).sqrt()
}

/// Exact `∫ |v_h|²` of the P1 interpolant.
pub fn l2_norm_sq<T: Real>(mesh: &TriMesh<T>, v: &[Complex<T>]) -> T {
    let twelfth = rf::<T>(1.0 / 12.0);
    let mut acc = T::zero();
    for ti in 0..mesh.triangles.len() {
        let t = mesh.triangles[ti];
        let area = mesh.triangle_area(ti);
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let s = a.norm_sqr() + b.norm_sqr() + c.norm_sqr();
        let cross = (a.conj() * b + b.conj() * c + c.conj() * a).re;
        acc = acc + area * twelfth * (s * rf::<T>(2.0) + cross * rf::<T>(2.0));
    }
    acc
}

/// Exact `∫ |∇v_h|²` of the P1 interpolant.
pub fn h1_semi_norm_sq<T: Real>(mesh: &TriMesh<T>, v: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for ti in 0..mesh.triangles.len() {
        let (area, g) = tri_geometry(mesh, ti);
        let t = mesh.triangles[ti];
        let mut gx = Complex::new(T::zero(), T::zero());
        let mut gy = Complex::new(T::zero(), T::zero());
        for k in 0..3 {
            gx = gx + v[t[k]] * g[k][0];
            gy = gy + v[t[k]] * g[k][1];
        }
        acc = acc + (gx.norm_sqr() + gy.norm_sqr()) * area;
    }
    acc
}

/// P1 interpolant of a nodal field with a reusable locator.
pub struct P1Field<'m, T: Real> {
    pub mesh: &'m TriMesh<T>,
    pub values: Vec<Complex<T>>,
    locator: MeshLocator<'m, T>,
}

impl<'m, T: Real> P1Field<'m, T> {
    pub fn new(mesh: &'m TriMesh<T>, values: Vec<Complex<T>>) -> Self {
        assert_eq!(values.len(), mesh.nodes.len());
        Self {
            mesh,
            values,
            locator: mesh.locator(),
        }
    }

    pub fn eval(&self, p: [T; 2]) -> Option<Complex<T>> {
        let (ti, l) = self.locator.locate(p)?;
        let t = self.mesh.triangles[ti];
        Some(self.values[t[0]] * l[0] + self.values[t[1]] * l[1] + self.values[t[2]] * l[2])
    }

    /// Piecewise-constant gradient at `p`.
    pub fn grad(&self, p: [T; 2]) -> Option<[Complex<T>; 2]> {
        let (ti, _) = self.locator.locate(p)?;
        let (_, g) = tri_geometry(self.mesh, ti);
        let t = self.mesh.triangles[ti];
        let mut gx = Complex::new(T::zero(), T::zero());
        let mut gy = Complex::new(T::zero(), T::zero());
        for k in 0..3 {
            gx = gx + self.values[t[k]] * g[k][0];
            gy = gy + self.values[t[k]] * g[k][1];
        }
        Some([gx, gy])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, Domain, Polygon};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn mass_total_is_area() {
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.22).unwrap();
        let m = assemble_mass(&mesh, &|_| Complex64::new(1.0, 0.0)).to_csr();
        let ones = vec![Complex64::new(1.0, 0.0); mesh.nodes.len()];
        let total: Complex64 = m.matvec(&ones).iter().sum();
        assert_relative_eq!(total.re, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn stiffness_kills_constants_and_linear_energy() {
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.2).unwrap();
        let k = assemble_stiffness(&mesh).to_csr();
        let ones = vec![Complex64::new(1.0, 0.0); mesh.nodes.len()];
        let k1 = k.matvec(&ones);
        assert!(k1.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-12);
        // ∫|∇x|² over unit square = 1
        let lin: Vec<Complex64> = mesh.nodes.iter().map(|n| Complex64::new(n[0], 0.0)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let kl = k.matvec(&lin);
        for i in 0..lin.len() {
            acc += lin[i].conj() * kl[i];
        }
        assert_relative_eq!(acc.re, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn boundary_mass_total_is_perimeter() {
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.3).unwrap();
        let e = assemble_boundary_mass(&mesh, &|_| Some(Complex64::new(1.0, 0.0))).to_csr();
        let ones = vec![Complex64::new(1.0, 0.0); mesh.nodes.len()];
        let total: Complex64 = e.matvec(&ones).iter().sum();
        assert_relative_eq!(total.re, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn l2_and_h1_of_linear_field() {
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.15).unwrap();
        let lin: Vec<Complex64> = mesh.nodes.iter().map(|n| Complex64::new(n[0], 0.0)).collect();
        // ∫ x² = 1/3, ∫ |∇x|² = 1
        assert_relative_eq!(l2_norm_sq(&mesh, &lin), 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(h1_semi_norm_sq(&mesh, &lin), 1.0, max_relative = 1e-12);
        assert_relative_eq!(h1_norm(&mesh, &lin), (4.0f64 / 3.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn p1_field_eval_and_grad() {
        let mesh = triangulate(&Domain::Polygon(Polygon::<f64>::unit_square()), 0.2).unwrap();
        let vals: Vec<Complex64> = mesh
            .nodes
            .iter()
            .map(|n| Complex64::new(2.0 * n[0] - n[1], 0.0))
            .collect();
        let f = P1Field::new(&mesh, vals);
        let v = f.eval([0.3, 0.7]).unwrap();
        assert_relative_eq!(v.re, 2.0 * 0.3 - 0.7, max_relative = 1e-12);
        let g = f.grad([0.3, 0.7]).unwrap();
        assert_relative_eq!(g[0].re, 2.0, max_relative = 1e-10);
        assert_relative_eq!(g[1].re, -1.0, max_relative = 1e-10);
    }
}
