//! Shrinking-ball averages of nodal fields around a probe point.
//!
//! Triangles cut by the ball boundary are split 4-ways to depth 4 and
//! integrated with the centroid rule piece by piece; fully inside triangles
//! use the edge-midpoint rule. Numerator and denominator use the same
//! quadrature, so a constant field averages exactly to itself.

use super::mesh::TriMesh;
use super::{dist, dist2, point_segment_distance, GeometryError};
use crate::quad::triangle_area;
use crate::scalar::{rf, Real};
use num_complex::Complex;

/// Probe location with a decreasing list of ball radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerProbe<T: Real> {
    pub vertex: [T; 2],
    pub radii: Vec<T>,
}

impl<T: Real> CornerProbe<T> {
    pub fn new(vertex: [T; 2], radii: Vec<T>) -> Result<Self, GeometryError> {
        if radii.is_empty() || radii[0] <= T::zero() {
            return Err(GeometryError::BadProbeRadii);
        }
        for w in radii.windows(2) {
            if !(w[1] > T::zero() && w[1] < w[0]) {
                return Err(GeometryError::BadProbeRadii);
            }
        }
        Ok(Self { vertex, radii })
    }

    /// Dyadic radii `rho0 * 2^{-j}`, `j = 0..count`.
    pub fn dyadic(vertex: [T; 2], rho0: T, count: usize) -> Result<Self, GeometryError> {
        let radii = (0..count.max(1))
            .map(|j| rho0 * rf::<T>(0.5f64.powi(j as i32)))
            .collect();
        Self::new(vertex, radii)
    }
}

/// One entry of a shrinking-ball profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileEntry<T: Real> {
    pub rho: T,
    pub average: T,
    /// Whether the mesh puts at least ~3 elements across this ball.
    pub resolvable: bool,
}

const SUBDIV_DEPTH: usize = 4;

/// Average of `|field|` over `B(vertex, rho) ∩ Ω` for each probe radius.
pub fn shrinking_ball_average<T: Real>(
    mesh: &TriMesh<T>,
    field: &[Complex<T>],
    probe: &CornerProbe<T>,
) -> Result<Vec<ProfileEntry<T>>, GeometryError> {
    let local_h = local_mesh_size(mesh, probe.vertex);
    probe
        .radii
        .iter()
        .map(|&rho| {
            let avg = ball_average_abs(mesh, field, probe.vertex, rho)?;
            Ok(ProfileEntry {
                rho,
                average: avg,
                resolvable: rho * rf::<T>(2.0) >= local_h * rf::<T>(3.0),
            })
        })
        .collect()
}

/// Average of `|field|` over the clipped ball.
pub fn ball_average_abs<T: Real>(
    mesh: &TriMesh<T>,
    field: &[Complex<T>],
    center: [T; 2],
    rho: T,
) -> Result<T, GeometryError> {
    let (num, den) = ball_integrals(mesh, field, center, rho, |v| {
        Complex::new(v.norm(), T::zero())
    })?;
    Ok((num.re / den).max(T::zero()))
}

/// Complex-valued ball average of the field itself.
pub fn ball_average_complex<T: Real>(
    mesh: &TriMesh<T>,
    field: &[Complex<T>],
    center: [T; 2],
    rho: T,
) -> Result<Complex<T>, GeometryError> {
    let (num, den) = ball_integrals(mesh, field, center, rho, |v| v)?;
    Ok(num / den)
}

fn ball_integrals<T: Real, F>(
    mesh: &TriMesh<T>,
    field: &[Complex<T>],
    center: [T; 2],
    rho: T,
    map: F,
) -> Result<(Complex<T>, T), GeometryError>
where
    F: Fn(Complex<T>) -> Complex<T> + Copy,
{
    assert_eq!(field.len(), mesh.nodes.len(), "field must be nodal");
    let diag = mesh.bbox_diag();
    if rho > diag {
        return Err(GeometryError::RadiusExceedsMesh(
            rho.to_f64().unwrap_or(f64::NAN),
            diag.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let r2 = rho * rho;
    let third = rf::<T>(1.0 / 3.0);
    let half = rf::<T>(0.5);
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    for t in &mesh.triangles {
        let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let v = [field[t[0]], field[t[1]], field[t[2]]];
        let inside = [
            dist2(p[0], center) <= r2,
            dist2(p[1], center) <= r2,
            dist2(p[2], center) <= r2,
        ];
        if inside.iter().all(|&b| b) {
            // Convexity: all vertices in the ball means the triangle is in it.
            let area = triangle_area(p[0], p[1], p[2]);
            let w = area * third;
            for k in 0..3 {
                let mid = (v[k] + v[(k + 1) % 3]) * half;
                num = num + map(mid) * w;
            }
            den += area;
            continue;
        }
        if !inside.iter().any(|&b| b) {
            // Quick reject when the whole triangle is far from the ball.
            let d = point_segment_distance(center, p[0], p[1])
                .min(point_segment_distance(center, p[1], p[2]))
                .min(point_segment_distance(center, p[2], p[0]));
            let bary = mesh_contains_point(p, center);
            if d > rho && !bary {
                continue;
            }
        }
        subdivide_accumulate(p, v, center, r2, SUBDIV_DEPTH, map, &mut num, &mut den);
    }
    if den <= T::zero() {
        return Err(GeometryError::RadiusExceedsMesh(
            rho.to_f64().unwrap_or(f64::NAN),
            0.0,
        ));
    }
    Ok((num, den))
}

fn mesh_contains_point<T: Real>(p: [[T; 2]; 3], q: [T; 2]) -> bool {
    let s0 = super::orient2d(p[0], p[1], q);
    let s1 = super::orient2d(p[1], p[2], q);
    let s2 = super::orient2d(p[2], p[0], q);
    (s0 >= T::zero() && s1 >= T::zero() && s2 >= T::zero())
        || (s0 <= T::zero() && s1 <= T::zero() && s2 <= T::zero())
}

#[allow(clippy::too_many_arguments)]
fn subdivide_accumulate<T: Real, F>(
    p: [[T; 2]; 3],
    v: [Complex<T>; 3],
    center: [T; 2],
    r2: T,
    depth: usize,
    map: F,
    num: &mut Complex<T>,
    den: &mut T,
) where
    F: Fn(Complex<T>) -> Complex<T> + Copy,
{
    let third = rf::<T>(1.0 / 3.0);
    if depth == 0 {
        let c = [
            (p[0][0] + p[1][0] + p[2][0]) * third,
            (p[0][1] + p[1][1] + p[2][1]) * third,
        ];
        if dist2(c, center) <= r2 {
            let area = triangle_area(p[0], p[1], p[2]);
            let val = (v[0] + v[1] + v[2]) * third;
            *num = *num + map(val) * area;
            *den += area;
        }
        return;
    }
    let half = rf::<T>(0.5);
    let m01 = [(p[0][0] + p[1][0]) * half, (p[0][1] + p[1][1]) * half];
    let m12 = [(p[1][0] + p[2][0]) * half, (p[1][1] + p[2][1]) * half];
    let m20 = [(p[2][0] + p[0][0]) * half, (p[2][1] + p[0][1]) * half];
    let v01 = (v[0] + v[1]) * half;
    let v12 = (v[1] + v[2]) * half;
    let v20 = (v[2] + v[0]) * half;
    subdivide_accumulate([p[0], m01, m20], [v[0], v01, v20], center, r2, depth - 1, map, num, den);
    subdivide_accumulate([m01, p[1], m12], [v01, v[1], v12], center, r2, depth - 1, map, num, den);
    subdivide_accumulate([m20, m12, p[2]], [v20, v12, v[2]], center, r2, depth - 1, map, num, den);
    subdivide_accumulate([m01, m12, m20], [v01, v12, v20], center, r2, depth - 1, map, num, den);
}

fn local_mesh_size<T: Real>(mesh: &TriMesh<T>, p: [T; 2]) -> T {
    let mut nearest = 0usize;
    let mut best = T::infinity();
    for (i, n) in mesh.nodes.iter().enumerate() {
        let d = dist2(*n, p);
        if d < best {
            best = d;
            nearest = i;
        }
    }
    let mut h = T::infinity();
    for t in &mesh.triangles {
        if t.contains(&nearest) {
            for k in 0..3 {
                h = h.min(dist(mesh.nodes[t[k]], mesh.nodes[t[(k + 1) % 3]]));
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, Domain, Polygon};
    use approx::assert_relative_eq;

    fn square_mesh(h: f64) -> TriMesh<f64> {
        triangulate(&Domain::Polygon(Polygon::unit_square()), h).unwrap()
    }

    #[test]
    fn probe_validation() {
        assert!(CornerProbe::new([0.0, 0.0], vec![]).is_err());
        assert!(CornerProbe::new([0.0, 0.0], vec![0.2, 0.3]).is_err());
        assert!(CornerProbe::new([0.0, 0.0], vec![0.2, 0.1, 0.05]).is_ok());
        let d = CornerProbe::dyadic([0.0, 0.0], 0.4, 3).unwrap();
        assert_eq!(d.radii, vec![0.4, 0.2, 0.1]);
    }

    #[test]
    fn constant_field_averages_to_one() {
        let mesh = square_mesh(0.15);
        let field = vec![Complex::new(1.0, 0.0); mesh.nodes.len()];
        let probe = CornerProbe::dyadic([0.0, 0.0], 0.4, 4).unwrap();
        let prof = shrinking_ball_average(&mesh, &field, &probe).unwrap();
        for e in &prof {
            assert_relative_eq!(e.average, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_field_averages_to_zero() {
        let mesh = square_mesh(0.2);
        let field = vec![Complex::new(0.0, 0.0); mesh.nodes.len()];
        let avg = ball_average_abs(&mesh, &field, [0.0, 0.0], 0.3).unwrap();
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn radial_field_quarter_plane_oracle() {
        // field(x) = |x| near the square corner at the origin: the corner ball
        // is a quarter disk, average = (2/3) rho  (closed-form polar integral).
        let mesh = square_mesh(0.02);
        let field: Vec<Complex<f64>> = mesh
            .nodes
            .iter()
            .map(|n| Complex::new((n[0] * n[0] + n[1] * n[1]).sqrt(), 0.0))
            .collect();
        for rho in [0.3, 0.15] {
            let avg = ball_average_abs(&mesh, &field, [0.0, 0.0], rho).unwrap();
            assert_relative_eq!(avg, 2.0 / 3.0 * rho, max_relative = 4e-3);
        }
    }

    #[test]
    fn oversized_radius_errors() {
        let mesh = square_mesh(0.3);
        let field = vec![Complex::new(1.0, 0.0); mesh.nodes.len()];
        assert!(ball_average_abs(&mesh, &field, [0.0, 0.0], 10.0).is_err());
    }

    #[test]
    fn refinement_improves_radial_average() {
        // first-order (or better) convergence to the closed form in target_h
        let probe = CornerProbe::new([0.0, 0.0], vec![0.25]).unwrap();
        let mut errs = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let mesh = square_mesh(h);
            let field: Vec<Complex<f64>> = mesh
                .nodes
                .iter()
                .map(|n| Complex::new((n[0] * n[0] + n[1] * n[1]).sqrt(), 0.0))
                .collect();
            let prof = shrinking_ball_average(&mesh, &field, &probe).unwrap();
            errs.push((prof[0].average - 2.0 / 3.0 * 0.25).abs());
        }
        assert!(errs[2] < errs[0] / 2.0, "errs={errs:?}");
    }

    #[test]
    fn resolvability_flagging() {
        let mesh = square_mesh(0.2);
        let field = vec![Complex::new(1.0, 0.0); mesh.nodes.len()];
        let probe = CornerProbe::new([0.0, 0.0], vec![0.4, 0.01]).unwrap();
        let prof = shrinking_ball_average(&mesh, &field, &probe).unwrap();
        assert!(prof[0].resolvable);
        assert!(!prof[1].resolvable);
    }
}
