//! Sector/polygon/disk geometry, triangular meshing and shrinking-ball
//! averaging.

mod delaunay;
mod mesh;
mod probe;

pub use delaunay::{
    triangulate, triangulate_with, triangulate_with_interface, Grading, InterfacedMesh,
    MeshOptions,
};
pub use mesh::{BoundaryEdge, MeshLocator, TriMesh};
pub use probe::{ball_average_abs, ball_average_complex, shrinking_ball_average, CornerProbe, ProfileEntry};

use crate::scalar::{rf, Real};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid sector: need -pi < theta_m < theta_M < pi and h > 0, got theta_m={0}, theta_M={1}, h={2}")]
    BadSector(f64, f64, f64),
    #[error("polygon must have at least 3 vertices")]
    TooFewVertices,
    #[error("polygon is degenerate (area {0} too small or collinear vertices)")]
    DegeneratePolygon(f64),
    #[error("polygon must be counter-clockwise")]
    NotCounterClockwise,
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("mesh generation failed: {0}")]
    Meshing(String),
    #[error("probe radii must be strictly decreasing and positive")]
    BadProbeRadii,
    #[error("probe radius {0} exceeds the mesh extent {1}")]
    RadiusExceedsMesh(f64, f64),
    #[error("probe vertex is not a mesh node (nearest node distance {0})")]
    VertexNotANode(f64),
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh file parse error: {0}")]
    Parse(String),
}

/// Open sector `theta_m < arg(x1 + i x2) < theta_M`, truncated at radius `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector<T: Real> {
    theta_m: T,
    theta_max: T,
    h: T,
}

impl<T: Real> Sector<T> {
    pub fn new(theta_m: T, theta_max: T, h: T) -> Result<Self, GeometryError> {
        let pi = T::PI();
        if !(theta_m > -pi && theta_m < theta_max && theta_max < pi && h > T::zero()) {
            return Err(GeometryError::BadSector(
                theta_m.to_f64().unwrap_or(f64::NAN),
                theta_max.to_f64().unwrap_or(f64::NAN),
                h.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { theta_m, theta_max, h })
    }

    pub fn theta_m(&self) -> T {
        self.theta_m
    }

    pub fn theta_max(&self) -> T {
        self.theta_max
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn opening(&self) -> T {
        self.theta_max - self.theta_m
    }

    /// Decay constant `δ_W = -max_{θ∈[θ_m,θ_M]} cos(θ/2 + π) > 0`.
    ///
    /// Since `cos(θ/2 + π) = -cos(θ/2)` and `cos(θ/2)` is unimodal on
    /// `(-π, π)` with its maximum at `θ = 0`, the maximum of the negated
    /// value sits at whichever endpoint is farther from zero.
    pub fn delta_w(&self) -> T {
        let half = rf::<T>(0.5);
        (self.theta_m * half).cos().min((self.theta_max * half).cos())
    }

    /// Sector with the same angles, truncated at a different radius.
    pub fn with_h(&self, h: T) -> Self {
        Self { h, ..*self }
    }

    /// Polygonal approximation of the truncated sector `S_h` (vertex at the
    /// origin, arc split into `arc_segments` chords).
    pub fn to_polygon(&self, arc_segments: usize) -> Polygon<T> {
        let n = arc_segments.max(2);
        let mut vertices = vec![[T::zero(), T::zero()]];
        for i in 0..=n {
            let t = self.theta_m
                + (self.theta_max - self.theta_m) * rf::<T>(i as f64 / n as f64);
            vertices.push([self.h * t.cos(), self.h * t.sin()]);
        }
        Polygon::new(vertices).expect("sector polygon is simple and CCW by construction")
    }
}

/// Simple counter-clockwise polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T: Real> {
    vertices: Vec<[T; 2]>,
}

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<[T; 2]>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices);
        }
        let poly = Self { vertices };
        let area = poly.signed_area();
        let scale = poly.bbox_diag();
        if area.abs() < rf::<T>(1e-12) * scale * scale {
            return Err(GeometryError::DegeneratePolygon(area.to_f64().unwrap_or(0.0)));
        }
        if area < T::zero() {
            return Err(GeometryError::NotCounterClockwise);
        }
        // Reject zero-length edges and exactly-collinear consecutive edges that
        // would create degenerate corners.
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let len2 = dist2(a, b);
            if len2 == T::zero() {
                return Err(GeometryError::DegeneratePolygon(0.0));
            }
        }
        // Simplicity: no two non-adjacent edges intersect.
        for i in 0..n {
            for j in i + 1..n {
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (a, b) = (poly.vertices[i], poly.vertices[(i + 1) % n]);
                let (c, d) = (poly.vertices[j], poly.vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn signed_area(&self) -> T {
        let n = self.vertices.len();
        let mut acc = T::zero();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc = acc + (a[0] * b[1] - b[0] * a[1]);
        }
        acc * rf::<T>(0.5)
    }

    pub fn bbox(&self) -> ([T; 2], [T; 2]) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo[0] = lo[0].min(v[0]);
            lo[1] = lo[1].min(v[1]);
            hi[0] = hi[0].max(v[0]);
            hi[1] = hi[1].max(v[1]);
        }
        (lo, hi)
    }

    pub fn bbox_diag(&self) -> T {
        let (lo, hi) = self.bbox();
        dist(lo, hi)
    }

    /// Ray-casting point-in-polygon test (boundary points implementation-defined).
    pub fn contains(&self, p: [T; 2]) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let t = (p[1] - a[1]) / (b[1] - a[1]);
                let x = a[0] + t * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: [T; 2]) -> T {
        let n = self.vertices.len();
        let mut best = T::infinity();
        for i in 0..n {
            let d = point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]);
            best = best.min(d);
        }
        best
    }

    /// Interior angle at vertex `i` in radians.
    pub fn interior_angle(&self, i: usize) -> T {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let v = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        let u = [prev[0] - v[0], prev[1] - v[1]];
        let w = [next[0] - v[0], next[1] - v[1]];
        let dot = u[0] * w[0] + u[1] * w[1];
        // Interior of a CCW polygon lies to the left of the outgoing edge, so
        // the interior angle runs from `w` to `u` counterclockwise; fold the
        // signed angle into (0, 2π) to cover reflex corners.
        let cross = w[0] * u[1] - w[1] * u[0];
        let ang = cross.atan2(dot);
        if ang <= T::zero() {
            ang + rf::<T>(2.0) * T::PI()
        } else {
            ang
        }
    }

    /// Distance from vertex `i` to the nearest boundary feature that is not
    /// one of its two incident edges.
    pub fn clearance_at_vertex(&self, i: usize) -> T {
        let n = self.vertices.len();
        let v = self.vertices[i];
        let mut best = T::infinity();
        for j in 0..n {
            // skip the two edges incident to vertex i
            if j == i || (j + 1) % n == i {
                continue;
            }
            let d = point_segment_distance(v, self.vertices[j], self.vertices[(j + 1) % n]);
            best = best.min(d);
        }
        best
    }

    pub fn unit_square() -> Self {
        Self::new(vec![
            [T::zero(), T::zero()],
            [T::one(), T::zero()],
            [T::one(), T::one()],
            [T::zero(), T::one()],
        ])
        .expect("unit square is a valid polygon")
    }

    /// Axis-aligned square centered at `c` with side `s`.
    pub fn centered_square(c: [T; 2], s: T) -> Self {
        let half = s * rf::<T>(0.5);
        Self::new(vec![
            [c[0] - half, c[1] - half],
            [c[0] + half, c[1] - half],
            [c[0] + half, c[1] + half],
            [c[0] - half, c[1] + half],
        ])
        .expect("square is a valid polygon")
    }

    /// Square with one corner replaced by a chamfer of the given depth
    /// (measured along each incident edge from the corner being cut).
    pub fn chamfered_square(c: [T; 2], s: T, chamfer: T) -> Self {
        let half = s * rf::<T>(0.5);
        Self::new(vec![
            [c[0] - half, c[1] - half],
            [c[0] + half, c[1] - half],
            // corner (+half, +half) cut
            [c[0] + half, c[1] + half - chamfer],
            [c[0] + half - chamfer, c[1] + half],
            [c[0] - half, c[1] + half],
        ])
        .expect("chamfered square is a valid polygon")
    }

    /// Regular polygonal approximation of a disk (vertices on the circle).
    pub fn disk_approx(center: [T; 2], radius: T, segments: usize) -> Self {
        let n = segments.max(8);
        let mut vertices = Vec::with_capacity(n);
        for i in 0..n {
            let t = rf::<T>(2.0 * std::f64::consts::PI * i as f64 / n as f64);
            vertices.push([center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
        }
        Self::new(vertices).expect("disk approximation is a valid polygon")
    }
}

/// Meshable domain: an explicit polygon or a disk meshed through its
/// polygonal approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain<T: Real> {
    Polygon(Polygon<T>),
    Disk { center: [T; 2], radius: T },
}

impl<T: Real> Domain<T> {
    /// Polygon used for meshing; disks are approximated with chord length
    /// roughly `boundary_h`.
    pub fn as_polygon(&self, boundary_h: T) -> Polygon<T> {
        match self {
            Domain::Polygon(p) => p.clone(),
            Domain::Disk { center, radius } => {
                let circ = rf::<T>(2.0 * std::f64::consts::PI) * *radius;
                let n = (circ / boundary_h).to_f64().unwrap_or(24.0).ceil() as usize;
                Polygon::disk_approx(*center, *radius, n.max(24))
            }
        }
    }
}

#[inline]
pub(crate) fn dist2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

#[inline]
pub(crate) fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    dist2(a, b).sqrt()
}

#[inline]
pub(crate) fn orient2d<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn segments_intersect<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
    {
        return true;
    }
    false
}

pub(crate) fn point_segment_distance<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == T::zero() {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).max(T::zero()).min(T::one());
    dist(p, [a[0] + ab[0] * t, a[1] + ab[1] * t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Dense-grid maximization oracle for δ_W.
    fn delta_w_oracle(theta_m: f64, theta_max: f64) -> f64 {
        let n = 20_000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = theta_m + (theta_max - theta_m) * i as f64 / n as f64;
            best = best.max((t / 2.0 + std::f64::consts::PI).cos());
        }
        -best
    }

    #[test]
    fn delta_w_symmetric_sector() {
        let s = Sector::new(-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3, 1.0).unwrap();
        assert_relative_eq!(s.delta_w(), 3f64.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            s.delta_w(),
            delta_w_oracle(s.theta_m(), s.theta_max()),
            max_relative = 1e-8
        );
    }

    #[test]
    fn delta_w_narrow_sector() {
        let s = Sector::new(-0.2, 0.2, 1.0).unwrap();
        assert_relative_eq!(s.delta_w(), 0.1f64.cos(), max_relative = 1e-13);
        assert_relative_eq!(
            s.delta_w(),
            delta_w_oracle(-0.2, 0.2),
            max_relative = 1e-8
        );
    }

    #[test]
    fn delta_w_degenerates_at_full_opening() {
        // θ_m → -π+, θ_M → π-  ⇒  δ_W → 0+, monotone in the truncation
        let mut last = f64::INFINITY;
        for eps in [0.5, 0.2, 0.05, 0.01, 0.001] {
            let s = Sector::new(-std::f64::consts::PI + eps, std::f64::consts::PI - eps, 1.0).unwrap();
            let d = s.delta_w();
            assert!(d > 0.0 && d < last);
            last = d;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sector_rejects_bad_angles() {
        assert!(Sector::new(0.3, 0.2, 1.0).is_err());
        assert!(Sector::new(-4.0, 0.2, 1.0).is_err());
        assert!(Sector::new(-0.2, 0.2, -1.0).is_err());
    }

    proptest! {
        /// δ_W equals min over θ of cos(θ/2) (algebraic identity with the
        /// defining formula cos(θ/2+π) = -cos(θ/2)).
        #[test]
        fn delta_w_identity(a in -3.1f64..3.1, b in -3.1f64..3.1) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-3);
            let s = Sector::new(lo, hi, 1.0).unwrap();
            let grid_min = (0..=2000)
                .map(|i| {
                    let t = lo + (hi - lo) * i as f64 / 2000.0;
                    (t / 2.0).cos()
                })
                .fold(f64::INFINITY, f64::min);
            prop_assert!((s.delta_w() - grid_min).abs() < 1e-6);
        }
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::<f64>::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        // collinear
        assert!(Polygon::<f64>::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // clockwise
        assert!(Polygon::<f64>::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        // bow-tie
        assert!(Polygon::<f64>::new(vec![
            [0.0, 0.0],
            [1.0, 1.0],
            [1.0, 0.0],
            [0.0, 1.0]
        ])
        .is_err());
        let sq = Polygon::<f64>::unit_square();
        assert_relative_eq!(sq.signed_area(), 1.0);
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
    }

    #[test]
    fn interior_angles_square() {
        let sq = Polygon::<f64>::unit_square();
        for i in 0..4 {
            assert_relative_eq!(sq.interior_angle(i), std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
        }
        let ch = Polygon::<f64>::chamfered_square([0.0, 0.0], 1.0, 0.3);
        // chamfer corners are 3π/4
        assert_relative_eq!(ch.interior_angle(2), 3.0 * std::f64::consts::FRAC_PI_4, max_relative = 1e-12);
    }

    #[test]
    fn clearance_at_square_vertex() {
        let sq = Polygon::<f64>::unit_square();
        // nearest non-incident feature to corner 0 is either far edge at distance 1
        assert_relative_eq!(sq.clearance_at_vertex(0), 1.0, max_relative = 1e-12);
    }
}
