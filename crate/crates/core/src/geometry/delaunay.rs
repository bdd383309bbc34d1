//! Constrained triangulation: Bowyer–Watson insertion with quadtree-seeded
//! interior points, boundary recovery by midpoint splitting and
//! Ruppert-style quality refinement (circumcenter insertion, encroached
//! segments split first).

use super::mesh::{BoundaryEdge, TriMesh};
use super::{dist, dist2, orient2d, point_segment_distance, Domain, GeometryError, Polygon};
use crate::scalar::{rf, Real};
use std::collections::HashSet;

/// Radial size grading toward a point of interest (probe corners).
#[derive(Debug, Clone, Copy)]
pub struct Grading<T: Real> {
    pub center: [T; 2],
    /// Element size requested at the center.
    pub h_local: T,
    /// Distance at which the size has grown back to `target_h`.
    pub radius: T,
}

#[derive(Debug, Clone, Copy)]
pub struct MeshOptions<T: Real> {
    pub target_h: T,
    /// Minimum-angle goal for the refinement pass, degrees.
    pub min_angle_deg: f64,
    /// Seed for the deterministic jitter applied to interior seed points.
    pub seed: u64,
    pub grading: Option<Grading<T>>,
    pub max_refine_inserts: usize,
}

impl<T: Real> MeshOptions<T> {
    pub fn new(target_h: T) -> Self {
        Self {
            target_h,
            min_angle_deg: 25.0,
            seed: 0,
            grading: None,
            max_refine_inserts: 60_000,
        }
    }

    pub fn with_grading(mut self, grading: Grading<T>) -> Self {
        self.grading = Some(grading);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn size_at(&self, p: [T; 2]) -> T {
        match &self.grading {
            None => self.target_h,
            Some(g) => {
                let d = dist(p, g.center);
                if d >= g.radius {
                    self.target_h
                } else {
                    g.h_local + (self.target_h - g.h_local) * (d / g.radius)
                }
            }
        }
    }
}

/// Mesh a domain with the default options (Ruppert refinement at 25°).
pub fn triangulate<T: Real>(domain: &Domain<T>, target_h: T) -> Result<TriMesh<T>, GeometryError> {
    triangulate_with(domain, &MeshOptions::new(target_h))
}

pub fn triangulate_with<T: Real>(
    domain: &Domain<T>,
    opts: &MeshOptions<T>,
) -> Result<TriMesh<T>, GeometryError> {
    if !(opts.target_h > T::zero()) {
        return Err(GeometryError::Meshing("target_h must be positive".into()));
    }
    let boundary_h = match &opts.grading {
        None => opts.target_h,
        Some(g) => g.h_local.min(opts.target_h),
    };
    let poly = domain.as_polygon(boundary_h.max(opts.target_h * rf(0.5)));
    Mesher::new(poly, None, *opts)?.run().map(|m| m.mesh)
}

/// Mesh with an internal constrained interface polygon (resolved exactly by
/// mesh edges). Interface edges are tagged by the interface polygon's edge
/// index and returned separately; `inside` flags triangles interior to the
/// interface polygon.
pub struct InterfacedMesh<T: Real> {
    pub mesh: TriMesh<T>,
    pub interface_edges: Vec<BoundaryEdge>,
    pub inside: Vec<bool>,
}

pub fn triangulate_with_interface<T: Real>(
    outer: &Domain<T>,
    interface: &Polygon<T>,
    opts: &MeshOptions<T>,
) -> Result<InterfacedMesh<T>, GeometryError> {
    if !(opts.target_h > T::zero()) {
        return Err(GeometryError::Meshing("target_h must be positive".into()));
    }
    let poly = outer.as_polygon(opts.target_h);
    for v in interface.vertices() {
        if !poly.contains(*v) {
            return Err(GeometryError::Meshing(
                "interface polygon must lie strictly inside the outer domain".into(),
            ));
        }
    }
    Mesher::new(poly, Some(interface.clone()), *opts)?.run()
}

struct Tri<T: Real> {
    v: [usize; 3],
    alive: bool,
    cc: [T; 2],
    r2: T,
}

struct Seg {
    a: usize,
    b: usize,
    tag: usize,
    interface: bool,
}

struct Mesher<T: Real> {
    poly: Polygon<T>,
    interface: Option<Polygon<T>>,
    opts: MeshOptions<T>,
    pts: Vec<[T; 2]>,
    tris: Vec<Tri<T>>,
    segs: Vec<Seg>,
    corner_pts: HashSet<usize>,
    diag: T,
    inserts: usize,
}

impl<T: Real> Mesher<T> {
    fn new(
        poly: Polygon<T>,
        interface: Option<Polygon<T>>,
        opts: MeshOptions<T>,
    ) -> Result<Self, GeometryError> {
        let diag = poly.bbox_diag();
        Ok(Self {
            poly,
            interface,
            opts,
            pts: Vec::new(),
            tris: Vec::new(),
            segs: Vec::new(),
            corner_pts: HashSet::new(),
            diag,
            inserts: 0,
        })
    }

    fn run(mut self) -> Result<InterfacedMesh<T>, GeometryError> {
        self.init_super_triangle();
        self.insert_boundary_chain()?;
        self.insert_interior_seeds()?;
        self.recover_boundary(12)?;
        self.refine()?;
        self.recover_boundary(6)?;
        self.finish()
    }

    fn init_super_triangle(&mut self) {
        let (lo, hi) = self.poly.bbox();
        let cx = (lo[0] + hi[0]) * rf::<T>(0.5);
        let cy = (lo[1] + hi[1]) * rf::<T>(0.5);
        let r = self.diag * rf::<T>(40.0) + rf::<T>(1.0);
        for k in 0..3 {
            let ang = rf::<T>(std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            self.pts.push([cx + r * ang.cos(), cy + r * ang.sin()]);
        }
        let t = new_tri(&self.pts, [0, 1, 2]);
        self.tris.push(t);
    }

    fn insert_boundary_chain(&mut self) -> Result<(), GeometryError> {
        let outer = self.poly.vertices().to_vec();
        self.insert_polygon_chain(&outer, false)?;
        if let Some(interface) = self.interface.clone() {
            self.insert_polygon_chain(&interface.vertices().to_vec(), true)?;
        }
        Ok(())
    }

    fn insert_polygon_chain(
        &mut self,
        verts: &[[T; 2]],
        interface: bool,
    ) -> Result<(), GeometryError> {
        let n = verts.len();
        // Corner points first so every polygon vertex is a mesh node.
        let mut corner_idx = Vec::with_capacity(n);
        for v in verts {
            let idx = self.insert_point(*v)?;
            corner_idx.push(idx);
            self.corner_pts.insert(idx);
        }
        for e in 0..n {
            let a = verts[e];
            let b = verts[(e + 1) % n];
            let mut chain = vec![corner_idx[e]];
            self.subdivide_edge(a, b, e, &mut chain)?;
            chain.push(corner_idx[(e + 1) % n]);
            for w in chain.windows(2) {
                self.segs.push(Seg {
                    a: w[0],
                    b: w[1],
                    tag: e,
                    interface,
                });
            }
        }
        Ok(())
    }

    fn subdivide_edge(
        &mut self,
        a: [T; 2],
        b: [T; 2],
        _tag: usize,
        chain: &mut Vec<usize>,
    ) -> Result<(), GeometryError> {
        let mid = [(a[0] + b[0]) * rf::<T>(0.5), (a[1] + b[1]) * rf::<T>(0.5)];
        let len = dist(a, b);
        if len <= self.opts.size_at(mid) * rf(1.05) {
            return Ok(());
        }
        self.subdivide_edge(a, mid, _tag, chain)?;
        let idx = self.insert_point(mid)?;
        chain.push(idx);
        self.subdivide_edge(mid, b, _tag, chain)?;
        Ok(())
    }

    fn insert_interior_seeds(&mut self) -> Result<(), GeometryError> {
        let (lo, hi) = self.poly.bbox();
        let w = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let mut rng = SplitMix64::new(self.opts.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut stack = vec![(
            [(lo[0] + hi[0]) * rf::<T>(0.5), (lo[1] + hi[1]) * rf::<T>(0.5)],
            w * rf::<T>(0.5),
        )];
        let mut seeds = Vec::new();
        while let Some((c, half)) = stack.pop() {
            let size = self.opts.size_at(c);
            if half * rf(2.0) > size && half > self.opts.size_at(c) * rf(0.25) {
                let q = half * rf::<T>(0.5);
                // Deterministic DFS order.
                stack.push(([c[0] - q, c[1] - q], q));
                stack.push(([c[0] + q, c[1] - q], q));
                stack.push(([c[0] - q, c[1] + q], q));
                stack.push(([c[0] + q, c[1] + q], q));
                continue;
            }
            let jx = rf::<T>(rng.next_unit() - 0.5) * size * rf(0.3);
            let jy = rf::<T>(rng.next_unit() - 0.5) * size * rf(0.3);
            let p = [c[0] + jx, c[1] + jy];
            if !self.poly.contains(p) {
                continue;
            }
            if self.poly.boundary_distance(p) < size * rf(0.55) {
                continue;
            }
            if let Some(interface) = &self.interface {
                if interface.boundary_distance(p) < size * rf(0.55) {
                    continue;
                }
            }
            seeds.push(p);
        }
        for p in seeds {
            self.insert_point(p)?;
        }
        Ok(())
    }

    /// Bowyer–Watson insertion; returns the point index (an existing index
    /// when `p` coincides with a current vertex).
    fn insert_point(&mut self, p: [T; 2]) -> Result<usize, GeometryError> {
        let tol2 = (self.diag * rf::<T>(1e-9)).powi(2);
        let mut bad: Vec<usize> = Vec::new();
        for (ti, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            // Cheap reject on the cached circumcircle, exact-ish determinant
            // for the actual decision.
            if dist2(p, t.cc) > t.r2 * rf(1.2) {
                continue;
            }
            for &v in &t.v {
                if dist2(p, self.pts[v]) < tol2 {
                    return Ok(v);
                }
            }
            if in_circumcircle(
                self.pts[t.v[0]],
                self.pts[t.v[1]],
                self.pts[t.v[2]],
                p,
            ) {
                bad.push(ti);
            }
        }
        if bad.is_empty() {
            return Err(GeometryError::Meshing(format!(
                "point ({:?}) not inside any circumcircle; triangulation lost",
                (p[0].to_f64(), p[1].to_f64())
            )));
        }
        // Cavity boundary: undirected edges used exactly once.
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(bad.len() * 3 / 2 + 3);
        for &ti in &bad {
            let v = self.tris[ti].v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                if let Some(pos) = edges.iter().position(|&x| x == key) {
                    edges.swap_remove(pos);
                } else {
                    edges.push(key);
                }
            }
            self.tris[ti].alive = false;
        }
        let pi = self.pts.len();
        self.pts.push(p);
        for (a, b) in edges {
            let (a, b) = if orient2d(p, self.pts[a], self.pts[b]) > T::zero() {
                (a, b)
            } else {
                (b, a)
            };
            let t = new_tri(&self.pts, [pi, a, b]);
            self.tris.push(t);
        }
        self.inserts += 1;
        Ok(pi)
    }

    fn edge_set(&self) -> HashSet<(usize, usize)> {
        let mut set = HashSet::new();
        for t in self.tris.iter().filter(|t| t.alive) {
            let v = t.v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                set.insert((e.0.min(e.1), e.0.max(e.1)));
            }
        }
        set
    }

    /// Split boundary segments until every one is an edge of the current
    /// triangulation.
    fn recover_boundary(&mut self, max_rounds: usize) -> Result<(), GeometryError> {
        for _ in 0..max_rounds {
            let edges = self.edge_set();
            let missing: Vec<usize> = (0..self.segs.len())
                .filter(|&si| {
                    let s = &self.segs[si];
                    !edges.contains(&(s.a.min(s.b), s.a.max(s.b)))
                })
                .collect();
            if missing.is_empty() {
                return Ok(());
            }
            for si in missing.into_iter().rev() {
                self.split_segment(si)?;
            }
        }
        let edges = self.edge_set();
        if self
            .segs
            .iter()
            .all(|s| edges.contains(&(s.a.min(s.b), s.a.max(s.b))))
        {
            Ok(())
        } else {
            Err(GeometryError::Meshing(
                "boundary recovery did not converge".into(),
            ))
        }
    }

    fn split_segment(&mut self, si: usize) -> Result<(), GeometryError> {
        let (a, b, tag, interface) = {
            let s = &self.segs[si];
            (s.a, s.b, s.tag, s.interface)
        };
        let pa = self.pts[a];
        let pb = self.pts[b];
        let mid = [(pa[0] + pb[0]) * rf::<T>(0.5), (pa[1] + pb[1]) * rf::<T>(0.5)];
        let m = self.insert_point(mid)?;
        self.segs[si] = Seg {
            a,
            b: m,
            tag,
            interface,
        };
        self.segs.push(Seg {
            a: m,
            b,
            tag,
            interface,
        });
        Ok(())
    }

    fn tri_inside(&self, ti: usize) -> bool {
        let v = self.tris[ti].v;
        if v.iter().any(|&x| x < 3) {
            return false;
        }
        let third = rf::<T>(1.0 / 3.0);
        let c = [
            (self.pts[v[0]][0] + self.pts[v[1]][0] + self.pts[v[2]][0]) * third,
            (self.pts[v[0]][1] + self.pts[v[1]][1] + self.pts[v[2]][1]) * third,
        ];
        self.poly.contains(c)
    }

    fn refine(&mut self) -> Result<(), GeometryError> {
        let min_angle = rf::<T>(self.opts.min_angle_deg.to_radians());
        let budget = self.opts.max_refine_inserts;
        for _pass in 0..200 {
            if self.inserts >= budget {
                break;
            }
            let mut actions: Vec<(usize, [T; 2])> = Vec::new();
            for ti in 0..self.tris.len() {
                if !self.tris[ti].alive || !self.tri_inside(ti) {
                    continue;
                }
                if let Some(cc) = self.needs_refinement(ti, min_angle) {
                    actions.push((ti, cc));
                }
            }
            if actions.is_empty() {
                return Ok(());
            }
            let mut did_any = false;
            for (ti, cc) in actions {
                if self.inserts >= budget {
                    break;
                }
                if !self.tris[ti].alive {
                    continue;
                }
                // Encroached boundary segments are split instead of inserting
                // the circumcenter (Ruppert's rule); likewise when the
                // circumcenter escapes the domain.
                let enc = self.encroached_segment(cc);
                if let Some(si) = enc {
                    self.split_segment(si)?;
                    did_any = true;
                } else if self.poly.contains(cc)
                    && self.poly.boundary_distance(cc) > self.diag * rf(1e-9)
                {
                    self.insert_point(cc)?;
                    did_any = true;
                } else if let Some(si) = self.nearest_splittable_segment(cc) {
                    self.split_segment(si)?;
                    did_any = true;
                }
            }
            if !did_any {
                return Ok(());
            }
        }
        Ok(())
    }

    /// Circumcenter of the triangle if it violates the quality/size goals.
    fn needs_refinement(&self, ti: usize, min_angle: T) -> Option<[T; 2]> {
        let t = &self.tris[ti];
        let (a, b, c) = (self.pts[t.v[0]], self.pts[t.v[1]], self.pts[t.v[2]]);
        let third = rf::<T>(1.0 / 3.0);
        let centroid = [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third];
        let size = self.opts.size_at(centroid);
        let lab = dist(a, b);
        let lbc = dist(b, c);
        let lca = dist(c, a);
        let diam = lab.max(lbc).max(lca);
        if diam > size * rf(1.7) {
            return Some(t.cc);
        }
        // Smallest angle and the vertex it sits at.
        let mut worst = T::infinity();
        let mut worst_v = 0usize;
        let pts = [a, b, c];
        for i in 0..3 {
            let v = pts[i];
            let u = pts[(i + 1) % 3];
            let w = pts[(i + 2) % 3];
            let du = [u[0] - v[0], u[1] - v[1]];
            let dw = [w[0] - v[0], w[1] - v[1]];
            let dot = du[0] * dw[0] + du[1] * dw[1];
            let cross = (du[0] * dw[1] - du[1] * dw[0]).abs();
            let ang = cross.atan2(dot);
            if ang < worst {
                worst = ang;
                worst_v = t.v[i];
            }
        }
        if worst >= min_angle {
            return None;
        }
        // Small input angles cannot be improved; leave corner triangles be.
        if self.corner_pts.contains(&worst_v) {
            return None;
        }
        Some(t.cc)
    }

    fn encroached_segment(&self, p: [T; 2]) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (si, s) in self.segs.iter().enumerate() {
            let a = self.pts[s.a];
            let b = self.pts[s.b];
            let mid = [(a[0] + b[0]) * rf::<T>(0.5), (a[1] + b[1]) * rf::<T>(0.5)];
            let r2 = dist2(a, b) * rf(0.25);
            let d2 = dist2(p, mid);
            if d2 < r2 * rf(0.999) {
                let min_len = self.opts.size_at(mid) * rf(0.05);
                if dist(a, b) > min_len {
                    match best {
                        Some((_, bd)) if bd <= d2 => {}
                        _ => best = Some((si, d2)),
                    }
                }
            }
        }
        best.map(|(si, _)| si)
    }

    fn nearest_splittable_segment(&self, p: [T; 2]) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (si, s) in self.segs.iter().enumerate() {
            let a = self.pts[s.a];
            let b = self.pts[s.b];
            let mid = [(a[0] + b[0]) * rf::<T>(0.5), (a[1] + b[1]) * rf::<T>(0.5)];
            if dist(a, b) <= self.opts.size_at(mid) * rf(0.2) {
                continue;
            }
            let d = point_segment_distance(p, a, b);
            match best {
                Some((_, bd)) if bd <= d => {}
                _ => best = Some((si, d)),
            }
        }
        best.map(|(si, _)| si)
    }

    fn finish(self) -> Result<InterfacedMesh<T>, GeometryError> {
        let mut keep: Vec<[usize; 3]> = Vec::new();
        for ti in 0..self.tris.len() {
            if self.tris[ti].alive && self.tri_inside(ti) {
                keep.push(self.tris[ti].v);
            }
        }
        if keep.is_empty() {
            return Err(GeometryError::Meshing("no triangles inside domain".into()));
        }
        let mut remap = vec![usize::MAX; self.pts.len()];
        let mut nodes: Vec<[T; 2]> = Vec::new();
        let mut triangles = Vec::with_capacity(keep.len());
        for v in keep {
            let mut nv = [0usize; 3];
            for (k, &old) in v.iter().enumerate() {
                if remap[old] == usize::MAX {
                    remap[old] = nodes.len();
                    nodes.push(self.pts[old]);
                }
                nv[k] = remap[old];
            }
            triangles.push(nv);
        }
        let mut boundary_edges = Vec::new();
        let mut interface_edges = Vec::new();
        for s in &self.segs {
            if remap[s.a] == usize::MAX || remap[s.b] == usize::MAX {
                return Err(GeometryError::Meshing(
                    "boundary segment lost during clipping".into(),
                ));
            }
            let edge = BoundaryEdge {
                a: remap[s.a],
                b: remap[s.b],
                tag: s.tag,
            };
            if s.interface {
                interface_edges.push(edge);
            } else {
                boundary_edges.push(edge);
            }
        }
        let inside = match &self.interface {
            None => vec![false; triangles.len()],
            Some(interface) => triangles
                .iter()
                .map(|t| {
                    let third = rf::<T>(1.0 / 3.0);
                    let c = [
                        (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) * third,
                        (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) * third,
                    ];
                    interface.contains(c)
                })
                .collect(),
        };
        let mesh = TriMesh {
            nodes,
            triangles,
            boundary_edges,
        };
        mesh.validate()?;
        // every interface edge must be shared by exactly two kept triangles
        if !interface_edges.is_empty() {
            let mut count: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            for t in &mesh.triangles {
                for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    *count.entry((e.0.min(e.1), e.0.max(e.1))).or_insert(0) += 1;
                }
            }
            for e in &interface_edges {
                if count.get(&(e.a.min(e.b), e.a.max(e.b))) != Some(&2) {
                    return Err(GeometryError::Meshing(format!(
                        "interface edge ({}, {}) is not shared by two triangles",
                        e.a, e.b
                    )));
                }
            }
        }
        Ok(InterfacedMesh {
            mesh,
            interface_edges,
            inside,
        })
    }
}

fn new_tri<T: Real>(pts: &[[T; 2]], mut v: [usize; 3]) -> Tri<T> {
    if orient2d(pts[v[0]], pts[v[1]], pts[v[2]]) < T::zero() {
        v.swap(1, 2);
    }
    let (cc, r2) = circumcircle(pts[v[0]], pts[v[1]], pts[v[2]]);
    Tri {
        v,
        alive: true,
        cc,
        r2,
    }
}

fn circumcircle<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> ([T; 2], T) {
    let d = rf::<T>(2.0) * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d == T::zero() {
        return ([T::infinity(), T::infinity()], T::infinity());
    }
    let a2 = a[0] * a[0] + a[1] * a[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let c2 = c[0] * c[0] + c[1] * c[1];
    let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
    let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
    let cc = [ux, uy];
    (cc, dist2(cc, a))
}

/// Determinant in-circumcircle predicate for a CCW triangle.
fn in_circumcircle<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], p: [T; 2]) -> bool {
    let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
    let (bx, by) = (b[0] - p[0], b[1] - p[1]);
    let (cx, cy) = (c[0] - p[0], c[1] - p[1]);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    let orient = orient2d(a, b, c);
    if orient >= T::zero() {
        det > T::zero()
    } else {
        det < T::zero()
    }
}

/// SplitMix64: deterministic jitter source.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_coarse_keeps_corners() {
        let sq = Polygon::<f64>::unit_square();
        let mesh = triangulate(&Domain::Polygon(sq), 0.5).unwrap();
        mesh.validate().unwrap();
        for corner in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
            assert!(
                mesh.nodes.iter().any(|n| dist(*n, corner) < 1e-12),
                "corner {corner:?} missing"
            );
        }
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_area_converges_quadratically() {
        let mut errs = Vec::new();
        for &h in &[0.2, 0.1, 0.05] {
            let mesh = triangulate(
                &Domain::Disk {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                h,
            )
            .unwrap();
            mesh.validate().unwrap();
            errs.push((std::f64::consts::PI - mesh.total_area()).abs());
        }
        // area error O(h^2): each halving divides the error by ~4
        assert!(errs[1] < errs[0] / 2.5, "errs={errs:?}");
        assert!(errs[2] < errs[1] / 2.5, "errs={errs:?}");
        assert!(errs[2] < 0.05 * 0.05);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let collinear = Polygon::<f64>::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(collinear.is_err());
    }

    #[test]
    fn quality_and_sizing_hold() {
        let sq = Polygon::<f64>::unit_square();
        let mesh = triangulate(&Domain::Polygon(sq), 0.12).unwrap();
        let worst = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_min_angle(t))
            .fold(f64::INFINITY, f64::min);
        assert!(
            worst.to_degrees() > 22.0,
            "worst angle {} deg",
            worst.to_degrees()
        );
        let hmax = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_diameter(t))
            .fold(0.0f64, f64::max);
        assert!(hmax < 0.12 * 1.8, "hmax {hmax}");
    }

    #[test]
    fn deterministic_given_seed() {
        let sq = Polygon::<f64>::unit_square();
        let a = triangulate_with(&Domain::Polygon(sq.clone()), &MeshOptions::new(0.2).with_seed(7)).unwrap();
        let b = triangulate_with(&Domain::Polygon(sq), &MeshOptions::new(0.2).with_seed(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn graded_mesh_resolves_corner() {
        let sq = Polygon::<f64>::unit_square();
        let opts = MeshOptions::new(0.1).with_grading(Grading {
            center: [0.0, 0.0],
            h_local: 0.004,
            radius: 0.5,
        });
        let mesh = triangulate_with(&Domain::Polygon(sq), &opts).unwrap();
        mesh.validate().unwrap();
        // Shortest edge near the corner must be comparable to h_local.
        let mut near = f64::INFINITY;
        for t in &mesh.triangles {
            for k in 0..3 {
                let a = mesh.nodes[t[k]];
                let b = mesh.nodes[t[(k + 1) % 3]];
                if dist(a, [0.0, 0.0]) < 0.02 {
                    near = near.min(dist(a, b));
                }
            }
        }
        assert!(near < 0.012, "local size near corner: {near}");
        assert!(mesh.nodes.len() < 4000, "graded mesh should stay small: {}", mesh.nodes.len());
    }

    #[test]
    fn chamfered_square_meshes() {
        let ch = Polygon::<f64>::chamfered_square([0.0, 0.0], 1.0, 0.3);
        let mesh = triangulate(&Domain::Polygon(ch.clone()), 0.08).unwrap();
        mesh.validate().unwrap();
        assert!((mesh.total_area() - ch.signed_area()).abs() < 1e-10);
    }

    #[test]
    fn sector_polygon_meshes() {
        let sector = crate::geometry::Sector::new(0.0, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        let poly = sector.to_polygon(16);
        let mesh = triangulate(&Domain::Polygon(poly), 0.1).unwrap();
        mesh.validate().unwrap();
        // vertex of the sector must be a node
        assert!(mesh.nodes.iter().any(|n| dist(*n, [0.0, 0.0]) < 1e-12));
    }
}

#[cfg(test)]
mod interface_tests {
    use super::*;

    #[test]
    fn interface_mesh_resolves_inner_polygon() {
        let outer = Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.6,
        };
        let inner = Polygon::<f64>::centered_square([0.0, 0.0], 1.0);
        let im = triangulate_with_interface(&outer, &inner, &MeshOptions::new(0.12)).unwrap();
        im.mesh.validate().unwrap();
        // interface edges present and consistent
        assert!(!im.interface_edges.is_empty());
        // all four inner corners are nodes
        for c in inner.vertices() {
            assert!(im.mesh.nodes.iter().any(|n| dist(*n, *c) < 1e-12));
        }
        // inside flags: total inside area ≈ 1
        let inner_area: f64 = (0..im.mesh.triangles.len())
            .filter(|&t| im.inside[t])
            .map(|t| im.mesh.triangle_area(t))
            .sum();
        assert!((inner_area - 1.0).abs() < 1e-10, "area={inner_area}");
        // interface edges exactly cover the inner boundary (total length 4)
        let len: f64 = im
            .interface_edges
            .iter()
            .map(|e| dist(im.mesh.nodes[e.a], im.mesh.nodes[e.b]))
            .sum();
        assert!((len - 4.0).abs() < 1e-10, "len={len}");
    }

    #[test]
    fn interface_must_be_inside() {
        let outer = Domain::Disk {
            center: [0.0, 0.0],
            radius: 0.5,
        };
        let inner = Polygon::<f64>::centered_square([0.0, 0.0], 2.0);
        assert!(triangulate_with_interface(&outer, &inner, &MeshOptions::new(0.1)).is_err());
    }
}
