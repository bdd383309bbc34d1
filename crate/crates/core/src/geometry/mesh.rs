//! Conforming triangle mesh: storage, validation, text format and point
//! location.

use super::{dist, orient2d, GeometryError};
use crate::scalar::{rf, Real};
use std::collections::HashMap;
use std::io::{BufRead, Write};

/// Boundary edge with the tag of the polygon edge it discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: usize,
}

/// Conforming piecewise-linear triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T: Real> {
    pub nodes: Vec<[T; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl<T: Real> TriMesh<T> {
    /// Validate conformity: positive triangle areas, every edge shared by at
    /// most two triangles, and the declared boundary edges exactly matching
    /// the edges incident to a single triangle.
    pub fn validate(&self) -> Result<(), GeometryError> {
        for (ti, t) in self.triangles.iter().enumerate() {
            for &v in t {
                if v >= self.nodes.len() {
                    return Err(GeometryError::NonConforming(format!(
                        "triangle {ti} references missing node {v}"
                    )));
                }
            }
            let area = orient2d(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            if area <= T::zero() {
                return Err(GeometryError::NonConforming(format!(
                    "triangle {ti} has non-positive area"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (e, c) in &edge_count {
            if *c > 2 {
                return Err(GeometryError::NonConforming(format!(
                    "edge {e:?} shared by {c} triangles"
                )));
            }
        }
        let mut declared: HashMap<(usize, usize), usize> = HashMap::new();
        for be in &self.boundary_edges {
            let key = (be.a.min(be.b), be.a.max(be.b));
            *declared.entry(key).or_insert(0) += 1;
        }
        for (e, c) in &declared {
            if *c != 1 {
                return Err(GeometryError::NonConforming(format!(
                    "boundary edge {e:?} declared {c} times"
                )));
            }
            match edge_count.get(e) {
                Some(1) => {}
                other => {
                    return Err(GeometryError::NonConforming(format!(
                        "boundary edge {e:?} incident to {other:?} triangles"
                    )))
                }
            }
        }
        let hull_edges = edge_count.values().filter(|&&c| c == 1).count();
        if hull_edges != declared.len() {
            return Err(GeometryError::NonConforming(format!(
                "{} hull edges but {} declared boundary edges",
                hull_edges,
                declared.len()
            )));
        }
        Ok(())
    }

    pub fn triangle_area(&self, ti: usize) -> T {
        let t = self.triangles[ti];
        orient2d(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]) * rf::<T>(0.5)
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Marks nodes lying on the boundary.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for be in &self.boundary_edges {
            mask[be.a] = true;
            mask[be.b] = true;
        }
        mask
    }

    pub fn bbox(&self) -> ([T; 2], [T; 2]) {
        let mut lo = self.nodes[0];
        let mut hi = self.nodes[0];
        for v in &self.nodes {
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

    /// Barycentric coordinates of `p` in triangle `ti`.
    pub fn barycentric(&self, ti: usize, p: [T; 2]) -> [T; 3] {
        let t = self.triangles[ti];
        let (a, b, c) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
        let den = orient2d(a, b, c);
        [
            orient2d(p, b, c) / den,
            orient2d(a, p, c) / den,
            orient2d(a, b, p) / den,
        ]
    }

    /// Longest edge length of triangle `ti`.
    pub fn triangle_diameter(&self, ti: usize) -> T {
        let t = self.triangles[ti];
        let (a, b, c) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// Smallest interior angle of triangle `ti` in radians.
    pub fn triangle_min_angle(&self, ti: usize) -> T {
        let t = self.triangles[ti];
        let pts = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
        let mut best = T::infinity();
        for i in 0..3 {
            let v = pts[i];
            let u = pts[(i + 1) % 3];
            let w = pts[(i + 2) % 3];
            let du = [u[0] - v[0], u[1] - v[1]];
            let dw = [w[0] - v[0], w[1] - v[1]];
            let dot = du[0] * dw[0] + du[1] * dw[1];
            let cross = (du[0] * dw[1] - du[1] * dw[0]).abs();
            best = best.min(cross.atan2(dot));
        }
        best
    }

    /// Serialize to the plain text format:
    /// `nodes N triangles T boundary B`, then N lines `x y`, T lines
    /// `i j k`, B lines `i j tag` (0-based indices).
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "nodes {} triangles {} boundary {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )?;
        for n in &self.nodes {
            writeln!(w, "{} {}", n[0], n[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for be in &self.boundary_edges {
            writeln!(w, "{} {} {}", be.a, be.b, be.tag)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self, GeometryError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GeometryError::Parse("missing header".into()))??;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 6 || toks[0] != "nodes" || toks[2] != "triangles" || toks[4] != "boundary" {
            return Err(GeometryError::Parse(format!("bad header `{header}`")));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| GeometryError::Parse(format!("bad count `{s}`: {e}")))
        };
        let (nn, nt, nb) = (parse_usize(toks[1])?, parse_usize(toks[3])?, parse_usize(toks[5])?);
        let mut next_line = || -> Result<String, GeometryError> {
            loop {
                match lines.next() {
                    None => return Err(GeometryError::Parse("unexpected end of file".into())),
                    Some(l) => {
                        let l = l?;
                        if !l.trim().is_empty() {
                            return Ok(l);
                        }
                    }
                }
            }
        };
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let l = next_line()?;
            let mut it = l.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GeometryError::Parse(format!("bad node line `{l}`")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GeometryError::Parse(format!("bad node line `{l}`")))?;
            nodes.push([rf::<T>(x), rf::<T>(y)]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l = next_line()?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| GeometryError::Parse(format!("bad triangle line `{l}`: {e}")))?;
            if v.len() != 3 {
                return Err(GeometryError::Parse(format!("bad triangle line `{l}`")));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let l = next_line()?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| GeometryError::Parse(format!("bad boundary line `{l}`: {e}")))?;
            if v.len() != 3 {
                return Err(GeometryError::Parse(format!("bad boundary line `{l}`")));
            }
            boundary_edges.push(BoundaryEdge {
                a: v[0],
                b: v[1],
                tag: v[2],
            });
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
        })
    }

    /// Build a bucket-grid point locator for repeated queries.
    pub fn locator(&self) -> MeshLocator<'_, T> {
        MeshLocator::new(self)
    }
}

/// Bucket-grid accelerated point location.
pub struct MeshLocator<'m, T: Real> {
    mesh: &'m TriMesh<T>,
    lo: [T; 2],
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'m, T: Real> MeshLocator<'m, T> {
    fn new(mesh: &'m TriMesh<T>) -> Self {
        let (lo, hi) = mesh.bbox();
        let ntri = mesh.triangles.len().max(1);
        let nx = ((ntri as f64).sqrt().ceil() as usize).clamp(1, 512);
        let ny = nx;
        let wx = (hi[0] - lo[0]).max(rf(1e-30));
        let wy = (hi[1] - lo[1]).max(rf(1e-30));
        let cell = (wx / rf::<T>(nx as f64)).max(wy / rf::<T>(ny as f64));
        let mut buckets = vec![Vec::new(); nx * ny];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let (a, b, c) = (mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
            let txlo = a[0].min(b[0]).min(c[0]);
            let txhi = a[0].max(b[0]).max(c[0]);
            let tylo = a[1].min(b[1]).min(c[1]);
            let tyhi = a[1].max(b[1]).max(c[1]);
            let ix0 = Self::cell_index(txlo - lo[0], cell, nx);
            let ix1 = Self::cell_index(txhi - lo[0], cell, nx);
            let iy0 = Self::cell_index(tylo - lo[1], cell, ny);
            let iy1 = Self::cell_index(tyhi - lo[1], cell, ny);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    buckets[iy * nx + ix].push(ti);
                }
            }
        }
        Self {
            mesh,
            lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn cell_index(offset: T, cell: T, n: usize) -> usize {
        let i = (offset / cell).to_f64().unwrap_or(0.0).floor() as i64;
        i.clamp(0, n as i64 - 1) as usize
    }

    /// Triangle containing `p` with its barycentric coordinates, if any.
    pub fn locate(&self, p: [T; 2]) -> Option<(usize, [T; 3])> {
        let ix = Self::cell_index(p[0] - self.lo[0], self.cell, self.nx);
        let iy = Self::cell_index(p[1] - self.lo[1], self.cell, self.ny);
        let tol = -rf::<T>(1e-10);
        for &ti in &self.buckets[iy * self.nx + ix] {
            let l = self.mesh.barycentric(ti, p);
            if l[0] >= tol && l[1] >= tol && l[2] >= tol {
                return Some((ti, l));
            }
        }
        // Fallback: exhaustive scan (points marginally outside any bucket).
        for ti in 0..self.mesh.triangles.len() {
            let l = self.mesh.barycentric(ti, p);
            if l[0] >= tol && l[1] >= tol && l[2] >= tol {
                return Some((ti, l));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_square() -> TriMesh<f64> {
        TriMesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
            boundary_edges: vec![
                BoundaryEdge { a: 0, b: 1, tag: 0 },
                BoundaryEdge { a: 1, b: 2, tag: 1 },
                BoundaryEdge { a: 2, b: 3, tag: 2 },
                BoundaryEdge { a: 3, b: 0, tag: 3 },
            ],
        }
    }

    #[test]
    fn validates_and_measures() {
        let m = two_triangle_square();
        m.validate().unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(m.boundary_mask(), vec![true; 4]);
    }

    #[test]
    fn rejects_inverted_triangle() {
        let mut m = two_triangle_square();
        m.triangles[0] = [0, 2, 1];
        assert!(m.validate().is_err());
    }

    #[test]
    fn rejects_undeclared_boundary() {
        let mut m = two_triangle_square();
        m.boundary_edges.pop();
        assert!(m.validate().is_err());
    }

    #[test]
    fn text_roundtrip() {
        let m = two_triangle_square();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("nodes 4 triangles 2 boundary 4\n"));
        let m2 = TriMesh::<f64>::read_text(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn locator_finds_points() {
        let m = two_triangle_square();
        let loc = m.locator();
        let (ti, l) = loc.locate([0.75, 0.25]).unwrap();
        assert_eq!(ti, 0);
        assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-12);
        assert!(loc.locate([1.5, 0.5]).is_none());
    }
}
