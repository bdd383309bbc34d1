//! Minimal sparse matrix support: COO assembly, CSR matvec, band
//! conversion and reverse Cuthill–McKee ordering.

use super::band::BandMat;
use super::dense::CMat;
use crate::scalar::Real;
use num_complex::Complex;
use std::collections::HashMap;

/// Triplet accumulator (duplicates summed on conversion).
#[derive(Debug, Clone)]
pub struct CooMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<(usize, usize, Complex<T>)>,
}

impl<T: Real> CooMat<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: Complex<T>) {
        debug_assert!(i < self.rows && j < self.cols);
        if v != Complex::new(T::zero(), T::zero()) {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(&self) -> CsrMat<T> {
        let mut merged: HashMap<(usize, usize), Complex<T>> = HashMap::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            let e = merged
                .entry((i, j))
                .or_insert(Complex::new(T::zero(), T::zero()));
            *e = *e + v;
        }
        let mut items: Vec<((usize, usize), Complex<T>)> = merged.into_iter().collect();
        items.sort_by_key(|&((i, j), _)| (i, j));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(items.len());
        let mut vals = Vec::with_capacity(items.len());
        for ((i, j), v) in items {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMat {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone)]
pub struct CsrMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<Complex<T>>,
}

impl<T: Real> CsrMat<T> {
    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> CMat<T> {
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = m[(i, self.col_idx[k])] + self.vals[k];
            }
        }
        m
    }

    /// Maximum |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0usize;
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                b = b.max(if i > j { i - j } else { j - i });
            }
        }
        b
    }

    /// Band-storage copy with symmetric bandwidth = `self.bandwidth()`.
    pub fn to_band(&self) -> BandMat<T> {
        let b = self.bandwidth();
        let mut band = BandMat::zeros(self.rows, b, b);
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                band.add(i, self.col_idx[k], self.vals[k]);
            }
        }
        band
    }

    /// `self - sigma * other`, pattern union.
    pub fn sub_scaled(&self, other: &CsrMat<T>, sigma: Complex<T>) -> CsrMat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut coo = CooMat::new(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                coo.push(i, self.col_idx[k], self.vals[k]);
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                coo.push(i, other.col_idx[k], -sigma * other.vals[k]);
            }
        }
        coo.to_csr()
    }
}

/// Reverse Cuthill–McKee ordering of an undirected adjacency structure.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_order(n: usize, neighbors: &dyn Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let mut degree = vec![0usize; n];
    for v in 0..n {
        degree[v] = neighbors(v).len();
    }
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    loop {
        // lowest-degree unvisited seed (deterministic)
        let mut seed = None;
        for v in 0..n {
            if !visited[v] && seed.map_or(true, |s: usize| degree[v] < degree[s]) {
                seed = Some(v);
            }
        }
        let Some(mut seed) = seed else { break };
        // pseudo-peripheral refinement: run BFS twice
        for _ in 0..2 {
            let far = bfs_farthest(seed, neighbors, &visited);
            if far == seed {
                break;
            }
            seed = far;
        }
        // Cuthill-McKee from the seed
        let mut queue = std::collections::VecDeque::new();
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = neighbors(v).into_iter().filter(|&u| !visited[u]).collect();
            nb.sort_by_key(|&u| (degree[u], u));
            for u in nb {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_farthest(start: usize, neighbors: &dyn Fn(usize) -> Vec<usize>, blocked: &[bool]) -> usize {
    let n = blocked.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut far = start;
    while let Some(v) = queue.pop_front() {
        for u in neighbors(v) {
            if !blocked[u] && dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                if (dist[u], u) > (dist[far], far) {
                    far = u;
                }
                queue.push_back(u);
            }
        }
    }
    far
}
