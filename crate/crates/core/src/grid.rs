//! Uniform rectangular lattices and second-order finite differences.
//!
//! Nodes are stored row-major with the last axis varying fastest. Interior
//! stencils are central; the first and last node of every axis use one-sided
//! second-order stencils, so every derivative is defined on every node.
//!
//! The one-sided first-derivative stencil is chosen so that its leading error
//! `h² f'''/6` equals that of the central stencil. The truncation error of a
//! first derivative is then smooth across the lattice, and quantities such as
//! `W` built from it may be differenced again without losing an order at faces.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum node count per axis; the one-sided first-derivative stencil uses five.
pub const MIN_NODES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() != origin.len() || dims.len() != spacing.len() {
            return Err(Error::Argument("grid dims, origin and spacing must have equal nonzero length".into()));
        }
        if let Some(n) = dims.iter().find(|&&n| n < MIN_NODES) {
            return Err(Error::Argument(format!("each axis needs >= {MIN_NODES} nodes, got {n}")));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        if origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("grid origin must be finite".into()));
        }
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Ok(Self { dims, origin, spacing, strides })
    }

    /// Lattice on the box `[lo_a, hi_a]` with `dims[a]` nodes per axis.
    pub fn from_box(lo: &[f64], hi: &[f64], dims: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != dims.len() {
            return Err(Error::Argument("box bounds and dims must have equal length".into()));
        }
        let spacing = lo
            .iter()
            .zip(hi)
            .zip(dims)
            .map(|((a, b), &n)| (b - a) / (n.max(2) - 1) as f64)
            .collect();
        Self::new(dims.to_vec(), lo.to_vec(), spacing)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Largest spacing over the axes.
    pub fn h_max(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.dims[axis]
    }

    pub fn coordinate(&self, node: usize, axis: usize) -> f64 {
        self.origin[axis] + self.index_along(node, axis) as f64 * self.spacing[axis]
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        (0..self.dim()).map(|a| self.coordinate(node, a)).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |n| self.point(n))
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.points().map(|p| f(&p)).collect()
    }

    /// True if the node lies on any face of the lattice.
    pub fn on_face(&self, node: usize) -> bool {
        (0..self.dim()).any(|a| {
            let i = self.index_along(node, a);
            i == 0 || i + 1 == self.dims[a]
        })
    }

    /// True if the node is at least `k` nodes away from every face.
    pub fn is_inner(&self, node: usize, k: usize) -> bool {
        (0..self.dim()).all(|a| {
            let i = self.index_along(node, a);
            i >= k && i + k < self.dims[a]
        })
    }

    /// Nodes on the face `axis = 0` (`upper = false`) or `axis = last` (`upper = true`).
    pub fn face_nodes(&self, axis: usize, upper: bool) -> Vec<usize> {
        let target = if upper { self.dims[axis] - 1 } else { 0 };
        (0..self.len()).filter(|&n| self.index_along(n, axis) == target).collect()
    }

    /// Trapezoid-rule weight of a node in the full lattice.
    pub fn trapezoid_weight(&self, node: usize) -> f64 {
        let mut w = 1.0;
        for a in 0..self.dim() {
            let i = self.index_along(node, a);
            w *= self.spacing[a];
            if i == 0 || i + 1 == self.dims[a] {
                w *= 0.5;
            }
        }
        w
    }

    /// Trapezoid weight of a node restricted to a face orthogonal to `axis`.
    pub fn face_weight(&self, node: usize, axis: usize) -> f64 {
        let mut w = 1.0;
        for a in (0..self.dim()).filter(|&a| a != axis) {
            let i = self.index_along(node, a);
            w *= self.spacing[a];
            if i == 0 || i + 1 == self.dims[a] {
                w *= 0.5;
            }
        }
        w
    }

    /// First derivative along `axis`.
    pub fn d1(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let (s, n, h) = (self.strides[axis], self.dims[axis], self.spacing[axis]);
        let mut out = vec![0.0; f.len()];
        for (node, o) in out.iter_mut().enumerate() {
            let i = (node / s) % n;
            *o = if i == 0 {
                (-5.0 * f[node] + 11.0 * f[node + s] - 10.0 * f[node + 2 * s] + 5.0 * f[node + 3 * s]
                    - f[node + 4 * s])
                    / (2.0 * h)
            } else if i + 1 == n {
                (5.0 * f[node] - 11.0 * f[node - s] + 10.0 * f[node - 2 * s] - 5.0 * f[node - 3 * s]
                    + f[node - 4 * s])
                    / (2.0 * h)
            } else {
                (f[node + s] - f[node - s]) / (2.0 * h)
            };
        }
        out
    }

    /// Second derivative along `axis`.
    pub fn d2(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let (s, n, h) = (self.strides[axis], self.dims[axis], self.spacing[axis]);
        let h2 = h * h;
        let mut out = vec![0.0; f.len()];
        for (node, o) in out.iter_mut().enumerate() {
            let i = (node / s) % n;
            *o = if i == 0 {
                (2.0 * f[node] - 5.0 * f[node + s] + 4.0 * f[node + 2 * s] - f[node + 3 * s]) / h2
            } else if i + 1 == n {
                (2.0 * f[node] - 5.0 * f[node - s] + 4.0 * f[node - 2 * s] - f[node - 3 * s]) / h2
            } else {
                (f[node + s] - 2.0 * f[node] + f[node - s]) / h2
            };
        }
        out
    }

    /// Gradient of a nodal field: `out[node * m + a] = ∂_a f`.
    pub fn gradient(&self, f: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; f.len() * m];
        for a in 0..m {
            for (node, v) in self.d1(f, a).into_iter().enumerate() {
                out[node * m + a] = v;
            }
        }
        out
    }

    /// Coordinate Hessian: `out[node * m * m + a * m + b] = ∂_a ∂_b f`.
    pub fn hessian(&self, f: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mm = m * m;
        let mut out = vec![0.0; f.len() * mm];
        let firsts: Vec<Vec<f64>> = (0..m).map(|a| self.d1(f, a)).collect();
        for a in 0..m {
            for (node, v) in self.d2(f, a).into_iter().enumerate() {
                out[node * mm + a * m + a] = v;
            }
            for b in a + 1..m {
                let mixed = self.d1(&firsts[a], b);
                for (node, v) in mixed.into_iter().enumerate() {
                    out[node * mm + a * m + b] = v;
                    out[node * mm + b * m + a] = v;
                }
            }
        }
        out
    }
}
