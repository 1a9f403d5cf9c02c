//! Stiffness and load assembly with centroid quadrature.

use std::sync::Arc;

use super::interp::Stencil;
use super::mesh::Mesh;
use crate::embedding::GridSpec;
use crate::error::{check_len, Error, Result};

/// â_τ = |τ| · (I_{h0} a)(centroid of τ).
pub fn element_coefficient(grid: &GridSpec, avalues: &[f64], mesh: &Mesh, element: usize) -> f64 {
    let g = mesh.geometry(element);
    g.volume * Stencil::at(grid, &g.centroid[..mesh.dim()]).apply(avalues)
}

/// Symmetric sparsity pattern over the free vertices in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
}

impl Pattern {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let row = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        self.row_ptr[i] + row.binary_search(&j).expect("entry in pattern")
    }
}

/// Linear system over the free vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FESystem {
    pub pattern: Arc<Pattern>,
    pub values: Vec<f64>,
    pub load: Vec<f64>,
    /// Vertex index of each free unknown.
    pub free: Arc<Vec<usize>>,
    pub num_vertices: usize,
}

impl FESystem {
    pub fn n(&self) -> usize {
        self.load.len()
    }

    /// y = K x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        (0..self.n())
            .map(|i| {
                (p.row_ptr[i]..p.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[p.col[k]])
                    .sum()
            })
            .collect()
    }

    /// Entry (i, j) of the stiffness matrix, zero outside the pattern.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let p = &self.pattern;
        let row = &p.col[p.row_ptr[i]..p.row_ptr[i + 1]];
        row.binary_search(&j)
            .map(|k| self.values[p.row_ptr[i] + k])
            .unwrap_or(0.0)
    }

    /// Nodal vector with zeros on Dirichlet vertices.
    pub fn expand(&self, u_free: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.num_vertices];
        for (k, &v) in self.free.iter().enumerate() {
            u[v] = u_free[k];
        }
        u
    }
}

const NONE: usize = usize::MAX;

/// Mesh-dependent data reused across coefficient samples: the sparsity
/// pattern, the load vector, unit-coefficient element matrices and their
/// CSR slots.
#[derive(Debug, Clone)]
pub struct Assembler {
    dim: usize,
    pattern: Arc<Pattern>,
    free: Arc<Vec<usize>>,
    num_vertices: usize,
    load: Vec<f64>,
    /// per element, (d+1)² entries of |τ| ∇λ_a·∇λ_b
    local: Vec<f64>,
    /// per element, (d+1)² CSR slots (NONE when a row or column is Dirichlet)
    slots: Vec<usize>,
}

impl Assembler {
    pub fn new<F: Fn(&[f64]) -> f64>(mesh: &Mesh, f: F) -> Self {
        let d = mesh.dim();
        let nl = d + 1;
        let mut index_of = vec![NONE; mesh.num_vertices()];
        let mut free = Vec::new();
        for v in 0..mesh.num_vertices() {
            if !mesh.is_dirichlet(v) {
                index_of[v] = free.len();
                free.push(v);
            }
        }
        let n = free.len();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in 0..mesh.num_elements() {
            for &a in mesh.element(e) {
                for &b in mesh.element(e) {
                    if index_of[a] != NONE && index_of[b] != NONE {
                        rows[index_of[a]].push(index_of[b]);
                    }
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col.extend(r);
            row_ptr.push(col.len());
        }
        let pattern = Pattern { row_ptr, col };

        let mut load = vec![0.0; n];
        let mut local = Vec::with_capacity(mesh.num_elements() * nl * nl);
        let mut slots = Vec::with_capacity(mesh.num_elements() * nl * nl);
        for e in 0..mesh.num_elements() {
            let g = mesh.geometry(e);
            let verts = mesh.element(e);
            let fe = f(&g.centroid[..d]) * g.volume / nl as f64;
            for a in 0..nl {
                let ia = index_of[verts[a]];
                if ia != NONE {
                    load[ia] += fe;
                }
                for b in 0..nl {
                    let dot: f64 = (0..d).map(|r| g.grads[a][r] * g.grads[b][r]).sum();
                    local.push(g.volume * dot);
                    let ib = index_of[verts[b]];
                    slots.push(if ia != NONE && ib != NONE { pattern.slot(ia, ib) } else { NONE });
                }
            }
        }
        Self {
            dim: d,
            pattern: Arc::new(pattern),
            free: Arc::new(free),
            num_vertices: mesh.num_vertices(),
            load,
            local,
            slots,
        }
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// System for element coefficients â_τ / |τ|, i.e. the coefficient value
    /// at the quadrature point. Entries are accumulated in element order.
    pub fn system_from_values(&self, coeff: &[f64]) -> Result<FESystem> {
        let nl = self.dim + 1;
        check_len("element coefficients", self.local.len() / (nl * nl), coeff.len())?;
        let mut values = vec![0.0; self.pattern.col.len()];
        for (e, &c) in coeff.iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonpositiveCoefficient { element: e, value: c });
            }
            let base = e * nl * nl;
            for k in base..base + nl * nl {
                let slot = self.slots[k];
                if slot != NONE {
                    values[slot] += c * self.local[k];
                }
            }
        }
        Ok(FESystem {
            pattern: self.pattern.clone(),
            values,
            load: self.load.clone(),
            free: self.free.clone(),
            num_vertices: self.num_vertices,
        })
    }
}

/// Assembles K_ij = Σ_τ â_τ ∇φ_i·∇φ_j and the centroid-rule load
/// f(centroid)|τ|/(d+1) per vertex, with Dirichlet vertices eliminated.
pub fn assemble<F: Fn(&[f64]) -> f64>(mesh: &Mesh, coeff: &[f64], f: F) -> Result<FESystem> {
    check_len("element coefficients", mesh.num_elements(), coeff.len())?;
    let values: Vec<f64> = coeff
        .iter()
        .enumerate()
        .map(|(e, c)| c / mesh.geometry(e).volume)
        .collect();
    for (e, &c) in coeff.iter().enumerate() {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonpositiveCoefficient { element: e, value: c });
        }
    }
    Assembler::new(mesh, f).system_from_values(&values)
}

/// Per-element stencils at the centroids, so that a coefficient sample maps
/// to element values with one pass.
#[derive(Debug, Clone)]
pub struct CentroidInterpolator {
    stencils: Vec<Stencil>,
}

impl CentroidInterpolator {
    pub fn new(grid: &GridSpec, mesh: &Mesh) -> Result<Self> {
        if grid.dim() != mesh.dim() {
            return Err(Error::DimensionMismatch {
                what: "grid and mesh dimension",
                expected: mesh.dim(),
                got: grid.dim(),
            });
        }
        let stencils = (0..mesh.num_elements())
            .map(|e| Stencil::at(grid, &mesh.geometry(e).centroid[..mesh.dim()]))
            .collect();
        Ok(Self { stencils })
    }

    /// (I_{h0} a)(centroid τ) for every element.
    pub fn values(&self, avalues: &[f64]) -> Vec<f64> {
        self.stencils.iter().map(|s| s.apply(avalues)).collect()
    }
}
