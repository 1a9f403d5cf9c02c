//! Spatial averages of the discrete solution.

use super::mesh::Mesh;
use crate::error::{check_len, Error, Result};

/// Axis-aligned box; an element belongs to it when its centroid does.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return Err(Error::InvalidParameter("box corners must have equal dimension 1..=3".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidParameter("box needs lo <= hi componentwise".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.lo.iter().zip(&self.hi).zip(x).all(|((a, b), v)| a <= v && v <= b)
    }

    /// Elements whose centroid lies in the box.
    pub fn elements(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        check_len("region dimension", mesh.dim(), self.lo.len())?;
        let out: Vec<usize> = (0..mesh.num_elements())
            .filter(|&e| self.contains(&mesh.geometry(e).centroid[..mesh.dim()]))
            .collect();
        if out.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok(out)
    }
}

/// Σ_τ u(centroid τ)|τ| / Σ_τ |τ| over the given elements.
pub fn qoi_average(mesh: &Mesh, u: &[f64], elements: &[usize]) -> Result<f64> {
    check_len("nodal vector", mesh.num_vertices(), u.len())?;
    if elements.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &e in elements {
        let verts = mesh.element(e);
        let mean = verts.iter().map(|&v| u[v]).sum::<f64>() / verts.len() as f64;
        let vol = mesh.geometry(e).volume;
        num += mean * vol;
        den += vol;
    }
    Ok(num / den)
}
