//! Multilinear interpolation of grid values.

use crate::embedding::GridSpec;

/// Grid indices and nonnegative weights (summing to 1) of the `2^d` corners
/// of the cell containing `x`. Points on interior cell faces use the lower
/// cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub len: usize,
    pub index: [usize; 8],
    pub weight: [f64; 8],
}

impl Stencil {
    pub fn at(grid: &GridSpec, x: &[f64]) -> Self {
        let d = grid.dim();
        let m0 = grid.m0();
        let mut cell = [0usize; 3];
        let mut xi = [0.0; 3];
        for a in 0..d {
            let t = x[a].clamp(0.0, 1.0) * m0 as f64;
            let c = (t.ceil() as usize).saturating_sub(1).min(m0 - 1);
            cell[a] = c;
            xi[a] = t - c as f64;
        }
        let len = 1usize << d;
        let mut index = [0usize; 8];
        let mut weight = [0.0; 8];
        for corner in 0..len {
            let mut k = [0usize; 3];
            let mut w = 1.0;
            for a in 0..d {
                let up = corner >> a & 1;
                k[a] = cell[a] + up;
                w *= if up == 1 { xi[a] } else { 1.0 - xi[a] };
            }
            index[corner] = grid.linear_index(&k);
            weight[corner] = w;
        }
        Self { len, index, weight }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        (0..self.len).map(|c| self.weight[c] * values[self.index[c]]).sum()
    }
}

/// Multilinear interpolant of `values` (one per grid point) at `x ∈ [0,1]^d`.
pub fn multilinear_interpolate(grid: &GridSpec, values: &[f64], x: &[f64]) -> f64 {
    Stencil::at(grid, x).apply(values)
}
