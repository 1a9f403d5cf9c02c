//! Simplicial meshes of the unit box and their element geometry.

use crate::error::{Error, Result};

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitInterval,
    UnitSquare,
    UnitCube,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::UnitInterval => 1,
            Domain::UnitSquare => 2,
            Domain::UnitCube => 3,
        }
    }

    pub fn from_dim(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Domain::UnitInterval),
            2 => Ok(Domain::UnitSquare),
            3 => Ok(Domain::UnitCube),
            _ => Err(Error::InvalidParameter(format!("no unit box in dimension {d}"))),
        }
    }
}

/// Volume, centroid and barycentric gradients of one simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub volume: f64,
    pub centroid: [f64; 3],
    pub grads: [[f64; 3]; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    simplices: Vec<[usize; 4]>,
    dirichlet: Vec<bool>,
    geometry: Vec<ElementGeometry>,
    h: f64,
}

fn det_and_inverse(j: &[[f64; 3]; 3], d: usize) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    match d {
        1 => {
            let det = j[0][0];
            inv[0][0] = 1.0 / det;
            (det, inv)
        }
        2 => {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            inv[0][0] = j[1][1] / det;
            inv[0][1] = -j[0][1] / det;
            inv[1][0] = -j[1][0] / det;
            inv[1][1] = j[0][0] / det;
            (det, inv)
        }
        _ => {
            let c = |r: usize, s: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
                j[r1][s1] * j[r2][s2] - j[r1][s2] * j[r2][s1]
            };
            let det = j[0][0] * c(0, 0) + j[0][1] * c(0, 1) + j[0][2] * c(0, 2);
            for r in 0..3 {
                for s in 0..3 {
                    inv[s][r] = c(r, s) / det;
                }
            }
            (det, inv)
        }
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).product::<usize>() as f64
}

fn element_geometry(dim: usize, p: &[[f64; 3]]) -> ElementGeometry {
    // J[r][c] = (p_{c+1} − p_0)_r, so λ_{1..d} = J⁻¹ (x − p_0).
    let mut j = [[0.0; 3]; 3];
    for c in 0..dim {
        for r in 0..dim {
            j[r][c] = p[c + 1][r] - p[0][r];
        }
    }
    let (det, inv) = det_and_inverse(&j, dim);
    let mut grads = [[0.0; 3]; 4];
    for i in 0..dim {
        for r in 0..dim {
            grads[i + 1][r] = inv[i][r];
            grads[0][r] -= inv[i][r];
        }
    }
    let mut centroid = [0.0; 3];
    for v in p {
        for r in 0..dim {
            centroid[r] += v[r] / (dim + 1) as f64;
        }
    }
    ElementGeometry {
        volume: det.abs() / factorial(dim),
        centroid,
        grads,
    }
}

impl Mesh {
    /// Checks indices, nondegenerate elements, coordinates inside the unit box
    /// and Dirichlet flags on every boundary vertex.
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        simplices: Vec<[usize; 4]>,
        dirichlet: Vec<bool>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("mesh dimension {dim}")));
        }
        if dirichlet.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                what: "dirichlet flags",
                expected: vertices.len(),
                got: dirichlet.len(),
            });
        }
        for (i, v) in vertices.iter().enumerate() {
            let coords = &v[..dim];
            if coords.iter().any(|x| !x.is_finite() || *x < -BOUNDARY_TOL || *x > 1.0 + BOUNDARY_TOL) {
                return Err(Error::InvalidParameter(format!("vertex {i} outside the unit box")));
            }
            let on_boundary = coords
                .iter()
                .any(|x| x.abs() <= BOUNDARY_TOL || (1.0 - x).abs() <= BOUNDARY_TOL);
            if on_boundary && !dirichlet[i] {
                return Err(Error::InvalidParameter(format!(
                    "boundary vertex {i} is not flagged Dirichlet"
                )));
            }
        }
        let mut geometry = Vec::with_capacity(simplices.len());
        let mut h = 0.0f64;
        for (e, s) in simplices.iter().enumerate() {
            if s[..=dim].iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidParameter(format!("element {e} has a bad vertex index")));
            }
            let p: Vec<[f64; 3]> = s[..=dim].iter().map(|&v| vertices[v]).collect();
            let g = element_geometry(dim, &p);
            if !(g.volume > 0.0) {
                return Err(Error::InvalidParameter(format!("element {e} is degenerate")));
            }
            for a in 0..=dim {
                for b in a + 1..=dim {
                    let d2: f64 = (0..dim).map(|r| (p[a][r] - p[b][r]).powi(2)).sum();
                    h = h.max(d2.sqrt());
                }
            }
            geometry.push(g);
        }
        Ok(Self {
            dim,
            vertices,
            simplices,
            dirichlet,
            geometry,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.simplices.len()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i][..self.dim]
    }

    /// Vertex indices of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        &self.simplices[e][..=self.dim]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        self.dirichlet[i]
    }

    pub fn num_free(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Reads the text format
    ///
    /// ```text
    /// <dim> <vertex count> <element count>
    /// x_1 … x_dim <dirichlet 0|1>     (one line per vertex)
    /// v_0 … v_dim                     (one line per element)
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap().trim())
            .filter(|l| !l.is_empty());
        let bad = |what: &str| Error::Format(format!("mesh file: {what}"));
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_>>()?;
        let [dim, nv, ne] = header[..] else {
            return Err(bad("header needs three integers"));
        };
        if !(1..=3).contains(&dim) {
            return Err(bad("dimension must be 1, 2 or 3"));
        }
        let mut vertices = Vec::with_capacity(nv);
        let mut dirichlet = Vec::with_capacity(nv);
        for _ in 0..nv {
            let toks: Vec<&str> = lines.next().ok_or_else(|| bad("missing vertex"))?.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(bad("vertex line length"));
            }
            let mut v = [0.0; 3];
            for r in 0..dim {
                v[r] = toks[r].parse().map_err(|_| bad("bad coordinate"))?;
            }
            vertices.push(v);
            dirichlet.push(match toks[dim] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("dirichlet flag must be 0 or 1")),
            });
        }
        let mut simplices = Vec::with_capacity(ne);
        for _ in 0..ne {
            let toks: Vec<&str> = lines.next().ok_or_else(|| bad("missing element"))?.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(bad("element line length"));
            }
            let mut s = [0usize; 4];
            for (a, t) in toks.iter().enumerate() {
                s[a] = t.parse().map_err(|_| bad("bad vertex index"))?;
            }
            simplices.push(s);
        }
        if lines.next().is_some() {
            return Err(bad("trailing content"));
        }
        Self::new(dim, vertices, simplices, dirichlet)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.dim, self.num_vertices(), self.num_elements());
        for (v, d) in self.vertices.iter().zip(&self.dirichlet) {
            for x in &v[..self.dim] {
                out += &format!("{x:?} ");
            }
            out += if *d { "1\n" } else { "0\n" };
        }
        for e in 0..self.num_elements() {
            let idx: Vec<String> = self.element(e).iter().map(|v| v.to_string()).collect();
            out += &idx.join(" ");
            out.push('\n');
        }
        out
    }
}

/// Uniform mesh of the unit box with `k` cells per axis: segments in 1D,
/// two triangles per square (h = √2/k), six Kuhn tetrahedra per cube (h = √3/k).
pub fn structured_mesh(domain: Domain, k: usize) -> Result<Mesh> {
    if k == 0 {
        return Err(Error::InvalidParameter("mesh level k must be at least 1".into()));
    }
    let dim = domain.dim();
    let np = k + 1;
    let nv = np.pow(dim as u32);
    // vertex id = Σ_a i_a (k+1)^a
    let id = |i: [usize; 3]| i[0] + np * (i[1] + np * i[2]);
    let mut vertices = Vec::with_capacity(nv);
    let mut dirichlet = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut i = [0usize; 3];
        let mut rest = v;
        for a in 0..dim {
            i[a] = rest % np;
            rest /= np;
        }
        let mut x = [0.0; 3];
        for a in 0..dim {
            x[a] = i[a] as f64 / k as f64;
        }
        vertices.push(x);
        dirichlet.push(i[..dim].iter().any(|&ia| ia == 0 || ia == k));
    }
    let mut simplices = Vec::new();
    let cells = k.pow(dim as u32);
    for c in 0..cells {
        let mut base = [0usize; 3];
        let mut rest = c;
        for a in 0..dim {
            base[a] = rest % k;
            rest /= k;
        }
        match dim {
            1 => simplices.push([id(base), id([base[0] + 1, 0, 0]), 0, 0]),
            2 => {
                let v = |dx: usize, dy: usize| id([base[0] + dx, base[1] + dy, 0]);
                simplices.push([v(0, 0), v(1, 0), v(1, 1), 0]);
                simplices.push([v(0, 0), v(1, 1), v(0, 1), 0]);
            }
            _ => {
                const PERMS: [[usize; 3]; 6] =
                    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                for perm in PERMS {
                    let mut cur = base;
                    let mut tet = [id(cur), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        cur[axis] += 1;
                        tet[step + 1] = id(cur);
                    }
                    simplices.push(tet);
                }
            }
        }
    }
    Mesh::new(dim, vertices, simplices, dirichlet)
}
