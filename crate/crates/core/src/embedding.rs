//! Circulant embedding of the grid covariance matrix.
//!
//! The covariance matrix of a stationary field sampled on the uniform grid
//! `{0, h0, …, 1}^d` is nested block Toeplitz. Folding the covariance onto a
//! periodic cube of side `2ℓ = 2 m h0` yields a nested block circulant
//! extension whose eigenvalues are the (unnormalised) DFT of its first
//! column. When those eigenvalues are nonnegative the extension factorises
//! as `Q Λ Q` with `Q = Re(F) + Im(F)` for the unitary Fourier matrix `F`,
//! and selecting the rows that belong to the original grid gives a
//! factor `B` with `B Bᵀ = R`.
//!
//! Array layout throughout is row-major over multi-indices: the first axis
//! varies slowest.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::covariance::CovarianceModel;
use crate::error::{check_len, Error, Result};

/// Relative tolerance on the imaginary residue of the eigenvalue FFT.
pub const IMAG_TOL: f64 = 1e-10;
/// Eigenvalues down to `-EIG_CLIP_TOL * max` are accepted and clipped to zero.
pub const EIG_CLIP_TOL: f64 = 1e-13;
/// Largest `M * s` for which exact `b_j` are computed.
pub const EXACT_BJ_BUDGET: usize = 1_000_000_000;

/// Uniform sampling grid with `m0` intervals per axis on `[0, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    m0: usize,
    dim: usize,
}

impl GridSpec {
    pub fn new(m0: usize, dim: usize) -> Result<Self> {
        if m0 == 0 {
            return Err(Error::InvalidParameter("m0 must be at least 1".into()));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        Ok(Self { m0, dim })
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h0(&self) -> f64 {
        1.0 / self.m0 as f64
    }

    /// Number of grid points, `(m0 + 1)^d`.
    pub fn num_points(&self) -> usize {
        (self.m0 + 1).pow(self.dim as u32)
    }

    /// Multi-index of the point with linear index `i`.
    pub fn multi_index(&self, mut i: usize) -> [usize; 3] {
        let n = self.m0 + 1;
        let mut k = [0usize; 3];
        for a in (0..self.dim).rev() {
            k[a] = i % n;
            i /= n;
        }
        k
    }

    pub fn linear_index(&self, k: &[usize]) -> usize {
        k[..self.dim]
            .iter()
            .fold(0, |acc, &ka| acc * (self.m0 + 1) + ka)
    }

    /// Coordinates of grid point `i`.
    pub fn point(&self, i: usize) -> [f64; 3] {
        let k = self.multi_index(i);
        let h0 = self.h0();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = k[a] as f64 * h0;
        }
        x
    }
}

/// Factorised nested block circulant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    grid: GridSpec,
    model: CovarianceModel,
    m: usize,
    eigenvalues: Vec<f64>,
}

impl Embedding {
    /// Assembles an embedding from precomputed eigenvalues.
    pub fn from_parts(
        grid: GridSpec,
        model: CovarianceModel,
        m: usize,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        if grid.dim() != model.dim() {
            return Err(Error::InvalidParameter(format!(
                "grid dimension {} differs from covariance dimension {}",
                grid.dim(),
                model.dim()
            )));
        }
        if m < grid.m0() {
            return Err(Error::InvalidParameter(format!(
                "padded size m = {m} is below m0 = {}",
                grid.m0()
            )));
        }
        check_len("eigenvalues", (2 * m).pow(grid.dim() as u32), eigenvalues.len())?;
        if let Some(bad) = eigenvalues.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalues must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self {
            grid,
            model,
            m,
            eigenvalues,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Half-period of the extended cube, `ℓ = m h0`.
    pub fn ell(&self) -> f64 {
        self.m as f64 * self.grid.h0()
    }

    /// Stochastic dimension `s = (2m)^d`.
    pub fn s(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Linear index in the extended array of grid point `i`.
    pub(crate) fn selection(&self) -> Vec<usize> {
        let n = 2 * self.m;
        (0..self.grid.num_points())
            .map(|i| {
                let k = self.grid.multi_index(i);
                k[..self.grid.dim()].iter().fold(0, |acc, &ka| acc * n + ka)
            })
            .collect()
    }
}

fn fold(x: f64, ell: f64) -> f64 {
    if x <= ell {
        x
    } else {
        2.0 * ell - x
    }
}

/// First column of the extended circulant matrix for padded size `m`.
pub fn extended_first_column(
    grid: &GridSpec,
    m: usize,
    model: &CovarianceModel,
) -> Result<Vec<f64>> {
    if m < grid.m0() {
        return Err(Error::InvalidParameter(format!(
            "padded size m = {m} is below m0 = {}",
            grid.m0()
        )));
    }
    if grid.dim() != model.dim() {
        return Err(Error::InvalidParameter(
            "grid and covariance dimensions differ".into(),
        ));
    }
    let n = 2 * m;
    let d = grid.dim();
    let h0 = grid.h0();
    let ell = m as f64 * h0;
    let folded: Vec<f64> = (0..n).map(|k| fold(k as f64 * h0, ell)).collect();
    let s = n.pow(d as u32);
    let col = (0..s)
        .into_par_iter()
        .map(|j| {
            let mut rem = j;
            let mut r2 = 0.0;
            for _ in 0..d {
                let x = folded[rem % n];
                r2 += x * x;
                rem /= n;
            }
            model.rho_at_distance(r2.sqrt())
        })
        .collect();
    Ok(col)
}

/// In-place d-dimensional FFT over a cube with `n` points per axis.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, fft: &dyn Fft<f64>) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // Last axis: contiguous lines.
    fft.process_with_scratch(data, &mut scratch);
    let mut line = vec![Complex64::default(); n];
    for axis in (0..dim.saturating_sub(1)).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, val) in line.iter().enumerate() {
                    data[start + t * stride] = *val;
                }
            }
        }
    }
}

fn cube_side(len: usize, dim: usize) -> Result<usize> {
    let n = (len as f64).powf(1.0 / dim as f64).round() as usize;
    if n.pow(dim as u32) != len {
        return Err(Error::InvalidParameter(format!(
            "array of length {len} is not a {dim}-dimensional cube"
        )));
    }
    Ok(n)
}

/// Eigenvalues of the circulant matrix with first column `r`, laid out as a
/// `dim`-dimensional cube: `√s` times its unitary DFT.
pub fn eigenvalues_via_fft(r: &[f64], dim: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("bad dimension {dim}")));
    }
    let n = cube_side(r.len(), dim)?;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(&mut buf, n, dim, fft.as_ref());
    let max_re = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let max_im = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let tolerance = IMAG_TOL * max_re;
    if max_im > tolerance {
        return Err(Error::ImaginaryResidue {
            residue: max_im,
            tolerance,
        });
    }
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// How the padded size grows while searching for a nonnegative embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Growth {
    /// m ← m + 1; yields the minimal m.
    #[default]
    Increment,
    /// m ← 2m; fewer FFTs for long correlation lengths, not minimal.
    Doubling,
}

/// Smallest `m ≥ m0` whose extension has no eigenvalue below
/// `-EIG_CLIP_TOL * max`; small negatives are clipped to zero.
pub fn minimal_embedding(
    grid: &GridSpec,
    model: &CovarianceModel,
    m_cap: usize,
) -> Result<Embedding> {
    minimal_embedding_with(grid, model, m_cap, Growth::Increment)
}

pub fn minimal_embedding_with(
    grid: &GridSpec,
    model: &CovarianceModel,
    m_cap: usize,
    growth: Growth,
) -> Result<Embedding> {
    if m_cap < grid.m0() {
        return Err(Error::InvalidParameter(format!(
            "m_cap = {m_cap} is below m0 = {}",
            grid.m0()
        )));
    }
    let mut m = grid.m0();
    let mut last_min = f64::NAN;
    while m <= m_cap {
        let r = extended_first_column(grid, m, model)?;
        let mut v = eigenvalues_via_fft(&r, grid.dim())?;
        if admissible_min(&v).is_some() {
            for x in v.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            return Embedding::from_parts(*grid, *model, m, v);
        }
        last_min = v.iter().copied().fold(f64::INFINITY, f64::min);
        m = match growth {
            Growth::Increment => m + 1,
            Growth::Doubling => 2 * m,
        };
    }
    Err(Error::EmbeddingNotPositive {
        m_cap,
        min_eig: last_min,
    })
}

/// Minimum eigenvalue if the spectrum passes the clipping tolerance.
pub(crate) fn admissible_min(v: &[f64]) -> Option<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    (min >= -EIG_CLIP_TOL * max).then_some(min)
}

/// A Gaussian field realisation on the grid and its exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub zvals: Vec<f64>,
    pub avals: Vec<f64>,
}

/// Reusable sampler holding the FFT plan and scaled square-root spectrum.
///
/// `sample` is a pure function of its inputs and allocates its own
/// workspace, so a sampler can be shared across threads.
pub struct FieldSampler {
    n: usize,
    dim: usize,
    scale: Vec<f64>,
    selection: Vec<usize>,
    fft: Arc<dyn Fft<f64>>,
}

impl FieldSampler {
    pub fn new(emb: &Embedding) -> Self {
        let n = 2 * emb.m();
        let s = emb.s() as f64;
        Self {
            n,
            dim: emb.grid().dim(),
            scale: emb.eigenvalues().iter().map(|v| (v / s).sqrt()).collect(),
            selection: emb.selection(),
            // Unnormalised e^{+2πi jk/n}; the 1/√s factor lives in `scale`.
            fft: FftPlanner::new().plan_fft_inverse(n),
        }
    }

    pub fn s(&self) -> usize {
        self.scale.len()
    }

    pub fn num_points(&self) -> usize {
        self.selection.len()
    }

    /// Gaussian field values `B y` (without mean) at the grid points.
    pub fn gaussian(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("y", self.scale.len(), y.len())?;
        let mut buf: Vec<Complex64> = y
            .iter()
            .zip(&self.scale)
            .map(|(yj, sj)| Complex64::new(yj * sj, 0.0))
            .collect();
        fft_nd(&mut buf, self.n, self.dim, self.fft.as_ref());
        Ok(self
            .selection
            .iter()
            .map(|&i| buf[i].re + buf[i].im)
            .collect())
    }

    pub fn sample(&self, y: &[f64], mean: &[f64]) -> Result<FieldSample> {
        check_len("mean", self.selection.len(), mean.len())?;
        let mut zvals = self.gaussian(y)?;
        for (z, mu) in zvals.iter_mut().zip(mean) {
            *z += mu;
        }
        let avals = zvals.iter().map(|z| z.exp()).collect();
        Ok(FieldSample { zvals, avals })
    }
}

/// One realisation of the lognormal field for standard normal input `y`.
pub fn sample_field(emb: &Embedding, y: &[f64], mean: &[f64]) -> Result<FieldSample> {
    FieldSampler::new(emb).sample(y, mean)
}

/// How `b_j` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BjMode {
    /// ∞-norm of each column of `B`.
    #[default]
    Exact,
    /// Upper bound `√(2 v_j / s)`.
    Bound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BjResult {
    /// `b_j` in natural frequency order.
    pub b: Vec<f64>,
    /// `perm[i]` is the frequency index of the i-th largest `b_j`.
    pub perm: Vec<usize>,
    /// Mode actually used; `Exact` falls back to `Bound` above the budget.
    pub mode: BjMode,
}

impl BjResult {
    /// `b_j` in nonincreasing order.
    pub fn sorted(&self) -> Vec<f64> {
        self.perm.iter().map(|&j| self.b[j]).collect()
    }
}

/// Column sup-norms of `B` and the ordering that sorts them nonincreasingly.
pub fn compute_bj(emb: &Embedding, mode: BjMode) -> BjResult {
    let s = emb.s();
    let sf = s as f64;
    let mode = if mode == BjMode::Exact
        && emb.grid().num_points().saturating_mul(s) > EXACT_BJ_BUDGET
    {
        BjMode::Bound
    } else {
        mode
    };
    let b: Vec<f64> = match mode {
        BjMode::Bound => emb
            .eigenvalues()
            .iter()
            .map(|v| (2.0 * v / sf).sqrt())
            .collect(),
        BjMode::Exact => exact_bj(emb),
    };
    let mut perm: Vec<usize> = (0..s).collect();
    // Stable sort keeps ascending index among ties.
    perm.sort_by(|&i, &j| b[j].total_cmp(&b[i]));
    BjResult { b, perm, mode }
}

fn exact_bj(emb: &Embedding) -> Vec<f64> {
    let n = 2 * emb.m();
    let d = emb.grid().dim();
    let m0 = emb.grid().m0();
    let sf = emb.s() as f64;
    let cas: Vec<f64> = (0..n)
        .map(|p| {
            let t = 2.0 * std::f64::consts::PI * p as f64 / n as f64;
            (t.cos() + t.sin()).abs()
        })
        .collect();
    emb.eigenvalues()
        .par_iter()
        .enumerate()
        .map(|(j, &v)| {
            if v == 0.0 {
                return 0.0;
            }
            let mut freq = [0usize; 3];
            let mut rem = j;
            for a in (0..d).rev() {
                freq[a] = rem % n;
                rem /= n;
            }
            // residues k_a * j_a mod n for each axis and k_a in 0..=m0
            let res: Vec<Vec<usize>> = (0..d)
                .map(|a| (0..=m0).map(|k| (k * freq[a]) % n).collect())
                .collect();
            let mut best = 0.0f64;
            match d {
                1 => {
                    for &p in &res[0] {
                        best = best.max(cas[p]);
                    }
                }
                2 => {
                    for &p0 in &res[0] {
                        for &p1 in &res[1] {
                            best = best.max(cas[(p0 + p1) % n]);
                        }
                    }
                }
                _ => {
                    for &p0 in &res[0] {
                        for &p1 in &res[1] {
                            let p01 = p0 + p1;
                            for &p2 in &res[2] {
                                best = best.max(cas[(p01 + p2) % n]);
                            }
                        }
                    }
                }
            }
            (v / sf).sqrt() * best
        })
        .collect()
}

/// `Σ_j (v_j / s)^{p/2}`.
pub fn qmc_criterion(emb: &Embedding, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "criterion exponent must lie in (0, 2], got {p}"
        )));
    }
    let s = emb.s() as f64;
    Ok(emb
        .eigenvalues()
        .iter()
        .map(|v| (v / s).powf(p / 2.0))
        .sum())
}

const MAGIC: &[u8; 8] = b"LNQMCEMB";
const FORMAT_VERSION: u32 = 1;

/// Writes the embedding in a little-endian binary layout:
/// magic, version, d, m0, m, σ², λ, ν, s, then `s` eigenvalues.
pub fn write_embedding<W: Write>(emb: &Embedding, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(emb.grid().dim() as u32).to_le_bytes())?;
    w.write_all(&(emb.grid().m0() as u64).to_le_bytes())?;
    w.write_all(&(emb.m() as u64).to_le_bytes())?;
    let model = emb.model();
    for x in [model.variance(), model.corr_length(), model.smoothness()] {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&(emb.s() as u64).to_le_bytes())?;
    let mut bytes = Vec::with_capacity(8 * emb.s());
    for v in emb.eigenvalues() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated embedding file: {e}")))?;
    Ok(buf)
}

pub fn read_embedding<R: Read>(mut r: R) -> Result<Embedding> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an embedding file".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported embedding format version {version}"
        )));
    }
    let dim = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let m0 = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let m = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let variance = f64::from_le_bytes(read_array(&mut r)?);
    let corr_length = f64::from_le_bytes(read_array(&mut r)?);
    let smoothness = f64::from_le_bytes(read_array(&mut r)?);
    let s = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let grid = GridSpec::new(m0, dim)?;
    let model = CovarianceModel::matern(variance, corr_length, smoothness, dim)?;
    let expected = (2 * m)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Format("embedding size overflows".into()))?;
    if s != expected {
        return Err(Error::Format(format!(
            "eigenvalue count {s} does not match (2m)^d = {expected}"
        )));
    }
    let mut bytes = vec![0u8; 8 * s];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("truncated eigenvalue array: {e}")))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after eigenvalues".into()));
    }
    let v = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Embedding::from_parts(grid, model, m, v)
}
