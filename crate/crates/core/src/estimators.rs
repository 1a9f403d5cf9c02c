//! Monte Carlo and randomly shifted lattice estimators of E[G(u_h)].

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::embedding::{Embedding, FieldSampler};
use crate::error::{check_len, Error, Result};
use crate::fem::{qoi_average, solve, Assembler, BoxRegion, CentroidInterpolator, Mesh};
use crate::lattice::{cbc_construct, lattice_point_into, to_gaussian, GeneratingVector, WeightSetup};
use crate::rng::open_uniforms;

/// Everything needed to evaluate F(y) = G(u_h(·, y)) with source f ≡ 1.
pub struct ProblemInstance {
    embedding: Embedding,
    sampler: FieldSampler,
    meanfield: Vec<f64>,
    mesh: Mesh,
    mesh_level: usize,
    assembler: Assembler,
    interp: CentroidInterpolator,
    region: BoxRegion,
    region_elements: Vec<usize>,
    perm: Vec<usize>,
}

impl ProblemInstance {
    /// `perm[r]` is the frequency index fed by coordinate `r` of y.
    pub fn new(embedding: Embedding, mesh: Mesh, region: BoxRegion, perm: Vec<usize>) -> Result<Self> {
        let s = embedding.s();
        check_len("permutation", s, perm.len())?;
        let mut seen = vec![false; s];
        for &p in &perm {
            if p >= s || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("perm is not a permutation".into()));
            }
        }
        let interp = CentroidInterpolator::new(embedding.grid(), &mesh)?;
        let region_elements = region.elements(&mesh)?;
        let assembler = Assembler::new(&mesh, |_| 1.0);
        let sampler = FieldSampler::new(&embedding);
        let meanfield = vec![0.0; embedding.grid().num_points()];
        Ok(Self {
            embedding,
            sampler,
            meanfield,
            mesh,
            mesh_level: 0,
            assembler,
            interp,
            region,
            region_elements,
            perm,
        })
    }

    pub fn with_meanfield(mut self, meanfield: Vec<f64>) -> Result<Self> {
        check_len("mean field", self.embedding.grid().num_points(), meanfield.len())?;
        self.meanfield = meanfield;
        Ok(self)
    }

    /// Refinement level reported in study output.
    pub fn with_mesh_level(mut self, k: usize) -> Self {
        self.mesh_level = k;
        self
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_level(&self) -> usize {
        self.mesh_level
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn s(&self) -> usize {
        self.embedding.s()
    }
}

/// Reorders y (sorted by nonincreasing b_j) into frequency order.
pub fn to_frequency_order(perm: &[usize], y: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; y.len()];
    for (r, &p) in perm.iter().enumerate() {
        x[p] = y[r];
    }
    x
}

pub fn to_sorted_order(perm: &[usize], x: &[f64]) -> Vec<f64> {
    perm.iter().map(|&p| x[p]).collect()
}

/// F(y): sample the field, assemble, solve and average over the region.
pub fn evaluate_integrand(p: &ProblemInstance, y: &[f64]) -> Result<f64> {
    check_len("y", p.s(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand argument".into()));
    }
    let x = to_frequency_order(&p.perm, y);
    let field = p.sampler.sample(&x, &p.meanfield)?;
    let coeff = p.interp.values(&field.avals);
    let sys = p.assembler.system_from_values(&coeff)?;
    let u = solve(&sys)?;
    qoi_average(&p.mesh, &u, &p.region_elements)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub stderr: f64,
    pub q: usize,
    pub n: usize,
    /// Total number of integrand evaluations.
    pub total: usize,
    pub wall_time: f64,
    /// Per-shift averages Q_i; `None` for Monte Carlo.
    pub per_shift_values: Option<Vec<f64>>,
}

impl EstimatorResult {
    /// stderr/|estimate|, or the absolute stderr with `true` when the
    /// estimate is zero.
    pub fn rel_stderr(&self) -> (f64, bool) {
        if self.estimate == 0.0 {
            (self.stderr, true)
        } else {
            (self.stderr / self.estimate.abs(), false)
        }
    }
}

/// Mean and √(Σ(x−x̄)²/(m(m−1))), summed in order. The mean gets one
/// correction pass so that constant data give a zero error exactly.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let rough = values.iter().sum::<f64>() / m;
    let mean = rough + values.iter().map(|v| v - rough).sum::<f64>() / m;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (m * (m - 1.0))).sqrt())
}

fn gaussian_sample(seed: u64, index: u64, s: usize) -> Vec<f64> {
    let mut y = vec![0.0; s];
    open_uniforms(seed, index, &mut y);
    to_gaussian(&mut y);
    y
}

/// Plain Monte Carlo with `count` samples; sample k uses stream k of `seed`.
pub fn mc_estimate(p: &ProblemInstance, count: usize, seed: u64) -> Result<EstimatorResult> {
    mc_estimate_with(count, p.s(), seed, |y| evaluate_integrand(p, y))
}

/// Monte Carlo for an arbitrary integrand over R^s with the standard
/// normal density.
pub fn mc_estimate_with<F>(count: usize, s: usize, seed: u64, f: F) -> Result<EstimatorResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if count < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    let start = Instant::now();
    let values = (0..count)
        .into_par_iter()
        .map(|k| f(&gaussian_sample(seed, k as u64, s)))
        .collect::<Result<Vec<f64>>>()?;
    let (estimate, stderr) = mean_and_stderr(&values);
    Ok(EstimatorResult {
        estimate,
        stderr,
        q: 1,
        n: count,
        total: count,
        wall_time: start.elapsed().as_secs_f64(),
        per_shift_values: None,
    })
}

/// Randomly shifted lattice rule with `q` shifts; shift i uses stream i of
/// `seed`.
pub fn qmc_estimate(
    p: &ProblemInstance,
    gv: &GeneratingVector,
    q: usize,
    seed: u64,
) -> Result<EstimatorResult> {
    qmc_estimate_with(gv, q, seed, |y| evaluate_integrand(p, y))
}

pub fn qmc_estimate_with<F>(gv: &GeneratingVector, q: usize, seed: u64, f: F) -> Result<EstimatorResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if q < 2 {
        return Err(Error::InvalidParameter("need at least 2 random shifts".into()));
    }
    let start = Instant::now();
    let n = gv.n();
    let s = gv.s();
    let shifts: Vec<Vec<f64>> = (0..q)
        .map(|i| {
            let mut d = vec![0.0; s];
            open_uniforms(seed, i as u64, &mut d);
            d
        })
        .collect();
    let values = (0..q * n)
        .into_par_iter()
        .map(|t| {
            let (i, k) = (t / n, t % n + 1);
            let mut y = vec![0.0; s];
            lattice_point_into(gv, &shifts[i], k, &mut y)?;
            to_gaussian(&mut y);
            f(&y)
        })
        .collect::<Result<Vec<f64>>>()?;
    let per_shift: Vec<f64> = values
        .chunks(n)
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let (estimate, stderr) = mean_and_stderr(&per_shift);
    Ok(EstimatorResult {
        estimate,
        stderr,
        q,
        n,
        total: q * n,
        wall_time: start.elapsed().as_secs_f64(),
        per_shift_values: Some(per_shift),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mc,
    Qmc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Qmc => "qmc",
        }
    }
}

/// What to run in a study: MC sample counts, or one generating vector per n
/// with a fixed shift count.
#[derive(Debug, Clone)]
pub enum Schedule {
    Mc { counts: Vec<usize> },
    Qmc { gvs: Vec<GeneratingVector>, q: usize },
}

/// One generating vector per n for the sorted `b` held by `w`.
pub fn generating_vectors(ns: &[usize], w: &WeightSetup, tail_seed: u64) -> Result<Vec<GeneratingVector>> {
    ns.iter().map(|&n| cbc_construct(n, w.s(), w, tail_seed)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub method: Method,
    pub d: usize,
    pub m0: usize,
    pub lambda: f64,
    pub nu: f64,
    pub s: usize,
    pub mesh_k: usize,
    pub n: usize,
    pub q: usize,
    pub total: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub rel_stderr: f64,
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "method,d,m0,lambda,nu,s,mesh_k,n,q,N,estimate,stderr,rel_stderr,seconds";

impl StudyRow {
    fn new(p: &ProblemInstance, method: Method, r: &EstimatorResult) -> Self {
        let model = p.embedding.model();
        Self {
            method,
            d: p.embedding.grid().dim(),
            m0: p.embedding.grid().m0(),
            lambda: model.corr_length(),
            nu: model.smoothness(),
            s: p.s(),
            mesh_k: p.mesh_level,
            n: r.n,
            q: r.q,
            total: r.total,
            estimate: r.estimate,
            stderr: r.stderr,
            rel_stderr: r.rel_stderr().0,
            seconds: r.wall_time,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:?},{:?},{},{},{},{},{},{:e},{:e},{:e},{:.6}",
            self.method.as_str(),
            self.d,
            self.m0,
            self.lambda,
            self.nu,
            self.s,
            self.mesh_k,
            self.n,
            self.q,
            self.total,
            self.estimate,
            self.stderr,
            self.rel_stderr,
            self.seconds
        )
    }
}

/// Runs every schedule entry in order, all with the same master seed.
pub fn convergence_study(p: &ProblemInstance, schedule: &Schedule, seed: u64) -> Result<Vec<StudyRow>> {
    match schedule {
        Schedule::Mc { counts } => counts
            .iter()
            .map(|&c| Ok(StudyRow::new(p, Method::Mc, &mc_estimate(p, c, seed)?)))
            .collect(),
        Schedule::Qmc { gvs, q } => gvs
            .iter()
            .map(|gv| Ok(StudyRow::new(p, Method::Qmc, &qmc_estimate(p, gv, *q, seed)?)))
            .collect(),
    }
}

pub fn write_csv<W: Write>(rows: &[StudyRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Least-squares slope of log y against log x.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
