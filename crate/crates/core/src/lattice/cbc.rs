//! Component-by-component construction of rank-1 lattice rules under POD
//! weights, and the shift-averaged worst-case error.
//!
//! The fast path keeps the order-dependent partial products
//! `P_ℓ(i) = Γ_ℓ Σ_{|u|=ℓ} Π_{j∈u} β_j θ_j(frac(i z_j / n))` for every point
//! `i`. Appending dimension `k` with candidate `z` changes the squared error
//! by `(β_k/n) Σ_i θ_k(frac(iz/n)) w(i)` with `w(i) = Σ_ℓ (Γ_ℓ/Γ_{ℓ−1}) P_{ℓ−1}(i)`.
//! For `n = 2^m` the candidate sums split by the 2-adic valuation of `i`;
//! on each level the odd residues modulo `2^t` are `±5^e`, so the sum over
//! all candidates is a cyclic correlation evaluated with one FFT pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::theta::Theta;
use super::weights::WeightSetup;
use crate::error::{Error, Result};

/// Candidates whose squared errors agree to this relative tolerance are tied.
pub const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingVector {
    n: usize,
    z: Vec<usize>,
    s_star: usize,
    tail_seed: u64,
}

impl GeneratingVector {
    /// Validates `z_1 = 1`, odd components below `n` (all ones when `n = 1`),
    /// and a distinct prefix of length `s_star`.
    pub fn new(n: usize, z: Vec<usize>, s_star: usize, tail_seed: u64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("n must be a power of 2, got {n}")));
        }
        if z.is_empty() {
            return Err(Error::InvalidParameter("generating vector is empty".into()));
        }
        if z[0] != 1 {
            return Err(Error::InvalidParameter("z_1 must be 1".into()));
        }
        for &zj in &z {
            let ok = if n == 1 { zj == 1 } else { zj % 2 == 1 && zj < n };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "component {zj} is not a unit modulo {n}"
                )));
            }
        }
        if s_star == 0 || s_star > z.len() {
            return Err(Error::InvalidParameter(format!(
                "s* = {s_star} outside 1..={}",
                z.len()
            )));
        }
        let prefix = &z[..s_star];
        for (j, zj) in prefix.iter().enumerate() {
            if prefix[..j].contains(zj) {
                return Err(Error::InvalidParameter(format!(
                    "component {zj} repeats inside the CBC prefix"
                )));
            }
        }
        Ok(Self {
            n,
            z,
            s_star,
            tail_seed,
        })
    }

    /// The one-point rule in `s` dimensions.
    pub fn single_point(s: usize) -> Result<Self> {
        Self::new(1, vec![1; s], 1, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn s_star(&self) -> usize {
        self.s_star
    }

    pub fn tail_seed(&self) -> u64 {
        self.tail_seed
    }
}

/// Table of θ_k(j/n) for j = 0..n.
fn theta_table(alpha: f64, n: usize) -> Vec<f64> {
    let th = Theta::new(alpha);
    (0..n).into_par_iter().map(|j| th.eval(j as f64 / n as f64)).collect()
}

/// Scaled partial products, stored point-major.
struct PodState {
    n: usize,
    stride: usize,
    top: usize,
    ratio: Vec<f64>,
    p: Vec<f64>,
}

impl PodState {
    fn new(n: usize, max_order: usize, w: &WeightSetup) -> Self {
        let stride = max_order + 1;
        let mut p = vec![0.0; n * stride];
        for row in p.chunks_mut(stride) {
            row[0] = 1.0;
        }
        let ratio = (0..=max_order)
            .map(|l| if l == 0 { 0.0 } else { w.order_ratio(l) })
            .collect();
        Self {
            n,
            stride,
            top: 0,
            ratio,
            p,
        }
    }

    /// w(i) = Σ_ℓ r_ℓ P_{ℓ−1}(i).
    fn weights(&self) -> Vec<f64> {
        let top = self.top.min(self.stride - 2);
        self.p
            .par_chunks(self.stride)
            .map(|row| (0..=top).map(|l| self.ratio[l + 1] * row[l]).sum())
            .collect()
    }

    /// Appends a dimension with component `z`.
    fn push(&mut self, beta: f64, table: &[f64], z: usize) {
        let n = self.n;
        let top = (self.top + 1).min(self.stride - 1);
        let ratio = &self.ratio;
        self.p
            .par_chunks_mut(self.stride)
            .enumerate()
            .for_each(|(i, row)| {
                let c = beta * table[(i * z) % n];
                for l in (1..=top).rev() {
                    row[l] += c * ratio[l] * row[l - 1];
                }
            });
        self.top = top;
    }

    /// (1/n) Σ_i Σ_{ℓ≥1} P_ℓ(i).
    fn squared_error(&self) -> f64 {
        let total: f64 = self
            .p
            .chunks(self.stride)
            .map(|row| row[1..=self.top].iter().sum::<f64>())
            .sum();
        total / self.n as f64
    }
}

/// Σ_i table[(i z) mod n] w(i) for every odd z ≤ n/2, as (z, sum) pairs.
fn candidate_sums_direct(table: &[f64], w: &[f64]) -> Vec<(usize, f64)> {
    let n = table.len();
    (1..=n.max(2) / 2)
        .step_by(2)
        .map(|z| {
            let t = (0..n).map(|i| table[(i * z) % n] * w[i]).sum();
            (z, t)
        })
        .collect()
}

fn cyclic_correlation(g: &[f64], h: &[f64], planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let len = g.len();
    if len <= 8 {
        return (0..len)
            .map(|f| (0..len).map(|e| g[(e + f) % len] * h[e]).sum())
            .collect();
    }
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut a: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut b: Vec<Complex64> = h.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y.conj();
    }
    inv.process(&mut a);
    a.iter().map(|c| c.re / len as f64).collect()
}

/// Same result as [`candidate_sums_direct`] in O(n log n) for n ≥ 8.
fn candidate_sums_fast(
    table: &[f64],
    w: &[f64],
    planner: &mut FftPlanner<f64>,
) -> Vec<(usize, f64)> {
    let n = table.len();
    if n < 8 {
        return candidate_sums_direct(table, w);
    }
    let m = n.trailing_zeros() as usize;
    let base = table[0] * w[0] + table[n / 2] * w[n / 2] + table[n / 4] * (w[n / 4] + w[3 * n / 4]);
    let mut sums = vec![base; n / 4];
    for t in 3..=m {
        let len = 1usize << (t - 2);
        let modulus = 1usize << t;
        let shift = m - t;
        let mut pw = Vec::with_capacity(len);
        let mut x = 1usize;
        for _ in 0..len {
            pw.push(x);
            x = (x * 5) % modulus;
        }
        let g: Vec<f64> = pw.iter().map(|&r| table[r << shift]).collect();
        let h: Vec<f64> = pw
            .iter()
            .map(|&r| w[r << shift] + w[(modulus - r) << shift])
            .collect();
        let corr = cyclic_correlation(&g, &h, planner);
        for (f, v) in sums.iter_mut().enumerate() {
            *v += corr[f % len];
        }
    }
    let mut x = 1usize;
    let mut out = Vec::with_capacity(n / 4);
    for v in sums {
        out.push((x.min(n - x), v));
        x = (x * 5) % n;
    }
    out
}

/// Smallest z among candidates within the tie tolerance of the minimum.
fn pick(cands: impl Iterator<Item = (usize, f64)>) -> (usize, f64) {
    let all: Vec<(usize, f64)> = cands.collect();
    let emin = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tol = TIE_RTOL * emin.abs();
    all.into_iter()
        .filter(|c| c.1 <= emin + tol)
        .min_by_key(|c| c.0)
        .expect("at least one candidate")
}

fn check_inputs(n: usize, s: usize, w: &WeightSetup) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "n must be a power of 2 with n >= 2, got {n}"
        )));
    }
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    if s > w.s() {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: s,
            got: w.s(),
        });
    }
    Ok(())
}

fn finish(n: usize, s: usize, mut z: Vec<usize>, tail_seed: u64) -> Result<GeneratingVector> {
    let s_star = z.len();
    let mut rng = ChaCha8Rng::seed_from_u64(tail_seed);
    while z.len() < s {
        z.push(2 * rng.random_range(0..n / 2) + 1);
    }
    GeneratingVector::new(n, z, s_star, tail_seed)
}

/// Fast CBC. Also returns E²_{s,n,k} for k = 1..=s*.
pub fn cbc_construct_traced(
    n: usize,
    s: usize,
    w: &WeightSetup,
    tail_seed: u64,
) -> Result<(GeneratingVector, Vec<f64>)> {
    check_inputs(n, s, w)?;
    // at most n/4 distinct representatives exist; one spare order keeps w exact
    let max_order = s.min(n / 4 + 1);
    let mut state = PodState::new(n, max_order, w);
    let mut planner = FftPlanner::new();
    let mut z = vec![1usize];
    state.push(w.beta()[0], &theta_table(w.alpha()[0], n), 1);
    let mut trace = vec![state.squared_error()];
    for k in 1..s {
        let beta = w.beta()[k];
        let table = theta_table(w.alpha()[k], n);
        let wv = state.weights();
        let prev = *trace.last().unwrap();
        let sums = candidate_sums_fast(&table, &wv, &mut planner);
        let scale = beta / n as f64;
        let (zk, _) = pick(sums.into_iter().map(|(c, t)| (c, prev + scale * t)));
        if z.contains(&zk) {
            break;
        }
        state.push(beta, &table, zk);
        z.push(zk);
        trace.push(state.squared_error());
    }
    Ok((finish(n, s, z, tail_seed)?, trace))
}

/// CBC construction with the fast candidate evaluation.
pub fn cbc_construct(n: usize, s: usize, w: &WeightSetup, tail_seed: u64) -> Result<GeneratingVector> {
    cbc_construct_traced(n, s, w, tail_seed).map(|r| r.0)
}

/// E²_{s,n,s} of `gv` by the order recursion. Cost O(s² n).
pub fn shift_averaged_wce(gv: &GeneratingVector, w: &WeightSetup) -> Result<f64> {
    if gv.s() > w.s() {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: gv.s(),
            got: w.s(),
        });
    }
    let n = gv.n();
    let mut state = PodState::new(n, gv.s(), w);
    for (k, &zk) in gv.z().iter().enumerate() {
        state.push(w.beta()[k], &theta_table(w.alpha()[k], n), zk);
    }
    Ok(state.squared_error())
}

/// E²_{s,n,k} for the components `z` by the explicit sum over all nonempty
/// subsets and all points. Exponential in `z.len()`; a test oracle.
pub fn wce_direct(n: usize, z: &[usize], w: &WeightSetup) -> f64 {
    assert!(z.len() <= 20, "direct sum limited to 20 dimensions");
    let thetas: Vec<Theta> = (0..z.len()).map(|j| Theta::new(w.alpha()[j])).collect();
    let mut total = 0.0;
    for mask in 1u32..(1 << z.len()) {
        let u: Vec<usize> = (0..z.len()).filter(|j| mask >> j & 1 == 1).collect();
        let gamma = w.gamma(&u);
        let mut sum = 0.0;
        for i in 1..=n {
            let mut prod = 1.0;
            for &j in &u {
                prod *= thetas[j].eval(((i * z[j]) % n) as f64 / n as f64);
            }
            sum += prod;
        }
        total += gamma * sum / n as f64;
    }
    total
}

/// CBC by exhaustive minimisation of [`wce_direct`] over every odd z.
/// Returns the same trace as [`cbc_construct_traced`]; a test oracle.
pub fn cbc_construct_exhaustive(
    n: usize,
    s: usize,
    w: &WeightSetup,
    tail_seed: u64,
) -> Result<(GeneratingVector, Vec<f64>)> {
    check_inputs(n, s, w)?;
    let mut z = vec![1usize];
    let mut trace = vec![wce_direct(n, &z, w)];
    for _ in 1..s {
        let (zk, e) = pick((1..n).step_by(2).map(|c| {
            let mut trial = z.clone();
            trial.push(c);
            (c, wce_direct(n, &trial, w))
        }));
        if z.contains(&zk) {
            break;
        }
        z.push(zk);
        trace.push(e);
    }
    Ok((finish(n, s, z, tail_seed)?, trace))
}
