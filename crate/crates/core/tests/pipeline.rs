use lnqmc::covariance::CovarianceModel;
use lnqmc::embedding::{compute_bj, minimal_embedding, BjMode, GridSpec};
use lnqmc::estimators::{
    evaluate_integrand, mc_estimate, mc_estimate_with, qmc_estimate_with, ProblemInstance,
};
use lnqmc::fem::{structured_mesh, BoxRegion, Domain};
use lnqmc::lattice::{cbc_construct, WeightSetup};
use rand::{Rng, SeedableRng};

/// The whole map y -> G(u_h) for d = 1 written out by hand: naive real DFT
/// for the spectrum, explicit cos+sin synthesis, tridiagonal FE solve.
fn scalar_oracle(model: &CovarianceModel, m0: usize, m: usize, k: usize, perm: &[usize], y: &[f64]) -> f64 {
    let n = 2 * m;
    let h0 = 1.0 / m0 as f64;
    let ell = m as f64 * h0;
    let r: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * h0;
            model.rho_at_distance(if x <= ell { x } else { 2.0 * ell - x })
        })
        .collect();
    let tau = 2.0 * std::f64::consts::PI / n as f64;
    let v: Vec<f64> = (0..n)
        .map(|j| {
            let e: f64 = (0..n).map(|i| r[i] * (tau * (i * j % n) as f64).cos()).sum();
            e.max(0.0)
        })
        .collect();
    let mut x = vec![0.0; n];
    for (rank, &j) in perm.iter().enumerate() {
        x[j] = y[rank];
    }
    let a: Vec<f64> = (0..=m0)
        .map(|i| {
            let z: f64 = (0..n)
                .map(|j| {
                    let t = tau * (i * j % n) as f64;
                    (v[j] / n as f64).sqrt() * x[j] * (t.cos() + t.sin())
                })
                .sum();
            z.exp()
        })
        .collect();
    // linear FE on k cells, coefficient at cell midpoints
    let h = 1.0 / k as f64;
    let coef: Vec<f64> = (0..k)
        .map(|e| {
            let c = (e as f64 + 0.5) * h;
            let t = c / h0;
            let cell = ((t.ceil() as usize).max(1) - 1).min(m0 - 1);
            let xi = t - cell as f64;
            (1.0 - xi) * a[cell] + xi * a[cell + 1]
        })
        .collect();
    let nf = k - 1;
    let diag: Vec<f64> = (0..nf).map(|i| (coef[i] + coef[i + 1]) / h).collect();
    let off: Vec<f64> = (0..nf.saturating_sub(1)).map(|i| -coef[i + 1] / h).collect();
    let rhs = vec![h; nf];
    // Thomas algorithm
    let mut c = vec![0.0; nf];
    let mut d = vec![0.0; nf];
    for i in 0..nf {
        let lower = if i > 0 { off[i - 1] } else { 0.0 };
        let denom = diag[i] - if i > 0 { lower * c[i - 1] } else { 0.0 };
        c[i] = if i + 1 < nf { off[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - if i > 0 { lower * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut u = vec![0.0; nf];
    for i in (0..nf).rev() {
        u[i] = d[i] - if i + 1 < nf { c[i] * u[i + 1] } else { 0.0 };
    }
    let nodal = |i: usize| if i == 0 || i == k { 0.0 } else { u[i - 1] };
    (0..k).map(|e| 0.5 * (nodal(e) + nodal(e + 1)) * h).sum()
}

#[test]
fn one_dimensional_pipeline_matches_scalar_oracle() {
    let (m0, k) = (4, 8);
    let grid = GridSpec::new(m0, 1).unwrap();
    let model = CovarianceModel::matern(0.8, 0.4, 1.5, 1).unwrap();
    let emb = minimal_embedding(&grid, &model, 64).unwrap();
    let m = emb.m();
    let perm = compute_bj(&emb, BjMode::Exact).perm;
    let mesh = structured_mesh(Domain::UnitInterval, k).unwrap();
    let p = ProblemInstance::new(emb, mesh, BoxRegion::unit(1), perm.clone()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let y: Vec<f64> = (0..p.s()).map(|_| rng.random_range(-2.5..2.5)).collect();
        let got = evaluate_integrand(&p, &y).unwrap();
        let want = scalar_oracle(&model, m0, m, k, &perm, &y);
        assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn sampled_field_has_the_target_covariance() {
    let grid = GridSpec::new(8, 1).unwrap();
    let model = CovarianceModel::matern(1.0, 0.5, 1.5, 1).unwrap();
    let emb = minimal_embedding(&grid, &model, 512).unwrap();
    let sampler = lnqmc::embedding::FieldSampler::new(&emb);
    let count = 50_000;
    let fields: Vec<Vec<f64>> = (0..count)
        .map(|k| {
            let mut y = vec![0.0; emb.s()];
            lnqmc::rng::open_uniforms(4, k as u64, &mut y);
            lnqmc::lattice::to_gaussian(&mut y);
            sampler.gaussian(&y).unwrap()
        })
        .collect();
    for (a, b) in [(0, 0), (0, 4), (2, 6), (3, 8), (1, 2)] {
        let prods: Vec<f64> = fields.iter().map(|z| z[a] * z[b]).collect();
        let (mean, se) = lnqmc::estimators::mean_and_stderr(&prods);
        let target = model.rho_at_distance((a as f64 - b as f64).abs() / 8.0);
        assert!((mean - target).abs() < 4.0 * se, "({a},{b}): {mean} vs {target} se {se}");
    }
}

#[test]
fn monte_carlo_error_halves_when_samples_quadruple() {
    let grid = GridSpec::new(4, 2).unwrap();
    let model = CovarianceModel::matern(1.0, 0.3, 1.5, 2).unwrap();
    let emb = minimal_embedding(&grid, &model, 256).unwrap();
    let perm = compute_bj(&emb, BjMode::Bound).perm;
    let mesh = structured_mesh(Domain::UnitSquare, 4).unwrap();
    let p = ProblemInstance::new(emb, mesh, BoxRegion::unit(2), perm).unwrap();
    let small = mc_estimate(&p, 500, 7).unwrap();
    let large = mc_estimate(&p, 2000, 8).unwrap();
    let ratio = small.stderr / large.stderr;
    // stderr estimates from 500 and 2000 samples carry ~5% noise each
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    assert!((small.estimate - large.estimate).abs() < 4.0 * small.stderr.hypot(large.stderr));
}

#[test]
fn lattice_rule_converges_on_gaussian_moments() {
    // E[y1² y2²] = 1. The quartic integrand makes per-shift averages skewed
    // at small n, so the 4σ check is applied at the largest n only.
    let w = WeightSetup::new(&[0.6, 0.5], 0.6).unwrap();
    let f = |y: &[f64]| Ok(y[0] * y[0] * y[1] * y[1]);
    let mut prev = f64::INFINITY;
    let mut last = None;
    for n in [64, 512, 4096] {
        let gv = cbc_construct(n, 2, &w, 0).unwrap();
        let r = qmc_estimate_with(&gv, 16, 11, f).unwrap();
        assert!(r.stderr < prev, "n={n}: {r:?}");
        prev = r.stderr;
        last = Some(r);
    }
    let r = last.unwrap();
    assert!((r.estimate - 1.0).abs() < 4.0 * r.stderr, "{r:?}");
    assert!((r.estimate - 1.0).abs() < 2e-3);
    let mc = mc_estimate_with(4096 * 16, 2, 11, f).unwrap();
    assert!(r.stderr < mc.stderr);
}
