use lnqmc::covariance::CovarianceModel;
use lnqmc::embedding::{minimal_embedding, Embedding, FieldSampler, GridSpec};

/// B_{x,j} = √(v_j/s) (cos + sin)(2π k(x)·j / 2m), built column by column
/// without any FFT.
fn dense_b(emb: &Embedding) -> Vec<Vec<f64>> {
    let grid = emb.grid();
    let d = grid.dim();
    let n = 2 * emb.m();
    let s = emb.s();
    let mut b = vec![vec![0.0; s]; grid.num_points()];
    for (x, row) in b.iter_mut().enumerate() {
        let k = grid.multi_index(x);
        for (j, entry) in row.iter_mut().enumerate() {
            let mut rem = j;
            let mut phase = 0usize;
            for a in (0..d).rev() {
                phase += k[a] * (rem % n);
                rem /= n;
            }
            let t = 2.0 * std::f64::consts::PI * (phase % n) as f64 / n as f64;
            *entry = (emb.eigenvalues()[j] / s as f64).sqrt() * (t.cos() + t.sin());
        }
    }
    b
}

fn covariance_matrix(grid: &GridSpec, model: &CovarianceModel) -> Vec<Vec<f64>> {
    let m = grid.num_points();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let (p, q) = (grid.point(i), grid.point(j));
                    let diff: Vec<f64> = (0..grid.dim()).map(|a| p[a] - q[a]).collect();
                    model.rho(&diff).unwrap()
                })
                .collect()
        })
        .collect()
}

#[test]
fn dense_factor_reproduces_covariance() {
    for (d, m0, lambda, nu) in [(1, 4, 0.5, 1.5), (1, 3, 2.0, 0.5), (2, 4, 0.3, 2.0), (2, 2, 0.8, 1.0)] {
        let grid = GridSpec::new(m0, d).unwrap();
        let model = CovarianceModel::matern(0.25, lambda, nu, d).unwrap();
        let emb = minimal_embedding(&grid, &model, 64 * m0).unwrap();
        let b = dense_b(&emb);
        let r = covariance_matrix(&grid, &model);
        let mut worst = 0.0f64;
        for i in 0..b.len() {
            for j in 0..b.len() {
                let bb: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                worst = worst.max((bb - r[i][j]).abs());
            }
        }
        assert!(worst <= 1e-8, "d={d} m0={m0}: {worst:e}");
    }
}

#[test]
fn sampler_columns_match_dense_factor() {
    let grid = GridSpec::new(4, 2).unwrap();
    let model = CovarianceModel::matern(1.0, 0.4, 1.5, 2).unwrap();
    let emb = minimal_embedding(&grid, &model, 256).unwrap();
    let b = dense_b(&emb);
    let sampler = FieldSampler::new(&emb);
    let mut e = vec![0.0; emb.s()];
    for j in 0..emb.s() {
        e[j] = 1.0;
        let col = sampler.gaussian(&e).unwrap();
        e[j] = 0.0;
        for (x, v) in col.iter().enumerate() {
            assert!((v - b[x][j]).abs() < 1e-13, "column {j} row {x}");
        }
    }
}

#[test]
fn trace_identity() {
    for (d, m0, lambda, nu) in [(1, 16, 0.3, 2.5), (2, 8, 0.2, 2.0), (3, 4, 0.3, 1.0)] {
        let grid = GridSpec::new(m0, d).unwrap();
        let model = CovarianceModel::matern(0.7, lambda, nu, d).unwrap();
        let emb = minimal_embedding(&grid, &model, 64 * m0).unwrap();
        let sum: f64 = emb.eigenvalues().iter().sum();
        let expect = emb.s() as f64 * 0.7;
        assert!(((sum - expect) / expect).abs() < 1e-10);
    }
}
