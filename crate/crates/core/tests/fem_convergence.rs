use lnqmc::embedding::GridSpec;
use lnqmc::fem::{element_coefficient, solve, structured_mesh, Assembler, Domain, Mesh};
use std::f64::consts::PI;

// Degree-5 seven-point rule on triangles (barycentric points, weights sum to 1).
const RULE: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059_715_871_789_770, 0.470_142_064_105_115, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.059_715_871_789_770, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_770], 0.132_394_152_788_506),
    ([0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456], 0.125_939_180_021_827),
    ([0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456], 0.125_939_180_021_827),
    ([0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087], 0.125_939_180_021_827),
];

/// ∫_τ g(x, u_h(x)) over all triangles with the seven-point rule.
fn integrate<G: Fn([f64; 2], f64) -> f64>(mesh: &Mesh, u: &[f64], g: G, element: Option<usize>) -> f64 {
    let elems: Vec<usize> = match element {
        Some(e) => vec![e],
        None => (0..mesh.num_elements()).collect(),
    };
    let mut total = 0.0;
    for e in elems {
        let v = mesh.element(e);
        let vol = mesh.geometry(e).volume;
        for (bary, w) in RULE {
            let mut x = [0.0; 2];
            let mut uh = 0.0;
            for a in 0..3 {
                x[0] += bary[a] * mesh.vertex(v[a])[0];
                x[1] += bary[a] * mesh.vertex(v[a])[1];
                uh += bary[a] * u[v[a]];
            }
            total += vol * w * g(x, uh);
        }
    }
    total
}

fn exact(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn errors(k: usize) -> (f64, f64) {
    let mesh = structured_mesh(Domain::UnitSquare, k).unwrap();
    let asm = Assembler::new(&mesh, |x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin());
    let u = solve(&asm.system_from_values(&vec![1.0; mesh.num_elements()]).unwrap()).unwrap();
    let l2 = integrate(&mesh, &u, |x, uh| (uh - exact(x)).powi(2), None).sqrt();
    let max = (0..mesh.num_vertices())
        .map(|v| {
            let p = mesh.vertex(v);
            (u[v] - exact([p[0], p[1]])).abs()
        })
        .fold(0.0, f64::max);
    (l2, max)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let levels = [16, 32, 64];
    let errs: Vec<(f64, f64)> = levels.iter().map(|&k| errors(k)).collect();
    for w in errs.windows(2) {
        let l2_rate = (w[0].0 / w[1].0).log2();
        let max_rate = (w[0].1 / w[1].1).log2();
        assert!(l2_rate >= 1.9, "L2 rate {l2_rate}");
        assert!(max_rate >= 1.9, "nodal max rate {max_rate}");
    }
}

#[test]
fn interpolation_quadrature_error_obeys_lipschitz_bound() {
    // a(x, y) = 2 + sin(3x) cos(2y) has Lipschitz constant √13.
    let a = |x: [f64; 2]| 2.0 + (3.0 * x[0]).sin() * (2.0 * x[1]).cos();
    let lip = 13f64.sqrt();
    for (m0, k) in [(4, 4), (8, 5), (16, 8), (6, 12)] {
        let grid = GridSpec::new(m0, 2).unwrap();
        let values: Vec<f64> = (0..grid.num_points())
            .map(|i| {
                let p = grid.point(i);
                a([p[0], p[1]])
            })
            .collect();
        let mesh = structured_mesh(Domain::UnitSquare, k).unwrap();
        let h = mesh.h();
        let gamma = 1.0 + 2f64.sqrt() * grid.h0() / h;
        let zeros = vec![0.0; mesh.num_vertices()];
        for e in 0..mesh.num_elements() {
            let exact_int = integrate(&mesh, &zeros, |x, _| a(x), Some(e));
            let approx = element_coefficient(&grid, &values, &mesh, e);
            let bound = mesh.geometry(e).volume * h * gamma * lip;
            assert!((exact_int - approx).abs() <= bound, "m0={m0} k={k} e={e}");
        }
    }
}
