//! Envelope (skyline) Cholesky factorisation for the FE systems.
//!
//! Structured meshes number vertices lexicographically, so the profile of
//! the stiffness matrix stays within a band of width O(k^{d−1}).

use super::assembly::FESystem;
use crate::error::{Error, Result};

pub const RESIDUAL_TOL: f64 = 1e-10;

struct Envelope {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl Envelope {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1]]
    }
}

fn factor(sys: &FESystem) -> Result<Envelope> {
    let n = sys.n();
    let p = &sys.pattern;
    let first: Vec<usize> = (0..n).map(|i| p.col[p.row_ptr[i]].min(i)).collect();
    let mut start = Vec::with_capacity(n + 1);
    start.push(0);
    for i in 0..n {
        start.push(start[i] + i - first[i] + 1);
    }
    let mut data = vec![0.0; start[n]];
    for i in 0..n {
        for k in p.row_ptr[i]..p.row_ptr[i + 1] {
            let j = p.col[k];
            if j <= i {
                data[start[i] + j - first[i]] = sys.values[k];
            }
        }
    }
    for i in 0..n {
        let fi = first[i];
        for j in fi..=i {
            let fj = first[j];
            let lo = fi.max(fj);
            let (head, tail) = data.split_at_mut(start[i]);
            let row_i = &mut tail[..i - fi + 1];
            let mut acc = row_i[j - fi];
            if j < i {
                let row_j = &head[start[j]..start[j + 1]];
                for k in lo..j {
                    acc -= row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] = acc / row_j[j - fj];
            } else {
                for k in fi..i {
                    acc -= row_i[k - fi] * row_i[k - fi];
                }
                if !(acc > 0.0) {
                    return Err(Error::SolverBreakdown(format!(
                        "nonpositive pivot {acc:e} in row {i}"
                    )));
                }
                row_i[i - fi] = acc.sqrt();
            }
        }
    }
    Ok(Envelope { first, start, data })
}

fn substitute(env: &Envelope, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        let row = env.row(i);
        let fi = env.first[i];
        let mut acc = y[i];
        for k in fi..i {
            acc -= row[k - fi] * y[k];
        }
        y[i] = acc / row[i - fi];
    }
    for i in (0..n).rev() {
        let row = env.row(i);
        let fi = env.first[i];
        y[i] /= row[i - fi];
        let yi = y[i];
        for k in fi..i {
            y[k] -= row[k - fi] * yi;
        }
    }
    y
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(sys: &FESystem, x: &[f64]) -> Vec<f64> {
    sys.apply(x)
        .iter()
        .zip(&sys.load)
        .map(|(ax, b)| b - ax)
        .collect()
}

/// Solution on the free vertices with ‖b − Kx‖ ≤ 1e−10 ‖b‖.
pub fn solve_free(sys: &FESystem) -> Result<Vec<f64>> {
    if sys.n() == 0 {
        return Ok(Vec::new());
    }
    let env = factor(sys)?;
    let bnorm = norm(&sys.load);
    if bnorm == 0.0 {
        return Ok(vec![0.0; sys.n()]);
    }
    let mut x = substitute(&env, &sys.load);
    let mut r = residual(sys, &x);
    if norm(&r) > RESIDUAL_TOL * bnorm {
        // one step of iterative refinement
        let dx = substitute(&env, &r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        r = residual(sys, &x);
    }
    let rel = norm(&r) / bnorm;
    if rel > RESIDUAL_TOL {
        return Err(Error::SolverBreakdown(format!("relative residual {rel:e}")));
    }
    Ok(x)
}

/// Nodal solution, zero on Dirichlet vertices.
pub fn solve(sys: &FESystem) -> Result<Vec<f64>> {
    Ok(sys.expand(&solve_free(sys)?))
}

#[cfg(test)]
mod tests {
    use super::super::assembly::{assemble, Assembler};
    use super::super::mesh::{structured_mesh, Domain};
    use super::*;

    #[test]
    fn level_two_square_centre_value() {
        let mesh = structured_mesh(Domain::UnitSquare, 2).unwrap();
        let coeff: Vec<f64> = (0..8).map(|e| mesh.geometry(e).volume).collect();
        let u = solve(&assemble(&mesh, &coeff, |_| 1.0).unwrap()).unwrap();
        assert!((u[4] - 0.0625).abs() < 1e-15);
        assert_eq!(u.iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn residual_contract_on_random_coefficients() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for (domain, k) in [(Domain::UnitSquare, 20), (Domain::UnitCube, 6), (Domain::UnitInterval, 50)] {
            let mesh = structured_mesh(domain, k).unwrap();
            let vals: Vec<f64> = (0..mesh.num_elements()).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
            let sys = Assembler::new(&mesh, |x| 1.0 + x[0]).system_from_values(&vals).unwrap();
            let x = solve_free(&sys).unwrap();
            let r = residual(&sys, &x);
            assert!(norm(&r) <= RESIDUAL_TOL * norm(&sys.load));
        }
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let mesh = structured_mesh(Domain::UnitSquare, 5).unwrap();
        let sys = Assembler::new(&mesh, |_| 0.0)
            .system_from_values(&vec![1.0; mesh.num_elements()])
            .unwrap();
        assert!(solve(&sys).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn scaling_the_coefficient_scales_the_solution() {
        let mesh = structured_mesh(Domain::UnitSquare, 6).unwrap();
        let asm = Assembler::new(&mesh, |_| 1.0);
        let u1 = solve(&asm.system_from_values(&vec![1.0; mesh.num_elements()]).unwrap()).unwrap();
        let u4 = solve(&asm.system_from_values(&vec![4.0; mesh.num_elements()]).unwrap()).unwrap();
        for (a, b) in u1.iter().zip(&u4) {
            assert!((a / 4.0 - b).abs() < 1e-15);
        }
    }

    #[test]
    fn indefinite_input_breaks_down() {
        let mesh = structured_mesh(Domain::UnitSquare, 3).unwrap();
        let mut sys = Assembler::new(&mesh, |_| 1.0)
            .system_from_values(&vec![1.0; mesh.num_elements()])
            .unwrap();
        for v in sys.values.iter_mut() {
            *v = -*v;
        }
        assert!(matches!(solve(&sys), Err(Error::SolverBreakdown(_))));
    }
}
