//! Shared generators and checks for the integration tests.
#![allow(dead_code)]

use polycone::solver::{kkt_report, solve, Solution, SolverSettings};
use polycone::{QpProblem, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves and asserts the KKT residual suite on optimal results.
pub fn solve_checked(qp: &QpProblem, settings: &SolverSettings) -> Solution {
    let sol = solve(qp, settings).expect("solver error");
    if sol.is_optimal() {
        let r = kkt_report(qp, &sol, settings);
        assert!(r.passes(), "KKT check failed: {r:?}");
    }
    sol
}

fn feasible_bounds(r: &mut ChaCha8Rng, ax0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut l = Vec::new();
    let mut u = Vec::new();
    for &v in ax0 {
        match r.random_range(0..5) {
            0 => {
                l.push(v);
                u.push(v);
            }
            1 => {
                l.push(f64::NEG_INFINITY);
                u.push(v + r.random_range(0.0..1.0));
            }
            2 => {
                l.push(v - r.random_range(0.0..1.0));
                u.push(f64::INFINITY);
            }
            _ => {
                l.push(v - r.random_range(0.0..1.0));
                u.push(v + r.random_range(0.0..1.0));
            }
        }
    }
    (l, u)
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if r.random_bool(density) {
                t.push((i, j, r.random_range(-2.0..2.0)));
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, &t).unwrap()
}

/// Strictly convex or rank-deficient PSD objective, feasible rows.
pub fn random_qp(r: &mut ChaCha8Rng) -> QpProblem {
    let n = r.random_range(1..=5);
    let m = r.random_range(1..=6);
    let k = r.random_range(1..=n);
    let f = random_matrix(r, k, n, 0.8);
    let ftf = f.transpose().matmul(&f).unwrap();
    // summation order can leave FᵀF asymmetric in the last bit
    let ftf = ftf.add(&ftf.transpose()).unwrap().scaled(0.5);
    let p = ftf.add(&SparseMatrix::identity(n).scaled(0.05)).unwrap();
    let q: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    let a = random_matrix(r, m, n, 0.6);
    let x0: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let (l, u) = feasible_bounds(r, &a.mul_vec(&x0));
    QpProblem::new(p, q, a, l, u).unwrap()
}

/// Bounded feasible LP: a box on every variable plus a few general rows.
pub fn random_lp(r: &mut ChaCha8Rng) -> QpProblem {
    let n = r.random_range(1..=4);
    let m = r.random_range(1..=4);
    let q: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    let g = random_matrix(r, m, n, 0.7);
    let x0: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let (mut l, mut u) = feasible_bounds(r, &g.mul_vec(&x0));
    for &v in &x0 {
        l.push(v - r.random_range(0.5..2.0));
        u.push(v + r.random_range(0.5..2.0));
    }
    let a = SparseMatrix::vstack(&[&g, &SparseMatrix::identity(n)]).unwrap();
    QpProblem::new(SparseMatrix::zeros(n, n), q, a, l, u).unwrap()
}
