//! Exhaustive active-set solver for tiny problems.
//!
//! Every row is tried as inactive, at its lower bound or at its upper bound;
//! each guess fixes an equality-constrained QP whose KKT system is solved
//! densely. Among the guesses that are primal feasible and whose multipliers
//! have the right signs, the one with the lowest objective wins. Exponential
//! in the number of rows, so only meant for cross-checking the main solver.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};

use super::{Solution, Status};
use crate::error::{Error, Result};
use crate::qp::QpProblem;

pub const ORACLE_MAX_VARS: usize = 10;
pub const ORACLE_MAX_ROWS: usize = 12;

const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
enum State {
    Free,
    Lower,
    Upper,
}

struct Candidate {
    x: Vec<f64>,
    y: Vec<f64>,
    objective: f64,
}

fn solve_guess(qp: &QpProblem, dense_p: &Mat<f64>, dense_a: &Mat<f64>, states: &[State]) -> Option<Candidate> {
    let n = qp.num_vars();
    let act: Vec<usize> = (0..states.len()).filter(|&i| states[i] != State::Free).collect();
    let dim = n + act.len();
    let k = Mat::from_fn(dim, dim, |i, j| match (i < n, j < n) {
        (true, true) => dense_p[(i, j)],
        (true, false) => dense_a[(act[j - n], i)],
        (false, true) => dense_a[(act[i - n], j)],
        (false, false) => 0.0,
    });
    let rhs = Col::from_fn(dim, |i| {
        if i < n {
            -qp.q[i]
        } else {
            let r = act[i - n];
            if states[r] == State::Lower { qp.lower[r] } else { qp.upper[r] }
        }
    });
    let scale = 1.0 + (0..dim).fold(0.0_f64, |m, i| m.max(rhs[i].abs()));
    let consistent = |sol: &Col<f64>| {
        let resid = &k * sol - &rhs;
        (0..dim).all(|i| sol[i].is_finite() && resid[i].abs() <= 1e-9 * scale)
    };
    let mut sol = k.full_piv_lu().solve(&rhs);
    if !consistent(&sol) {
        // singular (e.g. redundant active rows): minimum-norm solution, if one exists
        let evd = k.self_adjoint_eigen(Side::Lower).ok()?;
        sol = evd.pseudoinverse() * &rhs;
        if !consistent(&sol) {
            return None;
        }
    }
    let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();
    let mut y = vec![0.0; states.len()];
    for (t, &r) in act.iter().enumerate() {
        y[r] = sol[n + t];
    }
    Some(Candidate { objective: qp.objective(&x), x, y })
}

fn next_state(states: &mut [State], allowed: &[Vec<State>]) -> bool {
    for (i, s) in states.iter_mut().enumerate() {
        let opts = &allowed[i];
        let pos = opts.iter().position(|o| o == s).expect("state is allowed");
        if pos + 1 < opts.len() {
            *s = opts[pos + 1];
            return true;
        }
        *s = opts[0];
    }
    false
}

/// Solves a small QP exactly by enumerating active sets.
///
/// Returns `PrimalInfeasible` if no candidate point satisfies the constraints
/// and `DualInfeasible` if feasible points exist but none is a KKT point.
pub fn oracle_solve(qp: &QpProblem) -> Result<Solution> {
    qp.validate()?;
    let (n, m) = (qp.num_vars(), qp.num_rows());
    if n > ORACLE_MAX_VARS || m > ORACLE_MAX_ROWS {
        return Err(Error::OracleTooLarge { vars: n, rows: m });
    }
    let dense_p = {
        let d = qp.p.to_dense();
        Mat::from_fn(n, n, |i, j| d[i][j])
    };
    let dense_a = {
        let d = qp.a.to_dense();
        Mat::from_fn(m, n, |i, j| d[i][j])
    };
    let allowed: Vec<Vec<State>> = (0..m)
        .map(|i| {
            let (l, u) = (qp.lower[i], qp.upper[i]);
            if l == u {
                vec![State::Lower]
            } else {
                let mut v = vec![State::Free];
                if l.is_finite() {
                    v.push(State::Lower);
                }
                if u.is_finite() {
                    v.push(State::Upper);
                }
                v
            }
        })
        .collect();
    let mut states: Vec<State> = allowed.iter().map(|o| o[0]).collect();

    let mut best: Option<Candidate> = None;
    let mut any_feasible = false;
    loop {
        if let Some(c) = solve_guess(qp, &dense_p, &dense_a, &states) {
            let scale = 1.0 + c.x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if qp.primal_infeasibility(&c.x) <= FEAS_TOL * scale {
                any_feasible = true;
                let signs_ok = (0..m).all(|i| match states[i] {
                    _ if qp.lower[i] == qp.upper[i] => true,
                    State::Lower => c.y[i] <= FEAS_TOL,
                    State::Upper => c.y[i] >= -FEAS_TOL,
                    State::Free => true,
                });
                if signs_ok && best.as_ref().is_none_or(|b| c.objective < b.objective) {
                    best = Some(c);
                }
            }
        }
        if !next_state(&mut states, &allowed) {
            break;
        }
    }

    Ok(match best {
        Some(c) => Solution {
            status: Status::Optimal,
            objective: c.objective,
            iterations: 0,
            primal_residual: qp.primal_infeasibility(&c.x),
            dual_residual: 0.0,
            x: c.x,
            y: c.y,
            polished: false,
        },
        None => Solution {
            status: if any_feasible { Status::DualInfeasible } else { Status::PrimalInfeasible },
            objective: f64::NAN,
            iterations: 0,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            x: vec![f64::NAN; n],
            y: vec![],
            polished: false,
        },
    })
}
