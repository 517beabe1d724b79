//! Active-set refinement of an ADMM iterate.
//!
//! Guesses the active rows from the sign of the duals, solves the
//! equality-constrained KKT system on those rows (regularized, then
//! iteratively refined against the exact system) and keeps the result only
//! if it is primal feasible, stationary, and its multipliers have the right
//! signs. A rejected guess is corrected with a few primal-dual active-set
//! steps before giving up.

use faer::linalg::solvers::Solve;
use faer::Col;

use super::admm::residuals;
use super::scaling::Scaled;
use super::SolverSettings;
use crate::qp::QpProblem;
use crate::sparse::SparseMatrix;

pub(crate) struct Polished {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub prim: f64,
    pub dual: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Active {
    Lower,
    Upper,
    Equality,
}

pub(crate) fn polish(
    qp: &QpProblem,
    s: &Scaled,
    x: &[f64],
    z: &[f64],
    y: &[f64],
    set: &SolverSettings,
    max_passes: usize,
) -> Option<Polished> {
    let m = z.len();
    let mut state: Vec<Option<Active>> = (0..m)
        .map(|i| {
            if s.l[i] == s.u[i] {
                Some(Active::Equality)
            } else if z[i] - s.l[i] < -y[i] {
                Some(Active::Lower)
            } else if s.u[i] - z[i] < y[i] {
                Some(Active::Upper)
            } else {
                None
            }
        })
        .collect();
    debug_assert_eq!(x.len(), s.p.rows());


    for _ in 0..=max_passes {
        let (xs, ys) = kkt_solve(s, &state, set)?;
        if let Some(p) = accept(qp, s, &xs, &ys, &state, set) {
            return Some(p);
        }
        // redundant active rows leave the multipliers non-unique and the
        // regularized solve may split them with wrong signs; the ADMM duals,
        // restricted to the active rows, are often a valid choice instead
        let masked = mask(y, &state);
        if let Some(p) = accept(qp, s, &xs, &masked, &state, set) {
            return Some(p);
        }
        // primal-dual active-set step: release rows pushing the wrong way,
        // activate rows the candidate violates
        let ax = s.a.mul_vec(&xs);
        let mut changes = 0;
        for i in 0..m {
            let next = match state[i] {
                Some(Active::Equality) => Some(Active::Equality),
                Some(Active::Lower) if ys[i] > 0.0 => None,
                Some(Active::Upper) if ys[i] < 0.0 => None,
                None if ax[i] < s.l[i] => Some(Active::Lower),
                None if ax[i] > s.u[i] => Some(Active::Upper),
                other => other,
            };
            changes += usize::from(next != state[i]);
            state[i] = next;
        }
        // wholesale swaps mean the guess is far off; the corrections then tend to churn
        if changes == 0 || changes > (m / 10).max(20) {
            return None;
        }
    }
    None
}

/// `y` restricted to the active rows with the sign each side allows.
fn mask(y: &[f64], state: &[Option<Active>]) -> Vec<f64> {
    state
        .iter()
        .zip(y)
        .map(|(st, &v)| match st {
            Some(Active::Equality) => v,
            Some(Active::Lower) => v.min(0.0),
            Some(Active::Upper) => v.max(0.0),
            None => 0.0,
        })
        .collect()
}

/// Solves the equality-constrained problem on the active rows in scaled space.
fn kkt_solve(s: &Scaled, state: &[Option<Active>], set: &SolverSettings) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = s.p.rows();
    let m = state.len();
    let active: Vec<(usize, f64)> = (0..m)
        .filter_map(|i| match state[i]? {
            Active::Lower | Active::Equality => Some((i, s.l[i])),
            Active::Upper => Some((i, s.u[i])),
        })
        .collect();
    let m_act = active.len();
    let dim = n + m_act;
    let delta = set.polish_delta;

    // [P̂ + δI, Âₐᵀ; Âₐ, -δI] and the unregularized version
    let mut a_rows_of: Vec<usize> = vec![usize::MAX; m];
    for (k, &(i, _)) in active.iter().enumerate() {
        a_rows_of[i] = k;
    }
    let mut t: Vec<(usize, usize, f64)> = s.p.triplets().collect();
    for (i, j, v) in s.a.triplets() {
        let k = a_rows_of[i];
        if k != usize::MAX {
            t.push((n + k, j, v));
            t.push((j, n + k, v));
        }
    }
    let exact = SparseMatrix::from_triplets(dim, dim, &t).ok()?;
    t.extend((0..n).map(|i| (i, i, delta)));
    t.extend((0..m_act).map(|k| (n + k, n + k, -delta)));
    let reg = SparseMatrix::from_triplets(dim, dim, &t).ok()?;
    let lu = reg.faer().sp_lu().ok()?;

    let mut rhs: Vec<f64> = s.q.iter().map(|v| -v).collect();
    rhs.extend(active.iter().map(|a| a.1));
    let solve = |b: &[f64]| -> Vec<f64> {
        let c = Col::from_fn(b.len(), |i| b[i]);
        let r = lu.solve(&c);
        (0..b.len()).map(|i| r[i]).collect()
    };
    let mut sol = solve(&rhs);
    for _ in 0..set.polish_refine_iter {
        let k_sol = exact.mul_vec(&sol);
        let r: Vec<f64> = rhs.iter().zip(&k_sol).map(|(a, b)| a - b).collect();
        if r.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < 1e-14 {
            break;
        }
        let d = solve(&r);
        sol.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut ys = vec![0.0; m];
    for (k, &(i, _)) in active.iter().enumerate() {
        ys[i] = sol[n + k];
    }
    sol.truncate(n);
    Some((sol, ys))
}

/// Unscales a candidate and keeps it if it meets the termination tolerances
/// and its multipliers have the right signs.
fn accept(
    qp: &QpProblem,
    s: &Scaled,
    xs: &[f64],
    ys: &[f64],
    state: &[Option<Active>],
    set: &SolverSettings,
) -> Option<Polished> {
    let xu = s.unscale_x(xs);
    let yu = s.unscale_y(ys);
    let ax = qp.a.mul_vec(&xu);
    let zu: Vec<f64> =
        ax.iter().enumerate().map(|(i, v)| v.clamp(qp.lower[i], qp.upper[i])).collect();
    let r = residuals(qp, &xu, &zu, &yu, set);
    if !(r.prim <= r.eps_prim && r.dual <= r.eps_dual) {
        return None;
    }
    let y_tol = r.eps_dual;
    for (i, st) in state.iter().enumerate() {
        let bad = match st {
            Some(Active::Lower) => yu[i] > y_tol,
            Some(Active::Upper) => yu[i] < -y_tol,
            _ => false,
        };
        if bad {
            return None;
        }
    }
    Some(Polished { x: xu, y: yu, prim: r.prim, dual: r.dual })
}
