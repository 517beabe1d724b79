use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::{Col, Side};

use super::polish::polish;
use super::scaling::{equilibrate, Scaled};
use super::{inf_norm, Solution, SolverSettings, Status};
use crate::error::{Error, Result};
use crate::qp::QpProblem;
use crate::sparse::SparseMatrix;

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const RHO_EQ_FACTOR: f64 = 1e3;
/// Active-set corrections allowed per polish attempt.
const POLISH_PASSES: usize = 25;

/// Factorization of `P̂ + σI + Âᵀ diag(ρ) Â`, refreshed whenever `ρ` changes.
struct ReducedSystem {
    symbolic: SymbolicLlt<usize>,
    llt: Llt<usize, f64>,
    /// Rows of `Â` as `(col, value)` lists.
    a_rows: Vec<Vec<(usize, f64)>>,
}

impl ReducedSystem {
    fn assemble(s: &Scaled, a_rows: &[Vec<(usize, f64)>], sigma: f64, rho: &[f64]) -> Result<SparseMatrix> {
        let n = s.q.len();
        let mut t: Vec<(usize, usize, f64)> =
            s.p.triplets().filter(|&(i, j, _)| i >= j).collect();
        t.extend((0..n).map(|i| (i, i, sigma)));
        for (row, r) in a_rows.iter().zip(rho) {
            for &(j, vj) in row {
                for &(k, vk) in row {
                    if j >= k {
                        t.push((j, k, r * vj * vk));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    fn new(s: &Scaled, sigma: f64, rho: &[f64]) -> Result<Self> {
        let mut a_rows = vec![Vec::new(); s.a.rows()];
        for (i, j, v) in s.a.triplets() {
            a_rows[i].push((j, v));
        }
        let k = Self::assemble(s, &a_rows, sigma, rho)?;
        let symbolic = SymbolicLlt::try_new(k.faer().symbolic(), Side::Lower)
            .map_err(|e| Error::InvalidProblem(format!("symbolic factorization failed: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(symbolic.clone(), k.faer().as_ref(), Side::Lower)
            .map_err(|_| Error::InvalidProblem("linear system is not positive definite; P must be PSD".into()))?;
        Ok(Self { symbolic, llt, a_rows })
    }

    fn refactor(&mut self, s: &Scaled, sigma: f64, rho: &[f64]) -> Result<()> {
        let k = Self::assemble(s, &self.a_rows, sigma, rho)?;
        self.llt = Llt::try_new_with_symbolic(self.symbolic.clone(), k.faer().as_ref(), Side::Lower)
            .map_err(|_| Error::InvalidProblem("refactorization failed".into()))?;
        Ok(())
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::from_fn(rhs.len(), |i| rhs[i]);
        let x = self.llt.solve(&b);
        (0..rhs.len()).map(|i| x[i]).collect()
    }
}

fn check_psd(s: &Scaled, sigma: f64) -> Result<()> {
    let n = s.q.len();
    let mut t: Vec<(usize, usize, f64)> = s.p.triplets().filter(|&(i, j, _)| i >= j).collect();
    t.extend((0..n).map(|i| (i, i, sigma)));
    let k = SparseMatrix::from_triplets(n, n, &t)?;
    k.faer()
        .sp_cholesky(Side::Lower)
        .map(|_| ())
        .map_err(|_| Error::InvalidProblem("P is not positive semidefinite".into()))
}

fn rho_vector(s: &Scaled, rho: f64) -> Vec<f64> {
    s.l.iter()
        .zip(&s.u)
        .map(|(&l, &u)| {
            if l == f64::NEG_INFINITY && u == f64::INFINITY {
                RHO_MIN
            } else if l == u {
                (RHO_EQ_FACTOR * rho).min(RHO_MAX)
            } else {
                rho
            }
        })
        .collect()
}

pub(crate) struct Residuals {
    pub prim: f64,
    pub dual: f64,
    pub eps_prim: f64,
    pub eps_dual: f64,
}

/// Unscaled residuals for the iterate `(x, z, y)`.
pub(crate) fn residuals(qp: &QpProblem, x: &[f64], z: &[f64], y: &[f64], set: &SolverSettings) -> Residuals {
    let ax = qp.a.mul_vec(x);
    let px = qp.p.mul_vec(x);
    let aty = qp.a.tmul_vec(y);
    let prim = ax.iter().zip(z).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let dual = (0..x.len()).fold(0.0_f64, |m, i| m.max((px[i] + qp.q[i] + aty[i]).abs()));
    Residuals {
        prim,
        dual,
        eps_prim: set.eps_abs + set.eps_rel * inf_norm(&ax).max(inf_norm(z)),
        eps_dual: set.eps_abs + set.eps_rel * inf_norm(&px).max(inf_norm(&aty)).max(inf_norm(&qp.q)),
    }
}

/// A certificate `δy` of primal infeasibility: `Aᵀδy ≈ 0` and `uᵀδy⁺ + lᵀδy⁻ < 0`.
fn primal_infeasible(qp: &QpProblem, dy: &[f64], eps: f64) -> bool {
    let norm = inf_norm(dy);
    if norm < 1e-30 {
        return false;
    }
    let mut support = 0.0;
    for (i, &v) in dy.iter().enumerate() {
        if v.abs() <= eps * norm {
            continue;
        }
        let bound = if v > 0.0 { qp.upper[i] } else { qp.lower[i] };
        if !bound.is_finite() {
            return false;
        }
        support += bound * v;
    }
    inf_norm(&qp.a.tmul_vec(dy)) <= eps * norm && support < -eps * norm
}

/// A certificate `δx` of dual infeasibility: an unbounded descent direction.
fn dual_infeasible(qp: &QpProblem, dx: &[f64], eps: f64) -> bool {
    let norm = inf_norm(dx);
    if norm < 1e-30 {
        return false;
    }
    let tol = eps * norm;
    if inf_norm(&qp.p.mul_vec(dx)) > tol {
        return false;
    }
    if qp.q.iter().zip(dx).map(|(a, b)| a * b).sum::<f64>() >= -tol {
        return false;
    }
    qp.a.mul_vec(dx).iter().enumerate().all(|(i, &v)| {
        let lo_ok = qp.lower[i] == f64::NEG_INFINITY || v >= -tol;
        let up_ok = qp.upper[i] == f64::INFINITY || v <= tol;
        lo_ok && up_ok
    })
}

pub(crate) fn run(qp: &QpProblem, set: &SolverSettings) -> Result<Solution> {
    let s = equilibrate(qp, set.scaling_iters);
    check_psd(&s, set.sigma)?;
    let n = qp.num_vars();
    let m = qp.num_rows();
    let mut rho_scalar = set.rho;
    let mut rho = rho_vector(&s, rho_scalar);
    let mut sys = ReducedSystem::new(&s, set.sigma, &rho)?;

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut x_prev = x.clone();
    let mut y_prev = y.clone();
    let mut rhs = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut ax_tilde = vec![0.0; m];

    let mut status = Status::MaxIter;
    let mut iter = 0;
    let mut next_polish = set.polish_interval;
    while iter < set.max_iter {
        iter += 1;
        x_prev.copy_from_slice(&x);
        y_prev.copy_from_slice(&y);

        for i in 0..m {
            w[i] = rho[i] * z[i] - y[i];
        }
        s.a.tmul_vec_into(&w, &mut rhs);
        for j in 0..n {
            rhs[j] += set.sigma * x[j] - s.q[j];
        }
        let x_tilde = sys.solve(&rhs);
        s.a.mul_vec_into(&x_tilde, &mut ax_tilde);
        for j in 0..n {
            x[j] = set.alpha * x_tilde[j] + (1.0 - set.alpha) * x[j];
        }
        for i in 0..m {
            let z_relaxed = set.alpha * ax_tilde[i] + (1.0 - set.alpha) * z[i];
            let z_new = (z_relaxed + y[i] / rho[i]).clamp(s.l[i], s.u[i]);
            y[i] += rho[i] * (z_relaxed - z_new);
            z[i] = z_new;
        }

        let check = iter % set.check_interval == 0 || iter == set.max_iter;
        if check {
            let (xu, zu, yu) = (s.unscale_x(&x), s.unscale_z(&z), s.unscale_y(&y));
            let r = residuals(qp, &xu, &zu, &yu, set);
            if r.prim <= r.eps_prim && r.dual <= r.eps_dual {
                status = Status::Optimal;
                break;
            }
            let dy: Vec<f64> = s.unscale_y(&y.iter().zip(&y_prev).map(|(a, b)| a - b).collect::<Vec<_>>());
            if m > 0 && primal_infeasible(qp, &dy, set.eps_prim_inf) {
                status = Status::PrimalInfeasible;
                break;
            }
            let dx: Vec<f64> = s.unscale_x(&x.iter().zip(&x_prev).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dual_infeasible(qp, &dx, set.eps_dual_inf) {
                status = Status::DualInfeasible;
                break;
            }
        }

        // slow tails (long chains of active second differences) often have the
        // right active set long before the residuals are small
        if set.polish && set.polish_interval > 0 && iter == next_polish && m > 0 {
            next_polish *= 2;
            if let Some(p) = polish(qp, &s, &x, &z, &y, set, POLISH_PASSES) {
                return Ok(Solution {
                    status: Status::Optimal,
                    objective: qp.objective(&p.x),
                    iterations: iter,
                    primal_residual: p.prim,
                    dual_residual: p.dual,
                    x: p.x,
                    y: p.y,
                    polished: true,
                });
            }
        }

        if set.adaptive_rho && iter % set.adaptive_rho_interval == 0 && m > 0 {
            let ax = s.a.mul_vec(&x);
            let px = s.p.mul_vec(&x);
            let aty = s.a.tmul_vec(&y);
            let prim = ax.iter().zip(&z).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            let dual = (0..n).fold(0.0_f64, |acc, j| acc.max((px[j] + s.q[j] + aty[j]).abs()));
            let prim_n = prim / inf_norm(&ax).max(inf_norm(&z)).max(1e-30);
            let dual_n = dual / inf_norm(&px).max(inf_norm(&aty)).max(inf_norm(&s.q)).max(1e-30);
            let estimate = (rho_scalar * (prim_n / dual_n.max(1e-30)).sqrt()).clamp(RHO_MIN, RHO_MAX);
            if estimate.is_finite()
                && (estimate > rho_scalar * set.adaptive_rho_tolerance
                    || estimate < rho_scalar / set.adaptive_rho_tolerance)
            {
                rho_scalar = estimate;
                rho = rho_vector(&s, rho_scalar);
                sys.refactor(&s, set.sigma, &rho)?;
            }
        }
    }

    let xu = s.unscale_x(&x);
    let zu = s.unscale_z(&z);
    let yu = s.unscale_y(&y);
    let r = residuals(qp, &xu, &zu, &yu, set);
    let mut sol = Solution {
        status,
        objective: qp.objective(&xu),
        iterations: iter,
        primal_residual: r.prim,
        dual_residual: r.dual,
        x: xu,
        y: yu,
        polished: false,
    };
    if status == Status::Optimal && set.polish {
        if let Some(p) = polish(qp, &s, &x, &z, &y, set, POLISH_PASSES) {
            sol.objective = qp.objective(&p.x);
            sol.primal_residual = p.prim;
            sol.dual_residual = p.dual;
            sol.x = p.x;
            sol.y = p.y;
            sol.polished = true;
        }
    }
    Ok(sol)
}
