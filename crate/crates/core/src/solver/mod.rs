//! Sparse convex QP/LP solver.
//!
//! Operator splitting (ADMM) on `min ½xᵀPx + qᵀx, l ≤ Ax ≤ u` with slack
//! `z = Ax`: each iteration solves one regularized linear system in `x`,
//! projects the slack onto the box `[l, u]` and updates the duals. The
//! problem is equilibrated first, the penalty adapts to the residual
//! balance, and an optional polish step re-solves the KKT system on the
//! detected active set.

mod admm;
mod oracle;
mod polish;
mod scaling;

use serde::{Deserialize, Serialize};

pub use oracle::oracle_solve;

use crate::error::Result;
use crate::qp::QpProblem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub eps_prim_inf: f64,
    pub eps_dual_inf: f64,
    pub max_iter: usize,
    /// Initial penalty.
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation.
    pub alpha: f64,
    pub adaptive_rho: bool,
    pub adaptive_rho_interval: usize,
    /// Refactor only when the penalty estimate moves by more than this factor.
    pub adaptive_rho_tolerance: f64,
    pub scaling_iters: usize,
    pub check_interval: usize,
    pub polish: bool,
    pub polish_delta: f64,
    pub polish_refine_iter: usize,
    /// First mid-run polish attempt; later attempts at doubling iteration counts. 0 disables.
    pub polish_interval: usize,
    /// Reserved for randomized tie-breaking; the default path is deterministic.
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            eps_prim_inf: 1e-5,
            eps_dual_inf: 1e-5,
            max_iter: 100_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            adaptive_rho: true,
            adaptive_rho_interval: 50,
            adaptive_rho_tolerance: 5.0,
            scaling_iters: 10,
            check_interval: 10,
            polish: true,
            polish_delta: 1e-7,
            polish_refine_iter: 10,
            polish_interval: 500,
            seed: 0,
        }
    }
}

impl SolverSettings {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps_abs: eps, eps_rel: eps, ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.sigma > 0.0 && self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidArgument("need rho > 0, sigma > 0, 0 < alpha < 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    MaxIter,
    PrimalInfeasible,
    DualInfeasible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub x: Vec<f64>,
    /// Multipliers for the rows of `A`; positive on the upper bound, negative on the lower.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub y: Vec<f64>,
    #[serde(default)]
    pub polished: bool,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            status: Status,
            objective: f64,
            iterations: usize,
            primal_residual: f64,
            dual_residual: f64,
            x: &'a [f64],
        }
        serde_json::to_string(&Summary {
            status: self.status,
            objective: self.objective,
            iterations: self.iterations,
            primal_residual: self.primal_residual,
            dual_residual: self.dual_residual,
            x: &self.x,
        })
        .expect("solutions serialize")
    }
}

/// Solves `qp` with operator splitting.
pub fn solve(qp: &QpProblem, settings: &SolverSettings) -> Result<Solution> {
    settings.validate()?;
    qp.validate()?;
    admm::run(qp, settings)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Unscaled residuals of a candidate `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// `‖Px + q + Aᵀy‖∞`
    pub stationarity: f64,
    pub stationarity_tol: f64,
    /// `‖clamp(Ax, l, u) - Ax‖∞`
    pub primal_infeasibility: f64,
    pub primal_tol: f64,
    /// Largest multiplier pushing against an infinite bound.
    pub dual_sign: f64,
    /// `max_i |y_i| · dist(A_i x, bound selected by sign(y_i))` over finite bounds.
    pub complementarity: f64,
    pub complementarity_tol: f64,
}

impl KktReport {
    pub fn passes(&self) -> bool {
        self.stationarity <= self.stationarity_tol
            && self.primal_infeasibility <= self.primal_tol
            && self.dual_sign <= self.stationarity_tol
            && self.complementarity <= self.complementarity_tol
    }
}

/// KKT residuals of `sol` against `qp`, with tolerances derived from `settings`.
pub fn kkt_report(qp: &QpProblem, sol: &Solution, settings: &SolverSettings) -> KktReport {
    let x = &sol.x;
    let y = &sol.y;
    let ax = qp.a.mul_vec(x);
    let px = qp.p.mul_vec(x);
    let aty = qp.a.tmul_vec(y);
    let grad: Vec<f64> = (0..x.len()).map(|i| px[i] + qp.q[i] + aty[i]).collect();
    let scale = inf_norm(&px).max(inf_norm(&aty)).max(inf_norm(&qp.q));
    let mut comp: f64 = 0.0;
    let mut sign: f64 = 0.0;
    for i in 0..ax.len() {
        let bound = if y[i] > 0.0 { qp.upper[i] } else { qp.lower[i] };
        if y[i] == 0.0 {
            continue;
        }
        if bound.is_finite() {
            comp = comp.max(y[i].abs() * (ax[i] - bound).abs());
        } else {
            sign = sign.max(y[i].abs());
        }
    }
    KktReport {
        stationarity: inf_norm(&grad),
        stationarity_tol: settings.eps_abs + settings.eps_rel * scale,
        primal_infeasibility: qp.primal_infeasibility(x),
        primal_tol: settings.eps_abs + settings.eps_rel * inf_norm(&ax),
        dual_sign: sign,
        complementarity: comp,
        complementarity_tol: 10.0 * settings.eps_abs,
    }
}
