//! Ruiz equilibration of the KKT matrix `[P Aᵀ; A 0]` plus cost scaling.
//!
//! Scaled data: `P̂ = c D P D`, `q̂ = c D q`, `Â = E A D`, `l̂ = E l`, `û = E u`.
//! Recover `x = D x̂`, `y = E ŷ / c`, `z = E⁻¹ ẑ`.

use crate::qp::QpProblem;
use crate::sparse::SparseMatrix;

const MIN_SCALING: f64 = 1e-4;
const MAX_SCALING: f64 = 1e4;

pub(crate) struct Scaled {
    pub p: SparseMatrix,
    pub q: Vec<f64>,
    pub a: SparseMatrix,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub c: f64,
}

fn limit(norm: f64) -> f64 {
    if norm < MIN_SCALING {
        1.0
    } else {
        norm.min(MAX_SCALING)
    }
}

pub(crate) fn equilibrate(qp: &QpProblem, iters: usize) -> Scaled {
    let n = qp.num_vars();
    let m = qp.num_rows();
    let mut p = qp.p.clone();
    let mut a = qp.a.clone();
    let mut q = qp.q.clone();
    let mut d = vec![1.0; n];
    let mut e = vec![1.0; m];
    let mut c = 1.0;
    for _ in 0..iters {
        let pn = p.col_inf_norms();
        let an = a.col_inf_norms();
        let dd: Vec<f64> = (0..n).map(|j| 1.0 / limit(pn[j].max(an[j])).sqrt()).collect();
        let de: Vec<f64> = a.row_inf_norms().into_iter().map(|r| 1.0 / limit(r).sqrt()).collect();
        p = p.scale_rows_cols(&dd, &dd);
        a = a.scale_rows_cols(&de, &dd);
        for j in 0..n {
            q[j] *= dd[j];
            d[j] *= dd[j];
        }
        for i in 0..m {
            e[i] *= de[i];
        }
        let pn = p.col_inf_norms();
        let mean = if n == 0 { 0.0 } else { pn.iter().sum::<f64>() / n as f64 };
        let qn = q.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        let gamma = 1.0 / limit(mean.max(qn));
        p = p.scaled(gamma);
        q.iter_mut().for_each(|v| *v *= gamma);
        c *= gamma;
    }
    let l = qp.lower.iter().zip(&e).map(|(v, s)| v * s).collect();
    let u = qp.upper.iter().zip(&e).map(|(v, s)| v * s).collect();
    Scaled { p, q, a, l, u, d, e, c }
}

impl Scaled {
    pub fn unscale_x(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().zip(&self.d).map(|(v, s)| v * s).collect()
    }

    pub fn unscale_y(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().zip(&self.e).map(|(v, s)| v * s / self.c).collect()
    }

    pub fn unscale_z(&self, zs: &[f64]) -> Vec<f64> {
        zs.iter().zip(&self.e).map(|(v, s)| v / s).collect()
    }
}
