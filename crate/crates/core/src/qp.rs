//! Standard-form quadratic programs: minimize `½xᵀPx + qᵀx` subject to `l ≤ Ax ≤ u`.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Role of a variable appended after the grid values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxVar {
    /// `t ≥ |u_k - g_k|` for all `k`.
    LinfBound,
    /// `t_k ≥ |u_k - g_k|`.
    L1Bound(usize),
    Gamma,
    Lambda,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VarLayout {
    pub grid_vars: usize,
    pub aux: Vec<AuxVar>,
}

impl VarLayout {
    pub fn len(&self) -> usize {
        self.grid_vars + self.aux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, v: AuxVar) -> Option<usize> {
        self.aux.iter().position(|&a| a == v).map(|i| self.grid_vars + i)
    }
}

#[derive(Clone, Debug)]
pub struct QpProblem {
    /// Full symmetric matrix (both triangles stored).
    pub p: SparseMatrix,
    pub q: Vec<f64>,
    pub a: SparseMatrix,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub layout: VarLayout,
    /// Constant dropped from the objective during assembly.
    pub objective_constant: f64,
}

impl QpProblem {
    pub fn new(
        p: SparseMatrix,
        q: Vec<f64>,
        a: SparseMatrix,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = q.len();
        let layout = VarLayout { grid_vars: n, aux: vec![] };
        let qp = Self { p, q, a, lower, upper, layout, objective_constant: 0.0 };
        qp.validate()?;
        Ok(qp)
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_rows(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |m: &str| Err(Error::InvalidProblem(m.to_string()));
        if self.p.rows() != n || self.p.cols() != n {
            return bad("P must be square with one row per variable");
        }
        if self.a.cols() != n {
            return bad("A must have one column per variable");
        }
        if self.a.rows() != self.lower.len() || self.upper.len() != self.lower.len() {
            return bad("bounds must have one entry per row of A");
        }
        if self.layout.len() != n {
            return bad("variable layout does not match the number of variables");
        }
        if !self.p.is_symmetric() {
            return bad("P must be symmetric");
        }
        if !(self.p.is_finite() && self.a.is_finite() && self.q.iter().all(|v| v.is_finite())) {
            return bad("problem data must be finite");
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return bad("bounds must satisfy lower <= upper");
            }
        }
        Ok(())
    }

    /// `½xᵀPx + qᵀx` (without the dropped constant).
    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * self.p.quad_form(x) + self.q.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Objective including the dropped constant.
    pub fn full_objective(&self, x: &[f64]) -> f64 {
        self.objective(x) + self.objective_constant
    }

    /// Appends rows `lower ≤ B x ≤ upper`.
    pub fn push_rows(&mut self, b: &SparseMatrix, lower: &[f64], upper: &[f64]) -> Result<()> {
        if b.cols() != self.num_vars() || b.rows() != lower.len() || lower.len() != upper.len() {
            return Err(Error::InvalidProblem("appended rows have the wrong shape".into()));
        }
        self.a = SparseMatrix::vstack(&[&self.a, b])?;
        self.lower.extend_from_slice(lower);
        self.upper.extend_from_slice(upper);
        Ok(())
    }

    /// Largest violation of `l ≤ Ax ≤ u`.
    pub fn primal_infeasibility(&self, x: &[f64]) -> f64 {
        self.a
            .mul_vec(x)
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Incremental row assembly over a fixed number of variables.
#[derive(Debug, Default)]
pub(crate) struct RowBuilder {
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RowBuilder {
    pub fn new(cols: usize) -> Self {
        Self { cols, ..Default::default() }
    }

    pub fn rows(&self) -> usize {
        self.lower.len()
    }

    pub fn push(&mut self, entries: &[(usize, f64)], lower: f64, upper: f64) {
        let r = self.rows();
        self.triplets.extend(entries.iter().map(|&(c, v)| (r, c, v)));
        self.lower.push(lower);
        self.upper.push(upper);
    }

    /// Appends every row of `m`, sending column `j` of `m` to `col_map(j)`.
    pub fn push_block(
        &mut self,
        m: &SparseMatrix,
        col_map: impl Fn(usize) -> usize,
        lower: &[f64],
        upper: &[f64],
    ) {
        let r0 = self.rows();
        self.triplets.extend(m.triplets().map(|(i, j, v)| (r0 + i, col_map(j), v)));
        self.lower.extend_from_slice(lower);
        self.upper.extend_from_slice(upper);
    }

    pub fn finish(self) -> Result<(SparseMatrix, Vec<f64>, Vec<f64>)> {
        let a = SparseMatrix::from_triplets(self.lower.len(), self.cols, &self.triplets)?;
        Ok((a, self.lower, self.upper))
    }
}
