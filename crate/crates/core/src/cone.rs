//! Polyhedral approximations of the cone of convex grid functions.
//!
//! The outer cone asks for a nonnegative normalized second difference
//! `[u(x+hv) + u(x-hv) - 2u(x)] / (h²|v|²)` for every stencil direction `v`
//! and every node where both neighbours exist. The inner cone additionally
//! bounds all those differences between two shared scalars `γ ≤ s ≤ Λ` with
//! `γ ≥ tan²(dθ) Λ`, which forces the Hessian to be positive semidefinite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::sparse::SparseMatrix;
use crate::stencil::{Direction, StencilSet};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Outer,
    Inner,
}

/// What a constraint row refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowTag {
    /// `s_v(u) ≥ 0` (outer) or `s_v(u) - γ ≥ 0` (inner).
    Lower { node: usize, direction: Direction },
    /// `Λ - s_v(u) ≥ 0`.
    Upper { node: usize, direction: Direction },
    /// `γ ≥ 0`.
    GammaNonneg,
    /// `γ - tan²(dθ) Λ ≥ 0`.
    Ratio,
}

#[derive(Clone, Debug)]
pub struct ConeConstraints {
    pub kind: ConeKind,
    /// Columns: the grid values, then `num_aux` auxiliaries (`γ`, `Λ` for the inner cone).
    pub a: SparseMatrix,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub num_aux: usize,
    pub row_index: Vec<RowTag>,
    /// Objective weight on `Λ - γ` for the inner cone.
    pub strictness_weight: f64,
}

impl ConeConstraints {
    pub fn rows(&self) -> usize {
        self.lower.len()
    }
}

fn check_dims(grid: &Grid, stencil: &StencilSet) -> Result<()> {
    if grid.dim() != stencil.dim {
        return Err(Error::InvalidArgument(format!(
            "grid is {}-dimensional but stencil is {}-dimensional",
            grid.dim(),
            stencil.dim
        )));
    }
    Ok(())
}

/// `(node, direction, [(col, weight); 3])` for every admissible pair, sorted by
/// node then by direction order.
fn stencil_rows(grid: &Grid, stencil: &StencilSet) -> Vec<(usize, Direction, [(usize, f64); 3])> {
    let h2 = grid.h() * grid.h();
    let mut rows = Vec::new();
    for k in 0..grid.node_count() {
        for &d in &stencil.directions {
            let (Some(fwd), Some(bwd)) = (grid.offset(k, d.p, d.q), grid.offset(k, -d.p, -d.q)) else {
                continue;
            };
            let s = 1.0 / (h2 * d.norm_sq());
            rows.push((k, d, [(bwd, s), (k, -2.0 * s), (fwd, s)]));
        }
    }
    rows
}

/// Outer-cone rows: one normalized second difference per admissible `(node, direction)`.
pub fn second_difference_rows(grid: &Grid, stencil: &StencilSet) -> Result<ConeConstraints> {
    check_dims(grid, stencil)?;
    let rows = stencil_rows(grid, stencil);
    let mut t = Vec::with_capacity(3 * rows.len());
    let mut tags = Vec::with_capacity(rows.len());
    for (r, (node, direction, entries)) in rows.iter().enumerate() {
        t.extend(entries.iter().map(|&(c, v)| (r, c, v)));
        tags.push(RowTag::Lower { node: *node, direction: *direction });
    }
    let m = rows.len();
    Ok(ConeConstraints {
        kind: ConeKind::Outer,
        a: SparseMatrix::from_triplets(m, grid.node_count(), &t)?,
        lower: vec![0.0; m],
        upper: vec![f64::INFINITY; m],
        num_aux: 0,
        row_index: tags,
        strictness_weight: 0.0,
    })
}

/// Inner-cone rows over the variables `[u, γ, Λ]`.
pub fn inner_cone_rows(
    grid: &Grid,
    stencil: &StencilSet,
    strictness_weight: f64,
) -> Result<ConeConstraints> {
    check_dims(grid, stencil)?;
    if !(strictness_weight >= 0.0 && strictness_weight.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "strictness weight must be a nonnegative number, got {strictness_weight}"
        )));
    }
    let n = grid.node_count();
    let (gamma, lambda) = (n, n + 1);
    let rows = stencil_rows(grid, stencil);
    let mut t = Vec::with_capacity(8 * rows.len() + 3);
    let mut tags = Vec::with_capacity(2 * rows.len() + 2);
    let mut r = 0;
    for (node, direction, entries) in &rows {
        t.extend(entries.iter().map(|&(c, v)| (r, c, v)));
        t.push((r, gamma, -1.0));
        tags.push(RowTag::Lower { node: *node, direction: *direction });
        r += 1;
        t.extend(entries.iter().map(|&(c, v)| (r, c, -v)));
        t.push((r, lambda, 1.0));
        tags.push(RowTag::Upper { node: *node, direction: *direction });
        r += 1;
    }
    t.push((r, gamma, 1.0));
    tags.push(RowTag::GammaNonneg);
    r += 1;
    t.push((r, gamma, 1.0));
    t.push((r, lambda, -stencil.tan2_dtheta));
    tags.push(RowTag::Ratio);
    r += 1;
    Ok(ConeConstraints {
        kind: ConeKind::Inner,
        a: SparseMatrix::from_triplets(r, n + 2, &t)?,
        lower: vec![0.0; r],
        upper: vec![f64::INFINITY; r],
        num_aux: 2,
        row_index: tags,
        strictness_weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: [usize; 2],
    pub direction: [i64; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub feasible: bool,
    pub worst_margin: f64,
    /// Guaranteed lower bound on `λ₁/λₙ` for functions in the outer cone.
    pub eigen_ratio_bound: f64,
    pub violations: Vec<Violation>,
}

/// Normalized second differences of `u` along every admissible stencil row.
pub fn second_differences(u: &GridFunction, stencil: &StencilSet) -> Result<Vec<(usize, Direction, f64)>> {
    check_dims(&u.grid, stencil)?;
    Ok(stencil_rows(&u.grid, stencil)
        .into_iter()
        // difference first, then scale: exact inputs give an exactly signed result
        .map(|(k, d, [(b, s), (c, _), (f, _)])| {
            (k, d, s * ((u.values[b] + u.values[f]) - 2.0 * u.values[c]))
        })
        .collect())
}

/// Checks `u` against the outer cone of `stencil`.
pub fn certify(u: &GridFunction, stencil: &StencilSet, tolerance: f64) -> Result<CertificateReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative tolerance {tolerance}")));
    }
    let diffs = second_differences(u, stencil)?;
    let worst_margin = diffs.iter().map(|d| d.2).fold(f64::INFINITY, f64::min);
    let violations: Vec<Violation> = diffs
        .iter()
        .filter(|d| d.2 < -tolerance)
        .map(|&(k, d, value)| {
            let (i, j) = u.grid.multi_index(k);
            Violation { node: [i, j], direction: [d.p, d.q], value }
        })
        .collect();
    Ok(CertificateReport {
        feasible: violations.is_empty(),
        worst_margin: if diffs.is_empty() { 0.0 } else { worst_margin },
        eigen_ratio_bound: -stencil.tan2_dtheta,
        violations,
    })
}

/// Whether some `(γ, Λ)` satisfies the inner-cone rows for the fixed grid function `u`:
/// `min s ≥ 0` and `min s ≥ tan²(dθ) · max s`, up to `tolerance`.
pub fn inner_cone_satisfiable(u: &GridFunction, stencil: &StencilSet, tolerance: f64) -> Result<bool> {
    let diffs = second_differences(u, stencil)?;
    if diffs.is_empty() {
        return Ok(true);
    }
    let lo = diffs.iter().map(|d| d.2).fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().map(|d| d.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(lo >= -tolerance && lo - stencil.tan2_dtheta * hi >= -tolerance)
}
