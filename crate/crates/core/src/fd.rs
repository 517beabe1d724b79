//! Finite-difference operator assembly.
//!
//! Scaling factors (`1/h`, `1/h²`) are folded into the stored values. All
//! operators use integer stencil weights that sum to zero, so constants are
//! annihilated exactly.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sparse::SparseMatrix;

fn check(n: usize, min: usize, h: f64) -> Result<()> {
    if n < min {
        return Err(Error::InvalidGrid(format!("need n >= {min}, got {n}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
    }
    Ok(())
}

/// Second difference `(1, -2, 1)/h²` at the `n - 2` interior nodes.
pub fn assemble_dxx_1d(n: usize, h: f64) -> Result<SparseMatrix> {
    check(n, 3, h)?;
    let s = 1.0 / (h * h);
    let t: Vec<_> = (0..n - 2)
        .flat_map(|i| [(i, i, s), (i, i + 1, -2.0 * s), (i, i + 2, s)])
        .collect();
    SparseMatrix::from_triplets(n - 2, n, &t)
}

/// Forward difference `D⁺`, shape `(n-1) × n`, rows `(-1, 1)/h`.
pub fn assemble_forward_1d(n: usize, h: f64) -> Result<SparseMatrix> {
    check(n, 2, h)?;
    let s = 1.0 / h;
    let t: Vec<_> = (0..n - 1).flat_map(|i| [(i, i, -s), (i, i + 1, s)]).collect();
    SparseMatrix::from_triplets(n - 1, n, &t)
}

/// `(D⁺)ᵀ D⁺`: symmetric, positive semidefinite, zero on constants.
pub fn assemble_grad_quad_1d(n: usize, h: f64) -> Result<SparseMatrix> {
    let d = assemble_forward_1d(n, h)?;
    d.transpose().matmul(&d)
}

/// Sum over both axes of the squared forward-difference operator on an
/// `n × n` grid (x-fastest ordering). Equivalent to averaging the forward and
/// backward one-sided operators in each grid direction.
pub fn assemble_laplacian_2d(n: usize, h: f64) -> Result<SparseMatrix> {
    let g = assemble_grad_quad_1d(n, h)?;
    let id = SparseMatrix::identity(n);
    id.kron(&g).add(&g.kron(&id))
}

/// Centered first difference with one-sided rows at both ends.
pub fn assemble_centered_dx(n: usize, h: f64) -> Result<SparseMatrix> {
    check(n, 3, h)?;
    let s = 1.0 / (2.0 * h);
    let mut t = vec![(0, 0, -2.0 * s), (0, 1, 2.0 * s)];
    for i in 1..n - 1 {
        t.push((i, i - 1, -s));
        t.push((i, i + 1, s));
    }
    t.push((n - 1, n - 2, -2.0 * s));
    t.push((n - 1, n - 1, 2.0 * s));
    SparseMatrix::from_triplets(n, n, &t)
}

/// Centered partial derivatives on `grid`: `[D_x]` in 1D, `[D_x, D_y]` in 2D.
pub fn gradient_operators(grid: &Grid) -> Result<Vec<SparseMatrix>> {
    let d = assemble_centered_dx(grid.n(), grid.h())?;
    if grid.dim() == 1 {
        return Ok(vec![d]);
    }
    let id = SparseMatrix::identity(grid.n());
    Ok(vec![id.kron(&d), d.kron(&id)])
}

/// Symmetric operator `M` with `uᵀ M u · h^dim ≈ ∫ |∇u|²`.
pub fn gradient_quadratic(grid: &Grid) -> Result<SparseMatrix> {
    match grid.dim() {
        1 => assemble_grad_quad_1d(grid.n(), grid.h()),
        _ => assemble_laplacian_2d(grid.n(), grid.h()),
    }
}
