//! Variational problems as standard-form QPs and LPs.
//!
//! Grid values come first in the variable vector, followed by the norm
//! auxiliaries (`t` or `t_k`) and, for the inner cone, `γ` and `Λ`.
//! Integrals use nodal quadrature weights; gradients inside quadratic terms
//! use the symmetric forward-difference operator, gradients in constraints
//! and linear terms use the centered one.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cone::{inner_cone_rows, second_difference_rows, ConeKind};
use crate::error::{Error, Result};
use crate::fd::{gradient_operators, gradient_quadratic};
use crate::grid::{sample, Grid, GridFunction};
use crate::qp::{AuxVar, QpProblem, RowBuilder, VarLayout};
use crate::sparse::SparseMatrix;
use crate::stencil::StencilSet;
use crate::targets::{self, TargetParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Projection,
    RochetChone,
    Monopolist,
    MonopolistVariant,
    ConvexEnvelope,
    Custom1dSource,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidSpec(format!("unknown problem kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
    /// Seminorm `∫ |∇(u - u₀)|²`.
    H1,
    /// `H1` with `u = 0` on the boundary.
    #[serde(rename = "H1_0")]
    H1Zero,
    /// `H1` with `-1 ≤ ∂u ≤ 1` and `u` pinned to the target at the node nearest the origin.
    #[serde(rename = "H1_gradbox")]
    H1Gradbox,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidSpec(format!("unknown norm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Zeroth,
    #[default]
    Trapezoidal,
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidSpec(format!("unknown quadrature '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub weights: Vec<f64>,
}

pub fn quadrature_weights(grid: &Grid, rule: QuadratureRule) -> Quadrature {
    let n_nodes = grid.node_count();
    let weights = match rule {
        QuadratureRule::Zeroth => vec![grid.measure() / n_nodes as f64; n_nodes],
        QuadratureRule::Trapezoidal => {
            let h = grid.h();
            let last = grid.n() - 1;
            let w1 = |i: usize| if i == 0 || i == last { h / 2.0 } else { h };
            (0..n_nodes)
                .map(|k| {
                    let (i, j) = grid.multi_index(k);
                    if grid.dim() == 1 {
                        w1(i)
                    } else {
                        w1(i) * w1(j)
                    }
                })
                .collect()
        }
    };
    Quadrature { weights }
}

/// Everything needed to assemble one problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub norm: Option<Norm>,
    /// Projection/envelope target, or the source `f` for the 1D problem.
    pub target: Option<GridFunction>,
    pub grid: Grid,
    pub width: usize,
    pub cone: ConeKind,
    pub quadrature: QuadratureRule,
    /// Monopolist coefficient.
    pub c: f64,
    pub strictness_weight: f64,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, grid: Grid) -> Self {
        Self {
            kind,
            norm: None,
            target: None,
            grid,
            width: 1,
            cone: ConeKind::Outer,
            quadrature: QuadratureRule::default(),
            c: 1.0,
            strictness_weight: 0.0,
        }
    }

    pub fn projection(norm: Norm, target: GridFunction) -> Self {
        let grid = target.grid.clone();
        Self { norm: Some(norm), target: Some(target), ..Self::new(ProblemKind::Projection, grid) }
    }

    pub fn with_width(mut self, width: usize) -> Self {
        self.width = width;
        self
    }

    pub fn with_cone(mut self, cone: ConeKind) -> Self {
        self.cone = cone;
        self
    }

    pub fn with_quadrature(mut self, rule: QuadratureRule) -> Self {
        self.quadrature = rule;
        self
    }

    pub fn with_target(mut self, target: GridFunction) -> Self {
        self.target = Some(target);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.width < 1 {
            return bad("stencil width must be at least 1".into());
        }
        if let Some(t) = &self.target {
            if t.grid != self.grid {
                return bad("target lives on a different grid".into());
            }
        }
        match self.kind {
            ProblemKind::Projection | ProblemKind::ConvexEnvelope | ProblemKind::Custom1dSource
                if self.target.is_none() =>
            {
                return bad(format!("{:?} needs a target", self.kind));
            }
            ProblemKind::Projection if self.norm.is_none() => return bad("projection needs a norm".into()),
            ProblemKind::Custom1dSource if self.grid.dim() != 1 => {
                return bad("the 1D source problem needs a 1D grid".into());
            }
            ProblemKind::Monopolist if !(self.c > 0.0 && self.c.is_finite()) => {
                return bad(format!("monopolist coefficient must be positive, got {}", self.c));
            }
            _ => {}
        }
        if self.norm == Some(Norm::H1Gradbox) && self.grid.n() < 3 {
            return bad("gradient box needs at least 3 nodes per axis".into());
        }
        if !(self.strictness_weight >= 0.0 && self.strictness_weight.is_finite()) {
            return bad("strictness weight must be nonnegative".into());
        }
        Ok(())
    }

    fn target_values(&self) -> &[f64] {
        &self.target.as_ref().expect("validated").values
    }

    fn stencil(&self) -> Result<StencilSet> {
        StencilSet::new(self.width, self.grid.dim())
    }
}

/// Objective and row assembly over a fixed variable layout.
struct Assembly {
    layout: VarLayout,
    p: Vec<(usize, usize, f64)>,
    q: Vec<f64>,
    constant: f64,
    rows: RowBuilder,
}

impl Assembly {
    fn new(spec: &ProblemSpec, mut aux: Vec<AuxVar>) -> Self {
        if spec.cone == ConeKind::Inner {
            aux.extend([AuxVar::Gamma, AuxVar::Lambda]);
        }
        let layout = VarLayout { grid_vars: spec.grid.node_count(), aux };
        let n = layout.len();
        Self { layout, p: Vec::new(), q: vec![0.0; n], constant: 0.0, rows: RowBuilder::new(n) }
    }

    /// Adds `scale · M` to the grid block of `P`.
    fn add_p(&mut self, m: &SparseMatrix, scale: f64) {
        self.p.extend(m.triplets().map(|(i, j, v)| (i, j, scale * v)));
    }

    fn add_cone(&mut self, spec: &ProblemSpec) -> Result<()> {
        let stencil = spec.stencil()?;
        let n = self.layout.grid_vars;
        match spec.cone {
            ConeKind::Outer => {
                let c = second_difference_rows(&spec.grid, &stencil)?;
                self.rows.push_block(&c.a, |j| j, &c.lower, &c.upper);
            }
            ConeKind::Inner => {
                let c = inner_cone_rows(&spec.grid, &stencil, spec.strictness_weight)?;
                let g = self.layout.position(AuxVar::Gamma).expect("inner layout");
                let l = self.layout.position(AuxVar::Lambda).expect("inner layout");
                let map = |j: usize| match j.checked_sub(n) {
                    None => j,
                    Some(0) => g,
                    Some(_) => l,
                };
                self.rows.push_block(&c.a, map, &c.lower, &c.upper);
                self.q[l] += c.strictness_weight;
                self.q[g] -= c.strictness_weight;
            }
        }
        Ok(())
    }

    /// `lower ≤ M u ≤ upper` on the grid block.
    fn add_grid_rows(&mut self, m: &SparseMatrix, lower: &[f64], upper: &[f64]) {
        self.rows.push_block(m, |j| j, lower, upper);
    }

    fn finish(self) -> Result<QpProblem> {
        let n = self.layout.len();
        let p = SparseMatrix::from_triplets(n, n, &self.p)?;
        let (a, lower, upper) = self.rows.finish()?;
        let mut qp = QpProblem::new(p, self.q, a, lower, upper)?;
        qp.layout = self.layout;
        qp.objective_constant = self.constant;
        qp.validate()?;
        Ok(qp)
    }
}

/// `∫ ½|∇u|²`-type scaling: `uᵀ M u · h^dim ≈ ∫ |∇u|²`.
fn gradient_block(grid: &Grid) -> Result<(SparseMatrix, f64)> {
    Ok((gradient_quadratic(grid)?, grid.h().powi(grid.dim() as i32)))
}

/// Adds `‖u - g‖²_w` to the objective.
fn add_weighted_l2(asm: &mut Assembly, w: &[f64], g: &[f64]) {
    for (k, (&wk, &gk)) in w.iter().zip(g).enumerate() {
        asm.p.push((k, k, 2.0 * wk));
        asm.q[k] -= 2.0 * wk * gk;
        asm.constant += wk * gk * gk;
    }
}

/// Adds `∫ u - ∇u·x` (linear part of the screening functionals).
fn add_screening_linear(asm: &mut Assembly, grid: &Grid, w: &[f64]) -> Result<()> {
    let grads = gradient_operators(grid)?;
    for (k, &wk) in w.iter().enumerate() {
        asm.q[k] += wk;
    }
    for (d, dm) in grads.iter().enumerate() {
        let wx: Vec<f64> = (0..w.len()).map(|k| w[k] * grid.point(k)[d]).collect();
        for (k, v) in dm.tmul_vec(&wx).into_iter().enumerate() {
            asm.q[k] -= v;
        }
    }
    Ok(())
}

pub fn build_projection(spec: &ProblemSpec) -> Result<QpProblem> {
    spec.validate()?;
    let norm = spec.norm.ok_or_else(|| Error::InvalidSpec("projection needs a norm".into()))?;
    let g = spec.target_values();
    let n = spec.grid.node_count();
    let w = quadrature_weights(&spec.grid, spec.quadrature).weights;
    let aux = match norm {
        Norm::Linf => vec![AuxVar::LinfBound],
        Norm::L1 => (0..n).map(AuxVar::L1Bound).collect(),
        _ => vec![],
    };
    let mut asm = Assembly::new(spec, aux);
    match norm {
        Norm::L2 => add_weighted_l2(&mut asm, &w, g),
        Norm::H1 | Norm::H1Zero | Norm::H1Gradbox => {
            let (m, s) = gradient_block(&spec.grid)?;
            asm.add_p(&m, 2.0 * s);
            for (k, v) in m.mul_vec(g).into_iter().enumerate() {
                asm.q[k] -= 2.0 * s * v;
            }
            asm.constant += s * m.quad_form(g);
        }
        Norm::Linf | Norm::L1 => {
            for k in 0..n {
                let t = if norm == Norm::Linf { n } else { n + k };
                asm.rows.push(&[(k, 1.0), (t, -1.0)], f64::NEG_INFINITY, g[k]);
                asm.rows.push(&[(k, 1.0), (t, 1.0)], g[k], f64::INFINITY);
            }
            if norm == Norm::Linf {
                asm.q[n] = 1.0;
            } else {
                asm.q[n..2 * n].copy_from_slice(&w);
            }
        }
    }
    match norm {
        Norm::H1Zero => {
            for k in (0..n).filter(|&k| spec.grid.is_boundary(k)) {
                asm.rows.push(&[(k, 1.0)], 0.0, 0.0);
            }
        }
        Norm::H1Gradbox => {
            for d in gradient_operators(&spec.grid)? {
                asm.add_grid_rows(&d, &vec![-1.0; n], &vec![1.0; n]);
            }
            let origin = vec![0.0; spec.grid.dim()];
            let k = spec.grid.nearest_node(&origin);
            asm.rows.push(&[(k, 1.0)], g[k], g[k]);
        }
        _ => {}
    }
    asm.add_cone(spec)?;
    asm.finish()
}

/// Largest convex minorant: the L2 projection restricted to `u ≤ u₀`.
pub fn build_envelope(spec: &ProblemSpec) -> Result<QpProblem> {
    spec.validate()?;
    let g = spec.target_values();
    let n = spec.grid.node_count();
    let w = quadrature_weights(&spec.grid, spec.quadrature).weights;
    let mut asm = Assembly::new(spec, vec![]);
    add_weighted_l2(&mut asm, &w, g);
    asm.add_grid_rows(&SparseMatrix::identity(n), &vec![f64::NEG_INFINITY; n], g);
    asm.add_cone(spec)?;
    asm.finish()
}

/// `∫ c|∇u|²/2 + u - ∇u·x` subject to `u ≥ 0`.
pub fn build_monopolist(spec: &ProblemSpec) -> Result<QpProblem> {
    spec.validate()?;
    let n = spec.grid.node_count();
    let w = quadrature_weights(&spec.grid, spec.quadrature).weights;
    let mut asm = Assembly::new(spec, vec![]);
    let (m, s) = gradient_block(&spec.grid)?;
    asm.add_p(&m, spec.c * s);
    add_screening_linear(&mut asm, &spec.grid, &w)?;
    asm.add_grid_rows(&SparseMatrix::identity(n), &vec![0.0; n], &vec![f64::INFINITY; n]);
    asm.add_cone(spec)?;
    asm.finish()
}

/// The monopolist functional with unit coefficient.
pub fn build_rochet_chone(spec: &ProblemSpec) -> Result<QpProblem> {
    build_monopolist(&ProblemSpec { c: 1.0, ..spec.clone() })
}

/// LP `min ∫ u - ∇u·x` with `0 ≤ ∂u ≤ 1` and `u = 0` at the node nearest the origin.
pub fn build_monopolist_variant(spec: &ProblemSpec) -> Result<QpProblem> {
    spec.validate()?;
    let n = spec.grid.node_count();
    let w = quadrature_weights(&spec.grid, spec.quadrature).weights;
    let mut asm = Assembly::new(spec, vec![]);
    add_screening_linear(&mut asm, &spec.grid, &w)?;
    for d in gradient_operators(&spec.grid)? {
        asm.add_grid_rows(&d, &vec![0.0; n], &vec![1.0; n]);
    }
    asm.add_cone(spec)?;
    let origin = vec![0.0; spec.grid.dim()];
    anchor(asm.finish()?, spec.grid.nearest_node(&origin), 0.0)
}

/// `∫ ½u_x² + f u` on a 1D grid with zero Dirichlet data.
pub fn build_custom_1d(spec: &ProblemSpec) -> Result<QpProblem> {
    spec.validate()?;
    let f = spec.target_values();
    let n = spec.grid.node_count();
    let w = quadrature_weights(&spec.grid, spec.quadrature).weights;
    let mut asm = Assembly::new(spec, vec![]);
    let (m, s) = gradient_block(&spec.grid)?;
    asm.add_p(&m, s);
    for k in 0..n {
        asm.q[k] += w[k] * f[k];
    }
    asm.rows.push(&[(0, 1.0)], 0.0, 0.0);
    asm.rows.push(&[(n - 1, 1.0)], 0.0, 0.0);
    asm.add_cone(spec)?;
    asm.finish()
}

/// Adds the equality row `u_node = value`.
pub fn anchor(mut qp: QpProblem, node: usize, value: f64) -> Result<QpProblem> {
    if node >= qp.layout.grid_vars {
        return Err(Error::InvalidArgument(format!(
            "anchor node {node} out of range for {} grid values",
            qp.layout.grid_vars
        )));
    }
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("anchor value {value} is not finite")));
    }
    let row = SparseMatrix::from_triplets(1, qp.num_vars(), &[(0, node, 1.0)])?;
    qp.push_rows(&row, &[value], &[value])?;
    Ok(qp)
}

pub fn build(spec: &ProblemSpec) -> Result<QpProblem> {
    match spec.kind {
        ProblemKind::Projection => build_projection(spec),
        ProblemKind::RochetChone => build_rochet_chone(spec),
        ProblemKind::Monopolist => build_monopolist(spec),
        ProblemKind::MonopolistVariant => build_monopolist_variant(spec),
        ProblemKind::ConvexEnvelope => build_envelope(spec),
        ProblemKind::Custom1dSource => build_custom_1d(spec),
    }
}

/// Grid block of a solution vector.
pub fn grid_part(spec: &ProblemSpec, x: &[f64]) -> Result<GridFunction> {
    let n = spec.grid.node_count();
    if x.len() < n {
        return Err(Error::InvalidArgument(format!("{} values for {n} grid nodes", x.len())));
    }
    GridFunction::new(spec.grid.clone(), x[..n].to_vec())
}

/// Sum over grid edges of `h^dim ((u_b - u_a)/h)²`.
fn dirichlet_energy(grid: &Grid, u: &[f64]) -> f64 {
    let h = grid.h();
    let s = h.powi(grid.dim() as i32) / (h * h);
    let mut e = 0.0;
    for k in 0..grid.node_count() {
        for (di, dj) in [(1, 0), (0, 1)] {
            if let Some(m) = grid.offset(k, di, dj) {
                e += s * (u[m] - u[k]).powi(2);
            }
        }
    }
    e
}

/// Centered derivative of `u` along axis `d` at node `k`, one-sided at the ends.
fn centered(grid: &Grid, u: &[f64], k: usize, d: usize) -> f64 {
    let (di, dj) = if d == 0 { (1, 0) } else { (0, 1) };
    let h = grid.h();
    match (grid.offset(k, -di, -dj), grid.offset(k, di, dj)) {
        (Some(a), Some(b)) => (u[b] - u[a]) / (2.0 * h),
        (None, Some(b)) => (u[b] - u[k]) / h,
        (Some(a), None) => (u[k] - u[a]) / h,
        (None, None) => 0.0,
    }
}

/// The discrete functional of `spec` evaluated directly at grid values `u`,
/// including dropped constants. Constraints are not checked.
pub fn evaluate_functional(spec: &ProblemSpec, u: &[f64]) -> Result<f64> {
    spec.validate()?;
    let grid = &spec.grid;
    if u.len() != grid.node_count() {
        return Err(Error::InvalidArgument(format!("{} values for {} nodes", u.len(), grid.node_count())));
    }
    let w = quadrature_weights(grid, spec.quadrature).weights;
    let screening = |u: &[f64]| -> f64 {
        (0..u.len())
            .map(|k| {
                let x = grid.point(k);
                let dot: f64 = (0..grid.dim()).map(|d| centered(grid, u, k, d) * x[d]).sum();
                w[k] * (u[k] - dot)
            })
            .sum()
    };
    Ok(match spec.kind {
        ProblemKind::Projection | ProblemKind::ConvexEnvelope => {
            let g = spec.target_values();
            let diff: Vec<f64> = u.iter().zip(g).map(|(a, b)| a - b).collect();
            match spec.norm.unwrap_or(Norm::L2) {
                Norm::L2 => diff.iter().zip(&w).map(|(d, wk)| wk * d * d).sum(),
                Norm::L1 => diff.iter().zip(&w).map(|(d, wk)| wk * d.abs()).sum(),
                Norm::Linf => diff.iter().fold(0.0, |m, d| m.max(d.abs())),
                Norm::H1 | Norm::H1Zero | Norm::H1Gradbox => dirichlet_energy(grid, &diff),
            }
        }
        ProblemKind::Monopolist | ProblemKind::RochetChone => {
            let c = if spec.kind == ProblemKind::RochetChone { 1.0 } else { spec.c };
            0.5 * c * dirichlet_energy(grid, u) + screening(u)
        }
        ProblemKind::MonopolistVariant => screening(u),
        ProblemKind::Custom1dSource => {
            let f = spec.target_values();
            0.5 * dirichlet_energy(grid, u) + (0..u.len()).map(|k| w[k] * f[k] * u[k]).sum::<f64>()
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrid {
    n: usize,
    bounds: Vec<[f64; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileParams {
    c: Option<f64>,
    strictness_weight: Option<f64>,
    alpha: Option<f64>,
    theta: Option<f64>,
}

/// On-disk problem description.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    kind: ProblemKind,
    norm: Option<Norm>,
    grid: FileGrid,
    #[serde(default = "default_width")]
    width: usize,
    #[serde(default = "default_cone")]
    cone: ConeKind,
    #[serde(default)]
    quadrature: QuadratureRule,
    /// CSV of nodal values, relative to the spec file.
    target_csv: Option<String>,
    /// Name of a builtin target, as an alternative to `target_csv`.
    target: Option<String>,
    #[serde(default)]
    params: FileParams,
}

fn default_width() -> usize {
    1
}

fn default_cone() -> ConeKind {
    ConeKind::Outer
}

impl ProblemSpec {
    /// Parses a JSON spec; `target_csv` paths are resolved against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let f: ProblemFile = serde_json::from_str(text)?;
        let bounds: Vec<(f64, f64)> = f.grid.bounds.iter().map(|b| (b[0], b[1])).collect();
        let grid = Grid::new(&bounds, f.grid.n)?;
        let params = TargetParams {
            c: f.params.c.unwrap_or(1.0),
            alpha: f.params.alpha.unwrap_or(TargetParams::default().alpha),
            theta: f.params.theta.unwrap_or(TargetParams::default().theta),
        };
        let target = match (&f.target_csv, &f.target) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidSpec("give either target_csv or target, not both".into()));
            }
            (Some(p), None) => {
                let text = std::fs::read_to_string(base_dir.join(p))?;
                Some(GridFunction::from_csv(grid.clone(), &text)?)
            }
            (None, Some(name)) => Some(sample(&grid, targets::builtin(name, params)?)?),
            (None, None) => None,
        };
        let spec = Self {
            kind: f.kind,
            norm: f.norm,
            target,
            grid,
            width: f.width,
            cone: f.cone,
            quadrature: f.quadrature,
            c: params.c,
            strictness_weight: f.params.strictness_weight.unwrap_or(0.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
