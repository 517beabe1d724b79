//! Uniform 1D/2D grids and functions sampled on them.
//!
//! Nodes are numbered row-major with `x` varying fastest: node `k` in 2D is
//! `(i, j) = (k % n, k / n)` with coordinates `(a + i h, c + j h)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    dim: usize,
    bounds: Vec<(f64, f64)>,
    n: usize,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    dim: usize,
    n: usize,
    bounds: Vec<[f64; 2]>,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        if r.bounds.len() != r.dim {
            return Err(Error::InvalidGrid(format!(
                "{} bounds given for a {}-dimensional grid",
                r.bounds.len(),
                r.dim
            )));
        }
        let b: Vec<(f64, f64)> = r.bounds.iter().map(|b| (b[0], b[1])).collect();
        Grid::new(&b, r.n)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr { dim: g.dim, n: g.n, bounds: g.bounds.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl Grid {
    /// A grid over the product of `bounds` with `n` nodes per axis.
    ///
    /// Both axes of a 2D grid must have the same length so the spacing is shared.
    pub fn new(bounds: &[(f64, f64)], n: usize) -> Result<Self> {
        let dim = bounds.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not supported")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes per axis, got {n}")));
        }
        for &(a, b) in bounds {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidGrid(format!("bad interval [{a}, {b}]")));
            }
        }
        let len = bounds[0].1 - bounds[0].0;
        if dim == 2 {
            let len_y = bounds[1].1 - bounds[1].0;
            if ((len - len_y) / len).abs() > 1e-12 {
                return Err(Error::InvalidGrid("2D grids must have equal side lengths".into()));
            }
        }
        Ok(Self { dim, bounds: bounds.to_vec(), n, h: len / (n - 1) as f64 })
    }

    pub fn new_1d(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&[(a, b)], n)
    }

    pub fn new_2d(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&[(a, b), (a, b)], n)
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new_2d(0.0, 1.0, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    /// Node index of multi-index `(i, j)`; `j` is ignored in 1D.
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            j * self.n + i
        }
    }

    pub fn multi_index(&self, k: usize) -> (usize, usize) {
        if self.dim == 1 {
            (k, 0)
        } else {
            (k % self.n, k / self.n)
        }
    }

    /// Node reached from `k` by the integer offset `(di, dj)`, if it stays inside.
    pub fn offset(&self, k: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.multi_index(k);
        let n = self.n as i64;
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if ni < 0 || ni >= n {
            return None;
        }
        if self.dim == 1 {
            return (dj == 0).then_some(ni as usize);
        }
        if nj < 0 || nj >= n {
            return None;
        }
        Some(self.index(ni as usize, nj as usize))
    }

    /// Coordinates of node `k` (length `dim`).
    pub fn point(&self, k: usize) -> Vec<f64> {
        let (i, j) = self.multi_index(k);
        let x = self.bounds[0].0 + i as f64 * self.h;
        if self.dim == 1 {
            vec![x]
        } else {
            vec![x, self.bounds[1].0 + j as f64 * self.h]
        }
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.multi_index(k);
        let last = self.n - 1;
        i == 0 || i == last || (self.dim == 2 && (j == 0 || j == last))
    }

    /// Node closest to `p`, with `p` clamped into the domain.
    pub fn nearest_node(&self, p: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim)
            .map(|d| {
                let (a, b) = self.bounds[d];
                let t = ((p[d].clamp(a, b) - a) / self.h).round() as usize;
                t.min(self.n - 1)
            })
            .collect();
        self.index(idx[0], idx.get(1).copied().unwrap_or(0))
    }
}

/// Real values at the nodes of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sampling { node, value });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.node_count();
        Self { grid, values: vec![0.0; n] }
    }

    /// One value per line under a `value` header, shortest round-trip decimal form.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 20 + 6);
        s.push_str("value\n");
        for v in &self.values {
            writeln!(s, "{v:?}").unwrap();
        }
        s
    }

    pub fn from_csv(grid: Grid, text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some("value") => {}
            other => return Err(Error::Parse(format!("expected header 'value', found {other:?}"))),
        }
        let values = lines
            .enumerate()
            .map(|(i, l)| l.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid functions always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let gf: GridFunction = serde_json::from_str(text)?;
        Self::new(gf.grid, gf.values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }
}

/// Samples `f` at every node.
pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<GridFunction> {
    let mut values = Vec::with_capacity(grid.node_count());
    for k in 0..grid.node_count() {
        let v = f(&grid.point(k));
        if !v.is_finite() {
            return Err(Error::Sampling { node: k, value: v });
        }
        values.push(v);
    }
    Ok(GridFunction { grid: grid.clone(), values })
}
