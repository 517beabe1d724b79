//! Derived data for plotting: gradient maps, gradient histograms and contour lines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::gradient_operators;
use crate::grid::GridFunction;

/// Centered-difference gradient at every node, one row per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSamples {
    pub points: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<f64>>,
}

pub fn gradient_samples(u: &GridFunction) -> Result<GradientSamples> {
    let ops = gradient_operators(&u.grid)?;
    let parts: Vec<Vec<f64>> = ops.iter().map(|d| d.mul_vec(&u.values)).collect();
    let n = u.values.len();
    Ok(GradientSamples {
        points: (0..n).map(|k| u.grid.point(k)).collect(),
        gradients: (0..n).map(|k| parts.iter().map(|p| p[k]).collect()).collect(),
    })
}

impl GradientSamples {
    /// Columns `x[,y],du_dx[,du_dy]`.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(1, Vec::len);
        let mut s = String::new();
        s.push_str(if dim == 1 { "x,du_dx\n" } else { "x,y,du_dx,du_dy\n" });
        for (p, g) in self.points.iter().zip(&self.gradients) {
            let row: Vec<String> = p.iter().chain(g).map(|v| format!("{v:?}")).collect();
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }
}

/// Counts of 2D gradients on a regular grid of bins over `[0, 1]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientHistogram {
    pub bins: usize,
    pub range: [f64; 2],
    /// `counts[by][bx]`.
    pub counts: Vec<Vec<usize>>,
    /// Gradients outside the binned square.
    pub outside: usize,
}

pub fn gradient_histogram(samples: &GradientSamples, bins: usize) -> Result<GradientHistogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let mut counts = vec![vec![0; bins]; bins];
    let mut outside = 0;
    let slack = 1e-9;
    for g in &samples.gradients {
        if g.len() != 2 {
            return Err(Error::InvalidArgument("histograms need 2D gradients".into()));
        }
        let (gx, gy) = (g[0], g[1]);
        if !(-slack..=1.0 + slack).contains(&gx) || !(-slack..=1.0 + slack).contains(&gy) {
            outside += 1;
            continue;
        }
        let bin = |v: f64| ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[bin(gy)][bin(gx)] += 1;
    }
    Ok(GradientHistogram { bins, range: [0.0, 1.0], counts, outside })
}

/// Nodes split by the shape of the gradient map near them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradientRegimes {
    /// Gradient within `tol` of a single point (the most common value).
    pub point: usize,
    /// Exactly one gradient component agrees with the point: axis-aligned lines through it.
    pub segment: usize,
    pub spread: usize,
}

/// Classifies interior gradients into a point mass, segments through it, and the rest.
pub fn gradient_regimes(u: &GridFunction, tol: f64) -> Result<GradientRegimes> {
    let s = gradient_samples(u)?;
    let interior: Vec<&Vec<f64>> =
        (0..s.gradients.len()).filter(|&k| !u.grid.is_boundary(k)).map(|k| &s.gradients[k]).collect();
    if interior.is_empty() || interior[0].len() != 2 {
        return Err(Error::InvalidArgument("regimes need a 2D grid with interior nodes".into()));
    }
    // the mode: the interior gradient with the most neighbours within tol
    let near = |a: &[f64], b: &[f64]| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;
    let mode = interior
        .iter()
        .max_by_key(|a| interior.iter().filter(|b| near(a, b)).count())
        .expect("nonempty");
    let mut r = GradientRegimes { point: 0, segment: 0, spread: 0 };
    for g in &interior {
        if near(g, mode) {
            r.point += 1;
        } else if (g[0] - mode[0]).abs() <= tol || (g[1] - mode[1]).abs() <= tol {
            r.segment += 1;
        } else {
            r.spread += 1;
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourLevel {
    pub level: f64,
    /// Line segments `[[x0, y0], [x1, y1]]`.
    pub segments: Vec<[[f64; 2]; 2]>,
}

/// `count` evenly spaced levels strictly inside the value range.
pub fn contour_levels(u: &GridFunction, count: usize) -> Vec<f64> {
    let lo = u.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![];
    }
    (1..=count).map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64).collect()
}

/// Marching squares on a 2D grid function.
pub fn contour_lines(u: &GridFunction, levels: &[f64]) -> Result<Vec<ContourLevel>> {
    let g = &u.grid;
    if g.dim() != 2 {
        return Err(Error::InvalidArgument("contours need a 2D grid".into()));
    }
    let n = g.n();
    let v = |i: usize, j: usize| u.values[g.index(i, j)];
    let p = |i: usize, j: usize| {
        let q = g.point(g.index(i, j));
        [q[0], q[1]]
    };
    let lerp = |a: [f64; 2], b: [f64; 2], fa: f64, fb: f64, c: f64| {
        let t = (c - fa) / (fb - fa);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    let mut out = Vec::with_capacity(levels.len());
    for &c in levels {
        let mut segments = Vec::new();
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                // corners counter-clockwise from (i, j)
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let f: Vec<f64> = corners.iter().map(|&(a, b)| v(a, b)).collect();
                let pts: Vec<[f64; 2]> = corners.iter().map(|&(a, b)| p(a, b)).collect();
                let mut cross = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (e, (e + 1) % 4);
                    if (f[a] < c) != (f[b] < c) {
                        cross.push(lerp(pts[a], pts[b], f[a], f[b], c));
                    }
                }
                match cross.len() {
                    2 => segments.push([cross[0], cross[1]]),
                    4 => {
                        // saddle: pair edges by the cell-centre value
                        let centre = f.iter().sum::<f64>() / 4.0;
                        if (centre < c) == (f[0] < c) {
                            segments.push([cross[0], cross[3]]);
                            segments.push([cross[1], cross[2]]);
                        } else {
                            segments.push([cross[0], cross[1]]);
                            segments.push([cross[2], cross[3]]);
                        }
                    }
                    _ => {}
                }
            }
        }
        out.push(ContourLevel { level: c, segments });
    }
    Ok(out)
}
