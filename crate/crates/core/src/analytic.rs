//! Closed-form reference solutions and brute-force oracles.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// One-parameter family of candidate minimizers of
/// `∫_{-1}^{1} ½u'² + f u` with `f = -c` on `x < 0`, `+c` on `x > 0`,
/// zero boundary values and `u'' ≥ 0`: linear on `[-1, a]`, quadratic on `[a, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step1DSolution {
    pub c: f64,
    pub a: f64,
}

impl Step1DSolution {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("c must be positive, got {c}")));
        }
        if !(-1.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("a = {a} outside [-1, 1]")));
        }
        Ok(Self { c, a })
    }

    /// The minimizing member, `a = √2 - 1`.
    pub fn optimal(c: f64) -> Result<Self> {
        Self::new(c, std::f64::consts::SQRT_2 - 1.0)
    }

    /// Slope of the linear piece.
    pub fn m(&self) -> f64 {
        -self.c * (self.a - 1.0).powi(2) / 4.0
    }

    /// Second root of the quadratic piece.
    pub fn b(&self) -> f64 {
        (self.a * self.a + 2.0 * self.a - 1.0) / 2.0
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
        }
        Ok(if x <= self.a {
            self.m() * (x + 1.0)
        } else {
            self.c * (x - self.b()) * (x - 1.0) / 2.0
        })
    }

    pub fn objective(&self) -> f64 {
        let (c, a) = (self.c, self.a);
        -c * c * (a - 1.0).powi(2) * (3.0 * a * a + 10.0 * a - 1.0) / 48.0
    }
}

pub fn step1d_value(c: f64, a: f64, x: f64) -> Result<f64> {
    Step1DSolution::new(c, a)?.value(x)
}

pub fn step1d_objective(c: f64, a: f64) -> Result<f64> {
    Ok(Step1DSolution::new(c, a)?.objective())
}

/// Solution of the linear monopolist variant on `[0, 1]²` with gradients in
/// `[0, 1]²` and `u(0, 0) = 0`: `max(0, x - a, y - a, x + y - b)`.
pub struct VariantSolution;

impl VariantSolution {
    pub const A: f64 = 2.0 / 3.0;

    pub fn b() -> f64 {
        (4.0 - std::f64::consts::SQRT_2) / 3.0
    }

    /// Optimal profit `2/27 (6 + √2)`.
    pub fn value() -> f64 {
        2.0 / 27.0 * (6.0 + std::f64::consts::SQRT_2)
    }
}

pub fn variant_value(x: f64, y: f64) -> f64 {
    let a = VariantSolution::A;
    0.0f64.max(x - a).max(y - a).max(x + y - VariantSolution::b())
}

/// `(cos²θ + α sin²θ)/2 · x² + (1 - α) cosθ sinθ · xy + (α cos²θ + sin²θ)/2 · y²`
///
/// Hessian eigenvalues are `1` and `α`.
pub fn rotated_quadratic(alpha: f64, theta: f64, x: f64, y: f64) -> f64 {
    let [cxx, cxy, cyy] = rotated_quadratic_coefficients(alpha, theta);
    cxx * x * x + cxy * x * y + cyy * y * y
}

pub fn rotated_quadratic_coefficients(alpha: f64, theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    [
        (c * c + alpha * s * s) / 2.0,
        (1.0 - alpha) * c * s,
        (alpha * c * c + s * s) / 2.0,
    ]
}

/// Values at each abscissa of the lower convex hull of `points`
/// (monotone chain, then linear interpolation between hull vertices).
pub fn lower_convex_hull_1d(points: &[(f64, f64)]) -> Result<Vec<f64>> {
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("abscissae must be strictly increasing".into()));
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(points.len());
    let mut seg = 0;
    for &(x, y) in points {
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        if seg + 1 >= hull.len() || hull[seg].0 == x {
            out.push(if hull[seg].0 == x { hull[seg].1 } else { y });
            continue;
        }
        let ((x0, y0), (x1, y1)) = (hull[seg], hull[seg + 1]);
        if x == x1 {
            out.push(y1);
        } else {
            out.push(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
        }
    }
    Ok(out)
}

/// Lower convex hull of a 1D grid function.
pub fn lower_convex_hull(u: &GridFunction) -> Result<GridFunction> {
    if u.grid.dim() != 1 {
        return Err(Error::InvalidArgument("hull oracle is one-dimensional".into()));
    }
    let pts: Vec<(f64, f64)> =
        (0..u.values.len()).map(|k| (u.grid.point(k)[0], u.values[k])).collect();
    GridFunction::new(u.grid.clone(), lower_convex_hull_1d(&pts)?)
}

/// Sampled analytic step solution on a grid over `[-1, 1]`.
pub fn sample_step1d(grid: &Grid, sol: &Step1DSolution) -> Result<GridFunction> {
    let values = (0..grid.node_count())
        .map(|k| sol.value(grid.point(k)[0].clamp(-1.0, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid.clone(), values)
}
