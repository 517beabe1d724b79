//! Named test functions used as projection targets and source terms.

use std::f64::consts::PI;

use crate::analytic::rotated_quadratic;
use crate::error::{Error, Result};

fn y(p: &[f64]) -> f64 {
    p.get(1).copied().unwrap_or(0.0)
}

/// `-(4 + 5 x y²) exp(-30 ((x - 1/2)² + (y - 1/2)²))`
pub fn spiky(p: &[f64]) -> f64 {
    let (x, y) = (p[0], y(p));
    -(4.0 + 5.0 * x * y * y) * bump_raw(x, y)
}

fn bump_raw(x: f64, y: f64) -> f64 {
    (-30.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp()
}

/// `exp(-30 ((x - 1/2)² + (y - 1/2)²))`
pub fn bump(p: &[f64]) -> f64 {
    bump_raw(p[0], y(p))
}

/// `-exp(-30 ((x - 1/2)² + (y - 1/2)²))`, the exponential factor of [`spiky`].
pub fn neg_bump(p: &[f64]) -> f64 {
    -bump_raw(p[0], y(p))
}

pub fn sin_pi(p: &[f64]) -> f64 {
    (PI * p[0]).sin()
}

pub fn sin_2pi(p: &[f64]) -> f64 {
    (2.0 * PI * p[0]).sin()
}

pub fn xy(p: &[f64]) -> f64 {
    p[0] * y(p)
}

pub fn abs_x_minus_3y(p: &[f64]) -> f64 {
    (p[0] - 3.0 * y(p)).abs()
}

pub fn x_minus_3y_squared(p: &[f64]) -> f64 {
    (p[0] - 3.0 * y(p)).powi(2)
}

pub fn neg_x_squared(p: &[f64]) -> f64 {
    -p[0] * p[0]
}

/// Step source: `-c` for `x < 0`, `+c` for `x > 0`, `0` at the jump.
pub fn step(c: f64) -> impl Fn(&[f64]) -> f64 {
    move |p| c * p[0].signum() * f64::from(p[0] != 0.0)
}

/// Parameters for the parametrized builtins.
#[derive(Clone, Copy, Debug)]
pub struct TargetParams {
    pub alpha: f64,
    pub theta: f64,
    pub c: f64,
}

impl Default for TargetParams {
    fn default() -> Self {
        Self { alpha: -0.5, theta: 0.0, c: 1.0 }
    }
}

pub const NAMES: &[&str] = &[
    "zero",
    "sin_pi",
    "sin_2pi",
    "spiky",
    "bump",
    "neg_bump",
    "rotated",
    "xy",
    "abs_x_minus_3y",
    "x_minus_3y_sq",
    "neg_x2",
    "step",
];

/// Looks up a builtin by name.
pub fn builtin(name: &str, params: TargetParams) -> Result<Box<dyn Fn(&[f64]) -> f64>> {
    let f: Box<dyn Fn(&[f64]) -> f64> = match name {
        "zero" => Box::new(|_| 0.0),
        "sin_pi" => Box::new(sin_pi),
        "sin_2pi" => Box::new(sin_2pi),
        "spiky" => Box::new(spiky),
        "bump" => Box::new(bump),
        "neg_bump" => Box::new(neg_bump),
        "rotated" => {
            Box::new(move |p: &[f64]| rotated_quadratic(params.alpha, params.theta, p[0], y(p)))
        }
        "xy" => Box::new(xy),
        "abs_x_minus_3y" => Box::new(abs_x_minus_3y),
        "x_minus_3y_sq" => Box::new(x_minus_3y_squared),
        "neg_x2" => Box::new(neg_x_squared),
        "step" => Box::new(step(params.c)),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown target '{other}', expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}
