//! Integer direction sets for wide-stencil convexity constraints.
//!
//! A width-`w` stencil in 2D uses every coprime integer vector `(p, q)` with
//! `max(|p|, |q|) <= w`. `v` and `-v` give the same symmetric second
//! difference, so each line is stored once with `p > 0`, or `p = 0, q = 1`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub p: i64,
    pub q: i64,
}

impl Direction {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::InvalidArgument("zero direction".into()));
        }
        Ok(Self { p, q }.canonical())
    }

    /// Representative of the line through `±(p, q)` with `p > 0` or `(0, 1)`.
    pub fn canonical(self) -> Self {
        if self.p < 0 || (self.p == 0 && self.q < 0) {
            Self { p: -self.p, q: -self.q }
        } else {
            self
        }
    }

    pub fn norm(&self) -> f64 {
        ((self.p * self.p + self.q * self.q) as f64).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        (self.p * self.p + self.q * self.q) as f64
    }

    /// Angle of the line in `[0, π)`.
    pub fn line_angle(&self) -> f64 {
        let a = (self.q as f64).atan2(self.p as f64);
        if a < 0.0 {
            a + PI
        } else {
            a
        }
    }

    pub fn width(&self) -> i64 {
        self.p.abs().max(self.q.abs())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Direction set of the given width. Directions of width `k` come after all
/// those of width `< k`; within a width they are ordered by line angle.
pub fn directions(width: usize, dim: usize) -> Result<Vec<Direction>> {
    if width < 1 {
        return Err(Error::InvalidArgument("stencil width must be at least 1".into()));
    }
    match dim {
        1 => Ok(vec![Direction { p: 1, q: 0 }]),
        2 => {
            let mut out = Vec::new();
            for k in 1..=width as i64 {
                let mut ring: Vec<Direction> = (0..=k)
                    .flat_map(|p| (-k..=k).map(move |q| Direction { p, q }))
                    .filter(|d| d.width() == k && gcd(d.p, d.q) == 1)
                    .filter(|d| *d == d.canonical())
                    .collect();
                ring.sort_by(|a, b| a.line_angle().total_cmp(&b.line_angle()));
                out.extend(ring);
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!("unsupported dimension {dim}"))),
    }
}

/// Largest angle between any unit vector and its nearest stencil line: half
/// of the widest gap between consecutive line angles modulo π. Zero in 1D.
pub fn directional_resolution(dim: usize, dirs: &[Direction]) -> Result<f64> {
    if dirs.is_empty() {
        return Err(Error::InvalidArgument("empty direction set".into()));
    }
    if dim == 1 {
        return Ok(0.0);
    }
    let mut angles: Vec<f64> = dirs.iter().map(Direction::line_angle).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let wrap = angles[0] + PI - angles[angles.len() - 1];
    let gap = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    Ok(gap / 2.0)
}

/// `tan²(dθ)`: the worst eigenvalue ratio the directional constraints admit.
pub fn convexity_threshold(dtheta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&dtheta) {
        return Err(Error::OutOfValidity(dtheta));
    }
    Ok(dtheta.tan().powi(2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilSet {
    pub dim: usize,
    pub width: usize,
    pub directions: Vec<Direction>,
    pub dtheta: f64,
    pub tan2_dtheta: f64,
}

impl StencilSet {
    pub fn new(width: usize, dim: usize) -> Result<Self> {
        let dirs = directions(width, dim)?;
        let mut s = Self::from_directions(dim, dirs)?;
        s.width = width;
        Ok(s)
    }

    /// A set from an explicit direction list (e.g. axes only).
    pub fn from_directions(dim: usize, dirs: Vec<Direction>) -> Result<Self> {
        let dtheta = directional_resolution(dim, &dirs)?;
        let tan2_dtheta = convexity_threshold(dtheta)?;
        let width = dirs.iter().map(|d| d.width()).max().unwrap_or(1) as usize;
        Ok(Self { dim, width, directions: dirs, dtheta, tan2_dtheta })
    }

    pub fn axes() -> Self {
        Self::from_directions(2, vec![Direction { p: 1, q: 0 }, Direction { p: 0, q: 1 }])
            .expect("axes have resolution pi/4")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn set(v: &[(i64, i64)]) -> HashSet<Direction> {
        v.iter().map(|&(p, q)| Direction::new(p, q).unwrap()).collect()
    }

    #[test]
    fn width_one_and_two() {
        let w1: HashSet<_> = directions(1, 2).unwrap().into_iter().collect();
        assert_eq!(w1, set(&[(1, 0), (0, 1), (1, 1), (1, -1)]));
        let w2: HashSet<_> = directions(2, 2).unwrap().into_iter().collect();
        let added: HashSet<_> = w2.difference(&w1).copied().collect();
        assert_eq!(added, set(&[(2, 1), (1, 2), (2, -1), (1, -2)]));
    }

    #[test]
    fn width_three_additions() {
        let w2: HashSet<_> = directions(2, 2).unwrap().into_iter().collect();
        let w3: HashSet<_> = directions(3, 2).unwrap().into_iter().collect();
        let added: HashSet<_> = w3.difference(&w2).copied().collect();
        assert_eq!(
            added,
            set(&[(1, 3), (3, 1), (2, 3), (3, 2), (-1, 3), (-3, 1), (-2, 3), (-3, 2)])
        );
        assert!(!w3.contains(&Direction { p: 2, q: 2 }));
    }

    #[test]
    fn resolution_values() {
        let r1 = directional_resolution(2, &directions(1, 2).unwrap()).unwrap();
        assert!((r1 - PI / 8.0).abs() < 1e-15);
        let axes = [Direction { p: 1, q: 0 }, Direction { p: 0, q: 1 }];
        assert!((directional_resolution(2, &axes).unwrap() - FRAC_PI_4).abs() < 1e-15);
        let r2 = directional_resolution(2, &directions(2, 2).unwrap()).unwrap();
        assert!((r2 - 0.5f64.atan() / 2.0).abs() < 1e-12);
        assert_eq!(directional_resolution(1, &directions(3, 1).unwrap()).unwrap(), 0.0);
        assert!(directional_resolution(2, &[]).is_err());
    }

    #[test]
    fn threshold_values() {
        let t1 = convexity_threshold(PI / 8.0).unwrap();
        assert!((t1 - 0.171_572_875_253_809_9).abs() < 1e-12);
        assert_eq!(convexity_threshold(0.0).unwrap(), 0.0);
        let d4 = directional_resolution(2, &directions(4, 2).unwrap()).unwrap();
        assert!((convexity_threshold(d4).unwrap() - 0.015).abs() < 0.001);
        assert!(matches!(convexity_threshold(0.8), Err(Error::OutOfValidity(_))));
    }

    #[test]
    fn bad_arguments() {
        assert!(directions(0, 2).is_err());
        assert!(directions(1, 3).is_err());
        assert!(Direction::new(0, 0).is_err());
    }
}
