//! Planar geometry: points, distances, AP bearings and circular arithmetic.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};

/// Below this separation (meters) a bearing is undefined.
pub const COINCIDENCE_TOL_M: f64 = 1e-12;

/// A location in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.x * factor, self.y * factor)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// An angle in radians, always held in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps any finite value into `[0, 2π)`.
    pub fn from_radians(value: f64) -> Self {
        let mut v = value.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if v >= TAU {
            v = 0.0;
        }
        Angle(v)
    }

    pub fn from_degrees(value: f64) -> Self {
        Self::from_radians(degrees_to_radians(value))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// Euclidean distance between two points.
pub fn distance(p: Point, q: Point) -> f64 {
    (q.x - p.x).hypot(q.y - p.y)
}

/// Direction in which `observer` sees `target`, counterclockwise from +x.
///
/// The result satisfies `cos φ = (x_t − x_o)/d` and `sin φ = (y_t − y_o)/d`.
pub fn bearing(observer: Point, target: Point) -> Result<Angle> {
    let d = distance(observer, target);
    if !(d >= COINCIDENCE_TOL_M) {
        return Err(Error::DegenerateGeometry(format!(
            "bearing from {observer} to {target} is undefined (separation {d:e} m)"
        )));
    }
    Ok(Angle::from_radians(
        (target.y - observer.y).atan2(target.x - observer.x),
    ))
}

/// `deg.to_radians()`, nudged by a few ulps when that makes the conversion
/// back to degrees reproduce `deg` exactly. Keeps printed degree values
/// stable across a write/read cycle.
pub fn degrees_to_radians(deg: f64) -> f64 {
    let r = deg.to_radians();
    if !r.is_finite() || r.to_degrees() == deg {
        return r;
    }
    let (mut up, mut down) = (r, r);
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        for c in [up, down] {
            if c.to_degrees() == deg {
                return c;
            }
        }
    }
    r
}

/// Signed minimal difference `a − b`, in `(−π, π]`.
///
/// An exact half-turn resolves to `+π`.
pub fn angular_diff(a: Angle, b: Angle) -> f64 {
    let r = (a.0 - b.0).rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Mean direction of a set of angles (argument of the mean unit vector).
///
/// Returns `None` for an empty set or when the resultant vanishes.
pub fn circular_mean(angles: impl IntoIterator<Item = Angle>) -> Option<Angle> {
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for a in angles {
        s += a.0.sin();
        c += a.0.cos();
        n += 1;
    }
    if n == 0 || s.hypot(c) < 1e-12 * n as f64 {
        return None;
    }
    Some(Angle::from_radians(s.atan2(c)))
}
