//! Compact homogeneous models: circle, flat 2-torus, round 2-sphere.
//!
//! Points use intrinsic angle coordinates. Every model carries its
//! dimension, total measure, diameter and the dimension of its isometry
//! group.

mod grid;
pub mod legendre;
mod spectrum;
mod weyl;

pub use grid::{reference_grid, reference_grid_with_resolution, GridLayout, ReferenceGrid, MAX_GRID_NODES};
pub use spectrum::{count_eigenvalues, enumerate_spectrum, EigenIndex, EigenLabel, Parity, Spectrum};
pub use weyl::{weyl_fit, WeylFit};

use crate::error::{domain, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Circle,
    Torus2,
    Sphere2,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Circle, ModelKind::Torus2, ModelKind::Sphere2];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Circle => "circle",
            ModelKind::Torus2 => "torus2",
            ModelKind::Sphere2 => "sphere2",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "circle" | "s1" => Ok(ModelKind::Circle),
            "torus" | "torus2" | "t2" => Ok(ModelKind::Torus2),
            "sphere" | "sphere2" | "s2" => Ok(ModelKind::Sphere2),
            other => domain(format!("unknown model '{other}'")),
        }
    }
}

/// A point in intrinsic coordinates.
///
/// Circle uses `a` only. Torus uses `(a, b)` as two angles. Sphere uses
/// `a` as colatitude in [0, pi] and `b` as longitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub a: f64,
    pub b: f64,
}

impl Point {
    pub fn circle(theta: f64) -> Self {
        Point { a: theta, b: 0.0 }
    }

    pub fn torus(x1: f64, x2: f64) -> Self {
        Point { a: x1, b: x2 }
    }

    pub fn sphere(colatitude: f64, longitude: f64) -> Self {
        Point { a: colatitude, b: longitude }
    }

    /// Unit vector of a sphere point.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.a.sin_cos();
        let (sp, cp) = self.b.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / r).clamp(-1.0, 1.0);
        Point { a: z.acos(), b: wrap_angle(v[1].atan2(v[0])) }
    }
}

/// Reduce an angle to [0, 2 pi).
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Distance between two angles on the unit circle.
pub fn circle_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Signed representative of x - y in [-pi, pi).
pub fn signed_gap(x: f64, y: f64) -> f64 {
    (x - y + PI).rem_euclid(TAU) - PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    kind: ModelKind,
}

impl ManifoldModel {
    pub fn new(kind: ModelKind) -> Self {
        ManifoldModel { kind }
    }

    pub fn circle() -> Self {
        Self::new(ModelKind::Circle)
    }

    pub fn torus2() -> Self {
        Self::new(ModelKind::Torus2)
    }

    pub fn sphere2() -> Self {
        Self::new(ModelKind::Sphere2)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Topological dimension s.
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Circle => 1,
            ModelKind::Torus2 | ModelKind::Sphere2 => 2,
        }
    }

    pub fn mu_total(&self) -> f64 {
        match self.kind {
            ModelKind::Circle => TAU,
            ModelKind::Torus2 => TAU * TAU,
            ModelKind::Sphere2 => 4.0 * PI,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            ModelKind::Circle | ModelKind::Sphere2 => PI,
            ModelKind::Torus2 => PI * 2f64.sqrt(),
        }
    }

    /// Dimension of the isometry group acting transitively.
    pub fn group_dim(&self) -> usize {
        match self.kind {
            ModelKind::Circle => 1,
            ModelKind::Torus2 => 2,
            ModelKind::Sphere2 => 3,
        }
    }

    /// Validate and canonicalise a point.
    pub fn normalize(&self, p: Point) -> Result<Point> {
        if !p.a.is_finite() || !p.b.is_finite() {
            return domain("point coordinates must be finite");
        }
        match self.kind {
            ModelKind::Circle => Ok(Point::circle(wrap_angle(p.a))),
            ModelKind::Torus2 => Ok(Point::torus(wrap_angle(p.a), wrap_angle(p.b))),
            ModelKind::Sphere2 => {
                if !(0.0..=PI).contains(&p.a) {
                    return domain(format!("colatitude {} outside [0, pi]", p.a));
                }
                Ok(Point::sphere(p.a, wrap_angle(p.b)))
            }
        }
    }

    /// Geodesic distance. Symmetric, zero on the diagonal, at most the diameter.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match self.kind {
            ModelKind::Circle => circle_gap(x.a, y.a),
            ModelKind::Torus2 => {
                let d1 = circle_gap(x.a, y.a);
                let d2 = circle_gap(x.b, y.b);
                (d1 * d1 + d2 * d2).sqrt()
            }
            ModelKind::Sphere2 => sphere_angle(&x.unit_vector(), &y.unit_vector()),
        }
    }

    /// Point at geodesic distance `d` from `x` in direction `azimuth`.
    pub fn point_at_distance(&self, x: &Point, d: f64, azimuth: f64) -> Point {
        match self.kind {
            ModelKind::Circle => {
                let sign = if azimuth.cos() >= 0.0 { 1.0 } else { -1.0 };
                Point::circle(wrap_angle(x.a + sign * d))
            }
            ModelKind::Torus2 => {
                Point::torus(wrap_angle(x.a + d * azimuth.cos()), wrap_angle(x.b + d * azimuth.sin()))
            }
            ModelKind::Sphere2 => {
                let u = x.unit_vector();
                let (e1, e2) = tangent_frame(x);
                let (sa, ca) = azimuth.sin_cos();
                let (sd, cd) = d.sin_cos();
                let v = [
                    cd * u[0] + sd * (ca * e1[0] + sa * e2[0]),
                    cd * u[1] + sd * (ca * e1[1] + sa * e2[1]),
                    cd * u[2] + sd * (ca * e1[2] + sa * e2[2]),
                ];
                Point::from_unit_vector(v)
            }
        }
    }

    /// Point drawn from the normalised Riemannian measure.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.kind {
            ModelKind::Circle => Point::circle(rng.random::<f64>() * TAU),
            ModelKind::Torus2 => Point::torus(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU),
            ModelKind::Sphere2 => {
                let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
                Point::sphere(z.clamp(-1.0, 1.0).acos(), rng.random::<f64>() * TAU)
            }
        }
    }

    /// Measure of a geodesic ball of radius `r` (r below the injectivity radius).
    pub fn ball_measure(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Circle => 2.0 * r.min(PI),
            ModelKind::Torus2 => PI * r * r,
            ModelKind::Sphere2 => TAU * (1.0 - r.min(PI).cos()),
        }
    }
}

/// Angle between two unit vectors, stable near 0 and pi.
pub fn sphere_angle(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    cross.atan2(dot)
}

/// Orthonormal tangent frame at a sphere point.
fn tangent_frame(x: &Point) -> ([f64; 3], [f64; 3]) {
    let u = x.unit_vector();
    let helper = if u[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let mut e1 = [
        helper[1] * u[2] - helper[2] * u[1],
        helper[2] * u[0] - helper[0] * u[2],
        helper[0] * u[1] - helper[1] * u[0],
    ];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|c| *c /= n);
    let e2 = [
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ];
    (e1, e2)
}
