//! Kernels K_t(x, y) = sum_l F(t^2 lambda_l) u_l(x) u_l(y).
//!
//! Evaluation goes through the addition theorem of each model, so a
//! kernel depends on a scalar distance (circle, sphere) or a
//! displacement (torus). The plain eigen-sum is kept as an oracle.

use super::profile::FilterProfile;
use crate::error::{domain, Error, Result};
use crate::manifold::{signed_gap, GridLayout, ManifoldModel, ModelKind, Point, ReferenceGrid, Spectrum};
use crate::quadrature::{cosine_series, legendre_series};
use nalgebra::DMatrix;
use std::f64::consts::{PI, TAU};

/// Coefficient counts above these limits are refused.
const MAX_CIRCLE_FREQ: usize = 20_000_000;
const MAX_TORUS_FREQ: usize = 4_000;
const MAX_SPHERE_DEGREE: usize = 200_000;

#[derive(Clone, Debug)]
enum Coeffs {
    Circle(Vec<f64>),
    Torus(DMatrix<f64>),
    Sphere(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct ZonalKernel {
    model: ManifoldModel,
    t: f64,
    profile: FilterProfile,
    lambda_cut: f64,
    coeffs: Coeffs,
    tail_estimate: f64,
}

impl ZonalKernel {
    pub fn new(model: &ManifoldModel, profile: &FilterProfile, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("kernel scale must be positive, got {t}"));
        }
        let reach = profile.support_end().unwrap_or(profile.horizon());
        if !reach.is_finite() {
            return Err(Error::Precision(format!(
                "profile '{}' has no decay, its kernel cannot be truncated",
                profile.name()
            )));
        }
        let lambda_cut = reach / (t * t);
        let f = |lam: f64| profile.eval(t * t * lam);
        let (coeffs, tail_estimate) = match model.kind() {
            ModelKind::Circle => {
                let k = lambda_cut.sqrt().floor() as usize;
                if k > MAX_CIRCLE_FREQ {
                    return Err(Error::Resource(format!("circle kernel needs {k} frequencies")));
                }
                let mut c: Vec<f64> = (0..=k).map(|j| f((j * j) as f64) / PI).collect();
                c[0] *= 0.5;
                let tail: f64 = (k + 1..=4 * k + 4).map(|j| f((j * j) as f64).abs() / PI).sum();
                (Coeffs::Circle(c), tail)
            }
            ModelKind::Torus2 => {
                let k = lambda_cut.sqrt().floor() as usize;
                if k > MAX_TORUS_FREQ {
                    return Err(Error::Resource(format!("torus kernel needs {k} frequencies per axis")));
                }
                let mut c = DMatrix::zeros(k + 1, k + 1);
                for k1 in 0..=k {
                    for k2 in 0..=k {
                        let lam = (k1 * k1 + k2 * k2) as f64;
                        if lam <= lambda_cut {
                            let w = if k1 == 0 { 1.0 } else { 2.0 } * if k2 == 0 { 1.0 } else { 2.0 };
                            c[(k1, k2)] = w * f(lam) / (TAU * TAU);
                        }
                    }
                }
                let tail: f64 = (k + 1..=2 * k + 2)
                    .map(|j| f((j * j) as f64).abs() * TAU * j as f64 / (TAU * TAU))
                    .sum();
                (Coeffs::Torus(c), tail)
            }
            ModelKind::Sphere2 => {
                let l = ((lambda_cut + 0.25).sqrt() - 0.5).floor().max(0.0) as usize;
                if l > MAX_SPHERE_DEGREE {
                    return Err(Error::Resource(format!("sphere kernel needs degree {l}")));
                }
                let c: Vec<f64> =
                    (0..=l).map(|j| f((j * (j + 1)) as f64) * (2 * j + 1) as f64 / (4.0 * PI)).collect();
                let tail: f64 = (l + 1..=2 * l + 2)
                    .map(|j| f((j * (j + 1)) as f64).abs() * (2 * j + 1) as f64 / (4.0 * PI))
                    .sum();
                (Coeffs::Sphere(c), tail)
            }
        };
        Ok(ZonalKernel { model: *model, t, profile: profile.clone(), lambda_cut, coeffs, tail_estimate })
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn profile(&self) -> &FilterProfile {
        &self.profile
    }

    /// Largest eigenvalue kept in the truncated sum.
    pub fn lambda_cut(&self) -> f64 {
        self.lambda_cut
    }

    /// Estimate of the omitted sum of |F(t^2 lambda)| sup|u|^2.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// Highest frequency or degree used.
    pub fn degree(&self) -> usize {
        match &self.coeffs {
            Coeffs::Circle(c) | Coeffs::Sphere(c) => c.len() - 1,
            Coeffs::Torus(c) => c.nrows() - 1,
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        match &self.coeffs {
            Coeffs::Circle(c) => cosine_series(c, x.a - y.a),
            Coeffs::Torus(_) => self.eval_displacement(x.a - y.a, x.b - y.b),
            Coeffs::Sphere(c) => {
                let u = x.unit_vector();
                let v = y.unit_vector();
                let z = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                legendre_series(c, z)
            }
        }
    }

    /// Kernel as a function of geodesic distance (circle and sphere).
    pub fn eval_distance(&self, d: f64) -> f64 {
        match &self.coeffs {
            Coeffs::Circle(c) => cosine_series(c, d),
            Coeffs::Sphere(c) => legendre_series(c, d.cos()),
            Coeffs::Torus(_) => self.eval_displacement(d, 0.0),
        }
    }

    /// Torus kernel at displacement (d1, d2); other models use d1 as a distance.
    pub fn eval_displacement(&self, d1: f64, d2: f64) -> f64 {
        match &self.coeffs {
            Coeffs::Torus(c) => {
                let k = c.nrows();
                let cos2: Vec<f64> = (0..k).map(|j| (j as f64 * d2).cos()).collect();
                let mut s = 0.0;
                for k1 in 0..k {
                    let row: f64 = (0..k).map(|k2| c[(k1, k2)] * cos2[k2]).sum();
                    s += row * (k1 as f64 * d1).cos();
                }
                s
            }
            _ => self.eval_distance(d1),
        }
    }

    /// K_t(x, x), the same for every x.
    pub fn diagonal(&self) -> f64 {
        match &self.coeffs {
            Coeffs::Circle(c) | Coeffs::Sphere(c) => c.iter().sum(),
            Coeffs::Torus(c) => c.iter().sum(),
        }
    }

    pub fn on_points(&self, x: &Point, ys: &[Point]) -> Vec<f64> {
        ys.iter().map(|y| self.eval(x, y)).collect()
    }

    /// Torus kernel on the product of two offset lists, rows follow `d1`.
    pub fn on_torus_offsets(&self, d1: &[f64], d2: &[f64]) -> Result<DMatrix<f64>> {
        let c = match &self.coeffs {
            Coeffs::Torus(c) => c,
            _ => return domain("product offsets apply to the torus only"),
        };
        let k = c.nrows();
        let a = DMatrix::from_fn(d1.len(), k, |i, j| (j as f64 * d1[i]).cos());
        let b = DMatrix::from_fn(k, d2.len(), |j, i| (j as f64 * d2[i]).cos());
        Ok(&a * c * &b)
    }

    /// Values K_t(x, node) for every node of a reference grid.
    pub fn on_grid(&self, x: &Point, grid: &ReferenceGrid) -> Vec<f64> {
        match (&self.coeffs, &grid.layout) {
            (Coeffs::Torus(_), GridLayout::Product { n }) => {
                let h = TAU / *n as f64;
                let d1: Vec<f64> = (0..*n).map(|i| signed_gap(h * i as f64, x.a)).collect();
                let d2: Vec<f64> = (0..*n).map(|i| signed_gap(h * i as f64, x.b)).collect();
                let m = self.on_torus_offsets(&d1, &d2).expect("torus coefficients");
                let mut out = Vec::with_capacity(n * n);
                for i in 0..*n {
                    for j in 0..*n {
                        out.push(m[(i, j)]);
                    }
                }
                out
            }
            _ => self.on_points(x, &grid.nodes),
        }
    }
}

/// Direct eigen-sum of the kernel over a loaded spectrum.
pub fn kernel_direct(spectrum: &Spectrum, profile: &FilterProfile, t: f64, x: &Point, y: &Point) -> f64 {
    let ux = spectrum.eval_all(x);
    let uy = spectrum.eval_all(y);
    spectrum
        .entries()
        .iter()
        .zip(ux.iter().zip(&uy))
        .map(|(e, (a, b))| profile.eval(t * t * e.lambda) * a * b)
        .sum()
}

/// Convenience wrapper that builds the kernel and evaluates one pair.
pub fn kernel_eval(model: &ManifoldModel, profile: &FilterProfile, t: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(ZonalKernel::new(model, profile, t)?.eval(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{enumerate_spectrum, reference_grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn addition_theorem_matches_eigen_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let prof = FilterProfile::gaussian();
        for kind in ModelKind::ALL {
            let m = ManifoldModel::new(kind);
            let t = 0.35;
            let k = ZonalKernel::new(&m, &prof, t).unwrap();
            let spec = enumerate_spectrum(&m, k.lambda_cut()).unwrap();
            for _ in 0..20 {
                let x = m.random_point(&mut rng);
                let y = m.random_point(&mut rng);
                let a = k.eval(&x, &y);
                let b = kernel_direct(&spec, &prof, t, &x, &y);
                assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn only_constant_survives_for_narrow_eta() {
        for kind in ModelKind::ALL {
            let m = ManifoldModel::new(kind);
            let k = ZonalKernel::new(&m, &FilterProfile::eta(), 2.1).unwrap();
            let v = k.eval(&Point::sphere(0.3, 0.1), &Point::sphere(1.2, 2.0));
            assert!((v - 1.0 / m.mu_total()).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_heat_kernel_matches_theta_function() {
        let m = ManifoldModel::circle();
        let t: f64 = 0.7;
        let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), t).unwrap();
        for d in [0.0, 0.4, 1.7, 3.1] {
            let mut s = 0.0;
            for j in -60i64..=60 {
                s += (-(t * t) * (j * j) as f64).exp() * (j as f64 * d).cos();
            }
            s /= TAU;
            assert!((k.eval_distance(d) - s).abs() < 1e-14);
            assert!(k.eval_distance(d) >= 0.0);
        }
    }

    #[test]
    fn torus_grid_path_matches_pointwise() {
        let m = ManifoldModel::torus2();
        let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), 0.5).unwrap();
        let grid = reference_grid(&m, 30.0).unwrap();
        let x = Point::torus(1.0, 5.5);
        let fast = k.on_grid(&x, &grid);
        for (v, y) in fast.iter().zip(&grid.nodes).step_by(7) {
            assert!((v - k.eval(&x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn undecaying_profile_refused() {
        let r = ZonalKernel::new(&ManifoldModel::circle(), &FilterProfile::one(), 0.5);
        assert!(matches!(r, Err(Error::Precision(_))));
        assert!(ZonalKernel::new(&ManifoldModel::circle(), &FilterProfile::eta(), 0.0).is_err());
    }
}
