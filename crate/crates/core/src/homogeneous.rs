//! Structural identities of homogeneous manifolds: eigensums, spectral band
//! mass and the bandwidth of products of band-limited functions.

use crate::error::{domain, Error, Result};
use crate::manifold::{enumerate_spectrum, reference_grid, ManifoldModel, Point, ReferenceGrid, Spectrum};
use crate::spectral::{weighted_lp, BandlimitedFunction, GridFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Relative coefficient tolerance used by [`product_bandwidth`] by default.
pub const PRODUCT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct EigensumReport {
    pub lambda: f64,
    pub dim: usize,
    /// dim V_lambda / mu_total.
    pub predicted: f64,
    /// max_x |sum_k v_k(x)^2 - predicted|.
    pub max_dev: f64,
}

/// Eigensum identity at one eigenvalue over 100 seeded random points.
pub fn eigensum_check(model: &ManifoldModel, lambda: f64) -> Result<EigensumReport> {
    let reports = eigensum_scan(model, lambda, 100, 0)?;
    reports
        .into_iter()
        .find(|r| matches_eigenvalue(r.lambda, lambda))
        .ok_or_else(|| Error::Domain(format!("{lambda} is not an eigenvalue of {}", model.kind())))
}

fn matches_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

/// Eigensum identity for every eigenspace with eigenvalue at most `omega`,
/// sharing the basis evaluation between eigenspaces.
pub fn eigensum_scan(model: &ManifoldModel, omega: f64, samples: usize, seed: u64) -> Result<Vec<EigensumReport>> {
    if samples == 0 {
        return domain("need at least one sample point");
    }
    let spec = enumerate_spectrum(model, omega)?;
    let spaces = spec.eigenspaces();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev = vec![0.0f64; spaces.len()];
    let mut row = vec![0.0; spec.len()];
    let mut scratch = Vec::new();
    for _ in 0..samples {
        let x = model.random_point(&mut rng);
        spec.eval_all_into(&x, &mut row, &mut scratch);
        for (d, (_, r)) in dev.iter_mut().zip(&spaces) {
            let sum: f64 = row[r.clone()].iter().map(|v| v * v).sum();
            let predicted = r.len() as f64 / model.mu_total();
            *d = d.max((sum - predicted).abs());
        }
    }
    Ok(spaces
        .iter()
        .zip(dev)
        .map(|((lambda, r), max_dev)| EigensumReport {
            lambda: *lambda,
            dim: r.len(),
            predicted: r.len() as f64 / model.mu_total(),
            max_dev,
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct BandMass {
    /// sum of u_l(x)^2 over a/t^2 < lambda_l <= b/t^2.
    pub value: f64,
    /// value * t^s.
    pub scaled: f64,
    /// Number of eigenpairs in the band.
    pub count: usize,
    /// Set when the band holds no eigenvalue.
    pub empty: bool,
}

fn band_range(spec: &Spectrum, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let start = spec.entries().partition_point(|e| e.lambda <= lo);
    let end = spec.entries().partition_point(|e| e.lambda <= hi);
    start..end.max(start)
}

/// Spectral mass of the band (a/t^2, b/t^2] at x.
pub fn band_mass(model: &ManifoldModel, x: &Point, a: f64, b: f64, t: f64) -> Result<BandMass> {
    if !(0.0 < a && a < b) || !b.is_finite() {
        return domain(format!("band needs 0 < a < b, got ({a}, {b})"));
    }
    if !(t > 0.0) {
        return domain("scale t must be positive");
    }
    let x = model.normalize(*x)?;
    let (lo, hi) = (a / (t * t), b / (t * t));
    let spec = enumerate_spectrum(model, hi)?;
    let range = band_range(&spec, lo, hi);
    let vals = spec.eval_all(&x);
    let value: f64 = vals[range.clone()].iter().map(|v| v * v).sum();
    Ok(BandMass {
        value,
        scaled: value * t.powi(model.dim() as i32),
        count: range.len(),
        empty: range.is_empty(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub omega_in: f64,
    /// Largest eigenvalue carrying a coefficient of fg above tolerance.
    pub omega_measured: f64,
    /// 4 d_group omega_in.
    #[serde(rename = "omega_paper_bound")]
    pub omega_bound: f64,
    /// L2 mass of fg outside E_{4 d omega}.
    pub residual_mass: f64,
    pub product_norm: f64,
    pub tolerance: f64,
    /// residual_mass <= tolerance * ||fg||_2.
    pub holds: bool,
}

/// Measured band of fg on the smallest grid resolving E_{4 d omega}.
pub fn product_bandwidth(f: &BandlimitedFunction, g: &BandlimitedFunction, tolerance: f64) -> Result<ProductReport> {
    let bound = 4.0 * f.model().group_dim() as f64 * f.omega().max(g.omega());
    let grid = reference_grid(f.model(), bound)?;
    product_bandwidth_on(&grid, f, g, tolerance)
}

/// As [`product_bandwidth`] on a caller-supplied grid.
pub fn product_bandwidth_on(
    grid: &ReferenceGrid,
    f: &BandlimitedFunction,
    g: &BandlimitedFunction,
    tolerance: f64,
) -> Result<ProductReport> {
    if f.model() != g.model() || grid.model != *f.model() {
        return domain("factors and grid must live on the same model");
    }
    if !(tolerance > 0.0) {
        return domain("tolerance must be positive");
    }
    let omega_in = f.omega().max(g.omega());
    let bound = 4.0 * f.model().group_dim() as f64 * omega_in;
    if grid.safe_bandwidth < bound {
        return Err(Error::Precision(format!(
            "grid safe bandwidth {} is below the product bound {bound}",
            grid.safe_bandwidth
        )));
    }
    let values: Vec<f64> = f.on_grid(grid).iter().zip(g.on_grid(grid)).map(|(a, b)| a * b).collect();
    let grid_arc = Arc::new(grid.clone());
    let norm = weighted_lp(&grid.weights, &values, 2.0);
    let fg = GridFunction::new(grid_arc, values.clone())?.analyse(grid.safe_bandwidth)?;
    let threshold = tolerance * norm;
    let mut omega_measured: f64 = 0.0;
    let mut above = 0.0;
    for (c, e) in fg.coeffs().iter().zip(fg.spectrum().entries()) {
        if c.abs() > threshold {
            omega_measured = omega_measured.max(e.lambda);
        }
        if e.lambda > bound {
            above += c * c;
        }
    }
    let remainder: Vec<f64> = values.iter().zip(fg.on_grid(grid)).map(|(a, b)| a - b).collect();
    let orth = weighted_lp(&grid.weights, &remainder, 2.0);
    let residual_mass = (above + orth * orth).sqrt();
    Ok(ProductReport {
        omega_in,
        omega_measured,
        omega_bound: bound,
        residual_mass,
        product_norm: norm,
        tolerance,
        holds: residual_mass <= tolerance * norm.max(f64::MIN_POSITIVE),
    })
}
