use super::{count_eigenvalues, ManifoldModel};
use crate::error::{domain, Result};
use crate::quadrature::linear_fit;
use serde::Serialize;

/// Log-log fit of the counting function, N(omega) ~ constant * omega^slope.
#[derive(Clone, Debug, Serialize)]
pub struct WeylFit {
    pub slope: f64,
    pub constant: f64,
    /// Root-mean-square of the log residuals.
    pub residual: f64,
    pub omegas: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn weyl_fit(model: &ManifoldModel, omegas: &[f64]) -> Result<WeylFit> {
    let mut om: Vec<f64> = omegas.to_vec();
    om.sort_by(f64::total_cmp);
    om.dedup();
    if om.len() < 4 {
        return domain("weyl fit needs at least four distinct bandwidths");
    }
    if om[0] <= 0.0 || om[om.len() - 1] / om[0] < 100.0 {
        return domain("weyl fit bandwidths must be positive and span two decades");
    }
    let counts: Vec<usize> = om.iter().map(|&w| count_eigenvalues(model, w)).collect();
    let xs: Vec<f64> = om.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept, _) = linear_fit(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(WeylFit { slope, constant: intercept.exp(), residual, omegas: om, counts })
}
