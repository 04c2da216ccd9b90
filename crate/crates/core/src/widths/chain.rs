//! Discretisation of E_{N^2} through sampling on a lattice and synthesis
//! with the eta kernel at scale 1/N.

use super::exponents::{check_exponent, conjugate, inv};
use crate::calibration::Calibration;
use crate::error::{domain, Error, Result};
use crate::manifold::{enumerate_spectrum, ManifoldModel, ModelKind};
use crate::sampling::{build_lattice, cubature_weights, Lattice};
use crate::spectral::{alpha_norm, lp_norm_on, norm_grid, rand_band, seq_lp, synthesis_matrix, weighted_lp, FilterProfile, ZonalKernel};
use serde::Serialize;
use std::sync::Arc;

/// Smallest band containing every product f g with f in E_a and g in E_b.
pub fn product_band(model: &ManifoldModel, a: f64, b: f64) -> f64 {
    match model.kind() {
        ModelKind::Circle | ModelKind::Torus2 => (a.sqrt() + b.sqrt()).powi(2),
        ModelKind::Sphere2 => {
            let degree = |w: f64| ((4.0 * w + 1.0).sqrt() - 1.0) / 2.0 + 1e-9;
            let l = degree(a).floor() + degree(b).floor();
            l * (l + 1.0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainOptions {
    /// Lattice coupling rho = a0 / sqrt(omega + 1) at the cubature band.
    pub a0: f64,
    pub ensemble: usize,
    pub seed: u64,
}

impl ChainOptions {
    pub fn calibrated(model: &ManifoldModel) -> Self {
        ChainOptions { a0: Calibration::builtin().get(model.kind()).a0, ensemble: 50, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub order: usize,
    pub p: f64,
    pub q: f64,
    /// dim E_{N^2}.
    pub dim: usize,
    /// Band on which the cubature is exact.
    pub cubature_band: f64,
    pub rho: f64,
    /// Number of lattice points m.
    pub points: usize,
    /// ||U_N|| from E_{N^2} in L_p to l_p^m: ensemble lower value and upper bound.
    pub u_lower: f64,
    pub u_upper: f64,
    /// ||i_2|| from l_q^m to the weighted l_{q,w}^m.
    pub i2: f64,
    pub i2_scaled: f64,
    /// [min, max] of (w_j N^s)^{1/q}.
    pub weight_band: (f64, f64),
    /// Riesz-Thorin bound C_1^{1/q} C_inf^{1 - 1/q} for ||T||.
    pub t_bound: f64,
    pub t_ends: (f64, f64),
    /// max ||f - T U_N f||_q / ||f||_q over the ensemble.
    pub reproduction: f64,
    /// ||T|| ||i_2|| ||U_N|| and its ratio to N^{s(1/p - 1/q)}.
    pub factor: f64,
    pub factor_scaled: f64,
    #[serde(skip)]
    pub lattice: Lattice,
}

pub fn discretization_chain(model: &ManifoldModel, order: usize, p: f64, q: f64, opts: &ChainOptions) -> Result<ChainReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if order == 0 {
        return domain("chain order N must be positive");
    }
    if opts.ensemble == 0 {
        return domain("ensemble size must be positive");
    }
    let nf = order as f64;
    let s = model.dim() as f64;
    let omega = nf * nf;
    // eta(u) vanishes for u >= 4, so the kernel lives in E_{4 N^2}.
    let kernel_band = 4.0 * omega;
    let band = product_band(model, omega, kernel_band);
    let rho = opts.a0 / (band + 1.0).sqrt();
    let lattice = build_lattice(model, rho, opts.seed)?;
    let rule = cubature_weights(&lattice, band).map_err(|e| match e {
        Error::Infeasible(msg) => Error::Dependency(format!("no positive cubature at band {band}: {msg}")),
        other => other,
    })?;
    let points = &lattice.points;
    let weights = &rule.weights;
    let kernel = ZonalKernel::new(model, &FilterProfile::eta(), 1.0 / nf)?;
    let grid = norm_grid(model, kernel_band)?;
    // K(x_g, t_j) on the grid.
    let kmat: Vec<Vec<f64>> = points.iter().map(|t| kernel.on_grid(t, &grid)).collect();
    let c_inf = (0..grid.len())
        .map(|g| kmat.iter().zip(weights).map(|(row, w)| w * row[g].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let c_one = alpha_norm(&kernel, &points[0], 1.0)?;
    let t_bound = c_one.powf(inv(q)) * c_inf.powf(1.0 - inv(q));

    let spec = Arc::new(enumerate_spectrum(model, omega)?);
    let mut u_lower: f64 = 0.0;
    let mut reproduction: f64 = 0.0;
    for i in 0..opts.ensemble {
        let f = rand_band(model, omega, p, opts.seed.wrapping_add(i as u64))?;
        let samples = f.on_points(points);
        u_lower = u_lower.max(seq_lp(&samples, p) / lp_norm_on(&grid, &f, p, 0.0)?);
        let fg = f.on_grid(&grid);
        let mut tuf = vec![0.0; grid.len()];
        for ((row, w), u) in kmat.iter().zip(weights).zip(&samples) {
            let c = w * u;
            for (acc, k) in tuf.iter_mut().zip(row) {
                *acc += c * k;
            }
        }
        let diff: Vec<f64> = fg.iter().zip(&tuf).map(|(a, b)| a - b).collect();
        reproduction = reproduction.max(weighted_lp(&grid.weights, &diff, q) / weighted_lp(&grid.weights, &fg, q));
    }
    let u_upper = if p == 2.0 {
        let sv = synthesis_matrix(&spec, points).singular_values();
        let top = sv.max();
        u_lower = top;
        top
    } else if p.is_infinite() {
        1.0
    } else {
        // f = K^N f on E_{N^2}, so |f(t_j)| <= ||K^N(t_j, .)||_{p'} ||f||_p.
        (points.len() as f64).powf(inv(p)) * alpha_norm(&kernel, &points[0], conjugate(p))?
    };
    let (i2, lo, hi) = if q.is_infinite() {
        (1.0, 1.0, 1.0)
    } else {
        let scaled = |w: f64| (w * nf.powf(s)).powf(inv(q));
        (rule.max_weight().powf(inv(q)), scaled(rule.min_weight()), scaled(rule.max_weight()))
    };
    let factor = u_upper * i2 * t_bound;
    Ok(ChainReport {
        order,
        p,
        q,
        dim: spec.len(),
        cubature_band: band,
        rho,
        points: points.len(),
        u_lower,
        u_upper,
        i2,
        i2_scaled: i2 * nf.powf(s * inv(q)),
        weight_band: (lo, hi),
        t_bound,
        t_ends: (c_one, c_inf),
        reproduction,
        factor,
        factor_scaled: factor / nf.powf(s * (inv(p) - inv(q))),
        lattice,
    })
}
