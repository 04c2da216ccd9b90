use super::bandlimited::BandlimitedFunction;
use super::kernel::ZonalKernel;
use super::norms::{alpha_norm, lp_norm, norm_grid, rand_band, weighted_lp, young_alpha};
use super::profile::{filter_bank, filter_bank_companion, FilterProfile};
use crate::error::{domain, Result};
use crate::manifold::{enumerate_spectrum, ManifoldModel, Point};
use serde::Serialize;

/// Two-sided estimate of the norm of phi_j(L) from W_p^r to L_q.
#[derive(Clone, Debug, Serialize)]
pub struct BlockNorm {
    pub j: u32,
    pub lower_est: f64,
    pub upper_est: f64,
    /// Exact value when p = q = 2.
    pub exact: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BlockNormOptions {
    pub ensemble: usize,
    pub seed: u64,
    /// Largest eigenvalue of the loaded spectrum; defaults to the block band.
    pub spectrum_cap: Option<f64>,
}

impl Default for BlockNormOptions {
    fn default() -> Self {
        BlockNormOptions { ensemble: 8, seed: 7, spectrum_cap: None }
    }
}

/// Band containing the support of phi_j.
pub fn block_band(j: u32) -> f64 {
    4f64.powi(j as i32 + 1)
}

/// Exact W_2^r -> L_2 norm: max over the spectrum of |phi_j(lambda)| / (1 + lambda^{r/2}).
pub fn block_exact_l2(model: &ManifoldModel, j: u32, r: f64, cap: f64) -> Result<f64> {
    let phi = filter_bank(j as i64)?;
    let spec = enumerate_spectrum(model, cap.min(block_band(j)))?;
    Ok(spec
        .eigenspaces()
        .iter()
        .map(|(lam, _)| phi.eval(*lam).abs() / (1.0 + lam.powf(0.5 * r)))
        .fold(0.0, f64::max))
}

/// Young certificate for ||phi_j(L)||: 2^{-(j-1) r} times an alpha-norm
/// of the psi_j kernel (eta kernel for j = 0).
pub fn block_upper(model: &ManifoldModel, j: u32, p: f64, q: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return domain("block norms need r > 0");
    }
    if p > q {
        return domain("the Young certificate needs p <= q");
    }
    if p == 2.0 && q == 2.0 {
        return block_exact_l2(model, j, r, f64::INFINITY);
    }
    let alpha = young_alpha(p, q)?;
    let (profile, t, factor) = if j == 0 {
        (FilterProfile::eta(), 1.0, 1.0)
    } else {
        let psi = filter_bank_companion(1, r)?;
        let t = 2f64.powi(-(j as i32 - 1));
        (psi, t, 2f64.powf(-(j as f64 - 1.0) * r))
    };
    let x = Point::sphere(0.7, 0.3);
    let a = if alpha == 2.0 {
        ZonalKernel::new(model, &profile.squared(), t)?.diagonal().sqrt()
    } else {
        alpha_norm(&ZonalKernel::new(model, &profile, t)?, &x, alpha)?
    };
    Ok(factor * a)
}

pub fn block_norm(
    model: &ManifoldModel,
    j: u32,
    p: f64,
    q: f64,
    r: f64,
    opts: &BlockNormOptions,
) -> Result<BlockNorm> {
    if opts.ensemble == 0 {
        return domain("ensemble size must be positive");
    }
    if r <= 0.0 {
        return domain("block norms need r > 0");
    }
    let cap = opts.spectrum_cap.unwrap_or(f64::INFINITY);
    if p == 2.0 && q == 2.0 {
        let v = block_exact_l2(model, j, r, cap)?;
        return Ok(BlockNorm { j, lower_est: v, upper_est: v, exact: Some(v) });
    }
    let upper_est = block_upper(model, j, p, q, r)?;
    let band = block_band(j).min(cap);
    let phi = filter_bank(j as i64)?;
    let grid = norm_grid(model, band)?;
    let mut lower_est: f64 = 0.0;
    for i in 0..opts.ensemble {
        let f = rand_band(model, band, p, opts.seed.wrapping_add(i as u64))?;
        let g: BandlimitedFunction = f.map_spectrum(|l| phi.eval(l));
        let num = weighted_lp(&grid.weights, &g.on_grid(&grid), q);
        let den = lp_norm(&f, p, r)?;
        lower_est = lower_est.max(num / den);
    }
    Ok(BlockNorm { j, lower_est, upper_est, exact: None })
}
