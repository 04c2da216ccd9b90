use crate::error::{domain, Result};
use crate::manifold::{enumerate_spectrum, ManifoldModel};
use crate::spectral::{lp_norm_on, norm_grid, BandlimitedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct BernsteinReport {
    pub omega: f64,
    pub p: f64,
    pub m: u32,
    /// max ||L^m f||_p / ((d omega)^m ||f||_p) over the ensemble.
    pub ratio: f64,
    /// max ||L^m f||_2 / (omega^m ||f||_2), the sharp p = 2 form.
    pub sharp_ratio: f64,
    pub ensemble_size: usize,
}

/// Bernstein inequality check on random elements of E_omega plus its top eigenfunction.
pub fn bernstein_ratio(
    model: &ManifoldModel,
    omega: f64,
    p: f64,
    m: u32,
    ensemble_size: usize,
    seed: u64,
) -> Result<BernsteinReport> {
    if m < 1 {
        return domain("Bernstein power m must be at least 1");
    }
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must lie in [1, inf], got {p}"));
    }
    if !(omega >= 0.0) || !omega.is_finite() {
        return domain("omega must be finite and non-negative");
    }
    let spec = Arc::new(enumerate_spectrum(model, omega)?);
    let grid = norm_grid(model, omega)?;
    let d = model.group_dim() as f64;
    let n = spec.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ratio, mut sharp): (f64, f64) = (0.0, 0.0);
    for k in 0..=ensemble_size {
        let coeffs: Vec<f64> = if k == 0 {
            let mut c = vec![0.0; n];
            c[n - 1] = 1.0;
            c
        } else {
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let f = BandlimitedFunction::new(spec.clone(), coeffs)?;
        let lf = f.map_spectrum(|l| l.powi(m as i32));
        if omega > 0.0 {
            let top = lp_norm_on(&grid, &lf, p, 0.0)?;
            let bottom = (d * omega).powi(m as i32) * lp_norm_on(&grid, &f, p, 0.0)?;
            ratio = ratio.max(top / bottom);
            sharp = sharp.max(lf.l2_norm() / (omega.powi(m as i32) * f.l2_norm()));
        }
    }
    Ok(BernsteinReport { omega, p, m, ratio, sharp_ratio: sharp, ensemble_size })
}
