use super::bandlimited::{BandlimitedFunction, GridFunction};
use super::kernel::ZonalKernel;
use super::profile::FilterProfile;
use crate::error::{domain, Error, Result};
use crate::manifold::{enumerate_spectrum, reference_grid, ManifoldModel, Point, ReferenceGrid, MAX_GRID_NODES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must lie in [1, inf], got {p}"));
    }
    Ok(())
}

/// Weighted discrete L_p norm; p = inf takes the max.
pub fn weighted_lp(weights: &[f64], values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        weights.iter().zip(values).map(|(w, v)| w * v.abs()).sum()
    } else if p == 2.0 {
        weights.iter().zip(values).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    } else {
        weights.iter().zip(values).map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Plain l_p norm of a sequence.
pub fn seq_lp(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Default grid for norms of functions in E_omega: twice the resolution
/// needed for exact products.
pub fn norm_grid(model: &ManifoldModel, omega: f64) -> Result<ReferenceGrid> {
    reference_grid(model, 4.0 * omega.max(1.0))
}

/// ||f||_p for r = 0, otherwise the graph norm ||f||_p + ||L^{r/2} f||_p.
pub fn lp_norm(f: &BandlimitedFunction, p: f64, r: f64) -> Result<f64> {
    let grid = norm_grid(f.model(), f.omega())?;
    lp_norm_on(&grid, f, p, r)
}

pub fn lp_norm_on(grid: &ReferenceGrid, f: &BandlimitedFunction, p: f64, r: f64) -> Result<f64> {
    check_p(p)?;
    if r < 0.0 {
        return domain("smoothness r must be non-negative");
    }
    if grid.safe_bandwidth < f.omega() && p == 2.0 {
        return Err(Error::Precision("grid does not resolve the function band".into()));
    }
    let base = weighted_lp(&grid.weights, &f.on_grid(grid), p);
    if r == 0.0 {
        return Ok(base);
    }
    let g = f.laplacian_power(0.5 * r);
    Ok(base + weighted_lp(&grid.weights, &g.on_grid(grid), p))
}

/// L_p norm of a grid function (r = 0 only).
pub fn grid_lp_norm(g: &GridFunction, p: f64, r: f64) -> Result<f64> {
    check_p(p)?;
    if r != 0.0 {
        return domain("Sobolev norms need a band-limited function");
    }
    Ok(weighted_lp(&g.grid.weights, &g.values, p))
}

/// Band of the output of F(t^2 L) applied to something of band `omega_in`.
fn projected_band(profile: &FilterProfile, t: f64, omega_in: f64) -> f64 {
    let reach = profile.support_end().unwrap_or(profile.horizon());
    omega_in.min(reach / (t * t))
}

/// Apply F(t^2 L) coefficient-wise.
pub fn band_project(profile: &FilterProfile, t: f64, f: &BandlimitedFunction) -> Result<BandlimitedFunction> {
    if !(t > 0.0) {
        return domain(format!("scale t must be positive, got {t}"));
    }
    let out = f.map_spectrum(|lam| profile.eval(t * t * lam));
    out.restrict(projected_band(profile, t, f.omega()))
}

/// Apply F(t^2 L) to a function given on a reference grid.
pub fn band_project_grid(profile: &FilterProfile, t: f64, g: &GridFunction) -> Result<BandlimitedFunction> {
    if !(t > 0.0) {
        return domain(format!("scale t must be positive, got {t}"));
    }
    let band = projected_band(profile, t, f64::INFINITY);
    if band > g.grid.safe_bandwidth {
        return domain(format!(
            "grid safe bandwidth {} does not cover output band {band}",
            g.grid.safe_bandwidth
        ));
    }
    let f = g.analyse(band)?;
    Ok(f.map_spectrum(|lam| profile.eval(t * t * lam)))
}

/// Random element of E_omega normalised in L_p.
pub fn rand_band(model: &ManifoldModel, omega: f64, p: f64, seed: u64) -> Result<BandlimitedFunction> {
    if !(omega > 0.0) {
        return domain("rand_band needs a positive bandwidth");
    }
    check_p(p)?;
    let spec = Arc::new(enumerate_spectrum(model, omega)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..spec.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut f = BandlimitedFunction::new(spec, coeffs)?;
    let n = lp_norm(&f, p, 0.0)?;
    f.scale(1.0 / n);
    Ok(f)
}

/// Grid used for alpha-norms of a kernel, twice as fine as the kernel band.
pub fn kernel_grid(kernel: &ZonalKernel) -> Result<ReferenceGrid> {
    let fine = reference_grid(kernel.model(), 4.0 * kernel.lambda_cut());
    match fine {
        Ok(g) if g.len() <= MAX_GRID_NODES / 4 => Ok(g),
        _ => reference_grid(kernel.model(), kernel.lambda_cut()),
    }
}

/// (int |K_t(x, y)|^alpha dy)^{1/alpha}.
pub fn alpha_norm(kernel: &ZonalKernel, x: &Point, alpha: f64) -> Result<f64> {
    let grid = kernel_grid(kernel)?;
    alpha_norm_on(kernel, x, alpha, &grid)
}

pub fn alpha_norm_on(kernel: &ZonalKernel, x: &Point, alpha: f64, grid: &ReferenceGrid) -> Result<f64> {
    check_p(alpha)?;
    if grid.safe_bandwidth < kernel.lambda_cut() {
        return Err(Error::Precision(format!(
            "grid safe bandwidth {} below kernel truncation {}",
            grid.safe_bandwidth,
            kernel.lambda_cut()
        )));
    }
    let vals = kernel.on_grid(x, grid);
    let v = weighted_lp(&grid.weights, &vals, alpha);
    if alpha.is_infinite() {
        Ok(v.max(kernel.eval(x, x).abs()))
    } else {
        Ok(v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelStat {
    pub t: f64,
    pub sup_envelope: f64,
    /// Keyed by the alpha label ("1", "2", "inf").
    pub alpha_norms: BTreeMap<String, f64>,
}

pub fn alpha_label(alpha: f64) -> String {
    if alpha.is_infinite() {
        "inf".into()
    } else {
        format!("{alpha}")
    }
}

/// Envelope t^s (1 + d/t)^{s+1} |K_t| over the pairs, plus alpha-norms at the first point.
pub fn localization_stat(kernel: &ZonalKernel, pairs: &[(Point, Point)], alphas: &[f64]) -> Result<KernelStat> {
    if pairs.is_empty() {
        return domain("localization statistic needs at least one pair");
    }
    let t = kernel.t();
    if t > 1.0 && !kernel.profile().vanishes_at_zero {
        return domain("scales above 1 need a profile vanishing at zero");
    }
    let m = kernel.model();
    let s = m.dim() as i32;
    let sup_envelope = pairs
        .iter()
        .map(|(x, y)| {
            let d = m.distance(x, y);
            t.powi(s) * (1.0 + d / t).powi(s + 1) * kernel.eval(x, y).abs()
        })
        .fold(0.0, f64::max);
    let mut alpha_norms = BTreeMap::new();
    for &a in alphas {
        alpha_norms.insert(alpha_label(a), alpha_norm(kernel, &pairs[0].0, a)?);
    }
    Ok(KernelStat { t, sup_envelope, alpha_norms })
}

/// Seeded pairs: half at distance up to 10 t, half independent uniform.
pub fn sample_pairs(model: &ManifoldModel, t: f64, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let x = model.random_point(&mut rng);
            let y = if i % 2 == 0 {
                let d = (10.0 * t * rng.random::<f64>()).min(model.diameter() * 0.999);
                model.point_at_distance(&x, d, TAU * rng.random::<f64>())
            } else {
                model.random_point(&mut rng)
            };
            (x, y)
        })
        .collect()
}

/// Young-type bound: kernels with alpha-norms at most c map L_p to L_q.
pub fn young_bound(c: f64, p: f64, alpha: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    check_p(alpha)?;
    let inv_q = 1.0 / p + 1.0 / alpha - 1.0;
    if !(-1e-15..=1.0 + 1e-15).contains(&inv_q) {
        return domain(format!("1/p + 1/alpha - 1 = {inv_q} outside [0, 1]"));
    }
    let q = if inv_q <= 1e-15 { f64::INFINITY } else { 1.0 / inv_q.min(1.0) };
    Ok((q, c))
}

/// Exponent alpha that pairs L_p -> L_q in the Young bound.
pub fn young_alpha(p: f64, q: f64) -> Result<f64> {
    let inv = 1.0 + 1.0 / q - 1.0 / p;
    if !(0.0..=1.0).contains(&inv) {
        return domain("Young pairing needs p <= q");
    }
    Ok(if inv == 0.0 { f64::INFINITY } else { 1.0 / inv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ModelKind;
    use std::f64::consts::PI;

    #[test]
    fn circle_cosine_graph_norm() {
        let m = ManifoldModel::circle();
        let spec = Arc::new(enumerate_spectrum(&m, 9.0).unwrap());
        let ord = spec.find(&crate::manifold::EigenLabel::Circle { k: 3, parity: crate::manifold::Parity::Cos }).unwrap();
        let f = BandlimitedFunction::basis(spec, ord).unwrap();
        assert!((lp_norm(&f, 2.0, 2.0).unwrap() - 10.0).abs() < 1e-12);
        let l1 = 4.0 / PI.sqrt();
        let fine = crate::manifold::reference_grid_with_resolution(&m, 4096).unwrap();
        assert!((lp_norm_on(&fine, &f, 1.0, 0.0).unwrap() - l1).abs() < 1e-5);
    }

    #[test]
    fn constant_norms() {
        for kind in ModelKind::ALL {
            let m = ManifoldModel::new(kind);
            let spec = Arc::new(enumerate_spectrum(&m, 3.0).unwrap());
            let mut c = vec![0.0; spec.len()];
            let u0 = spec.eval(0, &Point::sphere(0.5, 0.5));
            c[0] = 2.5 / u0;
            let f = BandlimitedFunction::new(spec, c).unwrap();
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                let want = 2.5 * m.mu_total().powf(if p.is_infinite() { 0.0 } else { 1.0 / p });
                assert!((lp_norm(&f, p, 0.0).unwrap() - want).abs() < 1e-10);
            }
        }
        let f = BandlimitedFunction::from_model(&ManifoldModel::circle(), 1.0, vec![1.0; 3]).unwrap();
        assert!(lp_norm(&f, 0.5, 0.0).is_err());
    }

    #[test]
    fn young_index_arithmetic() {
        assert_eq!(young_bound(3.0, 1.0, 1.0).unwrap(), (1.0, 3.0));
        assert_eq!(young_bound(3.0, 2.0, 1.0).unwrap(), (2.0, 3.0));
        assert_eq!(young_bound(3.0, 1.0, 2.0).unwrap(), (2.0, 3.0));
        assert_eq!(young_bound(1.0, 2.0, 2.0).unwrap().0, f64::INFINITY);
        assert!(young_bound(1.0, 1.2, 1.2).is_ok());
        assert!(young_bound(1.0, 4.0, 4.0).is_err());
    }

    #[test]
    fn rand_band_constant_case() {
        let m = ManifoldModel::sphere2();
        let f = rand_band(&m, 0.5, 1.0, 4).unwrap();
        assert_eq!(f.coeffs().len(), 1);
        assert!((lp_norm(&f, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let g = rand_band(&m, 0.5, 1.0, 4).unwrap();
        assert_eq!(f.coeffs(), g.coeffs());
    }
}
