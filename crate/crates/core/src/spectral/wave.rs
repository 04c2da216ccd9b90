use super::kernel::ZonalKernel;
use super::profile::FilterProfile;
use crate::error::{domain, Result};
use crate::manifold::{ManifoldModel, ModelKind};
use serde::Serialize;
use std::f64::consts::PI;

/// Empirical support radius of a Paley-Wiener kernel.
#[derive(Clone, Debug, Serialize)]
pub struct WaveSupport {
    pub t: f64,
    pub threshold: f64,
    pub radius: f64,
    /// radius / t.
    pub c0: f64,
    /// Probe spacing near the reported radius.
    pub spacing: f64,
}

/// Smallest R with |K_t(x, y)| <= threshold whenever d(x, y) > R, for the
/// built-in Paley-Wiener profile.
pub fn wave_support_radius(model: &ManifoldModel, t: f64, threshold: f64) -> Result<WaveSupport> {
    wave_support_radius_with(model, &FilterProfile::paley_wiener(), t, threshold)
}

pub fn wave_support_radius_with(
    model: &ManifoldModel,
    profile: &FilterProfile,
    t: f64,
    threshold: f64,
) -> Result<WaveSupport> {
    if threshold.is_nan() || threshold <= 0.0 {
        return domain("threshold must be positive");
    }
    if !profile.paley_wiener {
        return domain(format!("profile '{}' is not Paley-Wiener", profile.name()));
    }
    let fine = t / 64.0;
    if threshold.is_infinite() {
        return Ok(WaveSupport { t, threshold, radius: 0.0, c0: 0.0, spacing: fine });
    }
    let kernel = ZonalKernel::new(model, profile, t)?;
    let (radius, spacing) = match model.kind() {
        ModelKind::Circle | ModelKind::Sphere2 => {
            let n = (PI / fine).ceil() as usize;
            let h = PI / n as f64;
            let mut r: f64 = 0.0;
            for i in 0..=n {
                let d = h * i as f64;
                if kernel.eval_distance(d).abs() > threshold {
                    r = d;
                }
            }
            (r, h)
        }
        ModelKind::Torus2 => {
            let reach = (2.0 * t).min(PI);
            let nf = (reach / (t / 32.0)).ceil() as usize;
            let hf = reach / nf as f64;
            let local: Vec<f64> = (0..=2 * nf).map(|i| -reach + hf * i as f64).collect();
            let m = kernel.on_torus_offsets(&local, &local)?;
            let mut r: f64 = 0.0;
            for (i, a) in local.iter().enumerate() {
                for (j, b) in local.iter().enumerate() {
                    if m[(i, j)].abs() > threshold {
                        r = r.max((a * a + b * b).sqrt());
                    }
                }
            }
            let mut spacing = hf;
            let nc = (2.0 * PI / (t / 4.0)).ceil() as usize;
            let hc = 2.0 * PI / nc as f64;
            let global: Vec<f64> = (0..nc).map(|i| -PI + hc * i as f64).collect();
            let g = kernel.on_torus_offsets(&global, &global)?;
            for (i, a) in global.iter().enumerate() {
                for (j, b) in global.iter().enumerate() {
                    let d = (a * a + b * b).sqrt();
                    if d > r && g[(i, j)].abs() > threshold {
                        r = d;
                        spacing = hc;
                    }
                }
            }
            (r, spacing)
        }
    };
    Ok(WaveSupport { t, threshold, radius, c0: radius / t, spacing })
}
