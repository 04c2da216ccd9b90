//! Per-model constants the theory leaves unspecified, frozen in an INI file
//! and reproducible with [`calibrate_model`].

use crate::error::{Error, Result};
use crate::manifold::{ManifoldModel, ModelKind};
use crate::sampling::{build_lattice, cubature_weights};
use crate::widths::{bump_count, measure_support_constant};
use ini::Ini;
use serde::Serialize;

const DEFAULTS: &str = include_str!("defaults.ini");

/// Largest max/min cubature weight ratio accepted while calibrating a0.
pub const MAX_SPREAD: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelCalibration {
    pub a0: f64,
    pub c0: f64,
    pub support_c0: f64,
    pub nu: f64,
    pub bump_power: u32,
}

impl ModelCalibration {
    /// Lattice radius coupled to a band.
    pub fn rho_for(&self, omega: f64) -> f64 {
        self.a0 / (omega + 1.0).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub circle: ModelCalibration,
    pub torus2: ModelCalibration,
    pub sphere2: ModelCalibration,
}

impl Calibration {
    /// Constants shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_ini_str(DEFAULTS).expect("bundled calibration parses")
    }

    pub fn get(&self, kind: ModelKind) -> &ModelCalibration {
        match kind {
            ModelKind::Circle => &self.circle,
            ModelKind::Torus2 => &self.torus2,
            ModelKind::Sphere2 => &self.sphere2,
        }
    }

    pub fn get_mut(&mut self, kind: ModelKind) -> &mut ModelCalibration {
        match kind {
            ModelKind::Circle => &mut self.circle,
            ModelKind::Torus2 => &mut self.torus2,
            ModelKind::Sphere2 => &mut self.sphere2,
        }
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(format!("calibration: {e}")))?;
        let section = |kind: ModelKind| -> Result<ModelCalibration> {
            let props = ini
                .section(Some(kind.name()))
                .ok_or_else(|| Error::Config(format!("calibration lacks section [{}]", kind.name())))?;
            let num = |key: &str| -> Result<f64> {
                let raw = props
                    .get(key)
                    .ok_or_else(|| Error::Config(format!("calibration [{}] lacks '{key}'", kind.name())))?;
                raw.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| Error::Config(format!("calibration [{}] {key} = '{raw}' is not positive", kind.name())))
            };
            Ok(ModelCalibration {
                a0: num("a0")?,
                c0: num("c0")?,
                support_c0: num("support_c0")?,
                nu: num("nu")?,
                bump_power: num("bump_power")? as u32,
            })
        };
        Ok(Calibration {
            circle: section(ModelKind::Circle)?,
            torus2: section(ModelKind::Torus2)?,
            sphere2: section(ModelKind::Sphere2)?,
        })
    }

    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        for kind in ModelKind::ALL {
            let c = self.get(kind);
            ini.with_section(Some(kind.name()))
                .set("a0", c.a0.to_string())
                .set("c0", c.c0.to_string())
                .set("support_c0", c.support_c0.to_string())
                .set("nu", c.nu.to_string())
                .set("bump_power", c.bump_power.to_string());
        }
        let mut out = Vec::new();
        ini.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("ini output is UTF-8")
    }
}

/// Bands at which a0 must give a positive cubature with bounded spread.
fn probe_bands(kind: ModelKind) -> &'static [f64] {
    match kind {
        ModelKind::Circle => &[64.0, 576.0],
        ModelKind::Torus2 => &[20.0, 50.0],
        ModelKind::Sphere2 => &[30.0, 72.0],
    }
}

/// Bump orders n at which P_{nu n} >= 2n must hold. Every order in the
/// range is probed since greedy packings fluctuate between powers of two.
fn probe_orders(kind: ModelKind) -> std::ops::RangeInclusive<usize> {
    match kind {
        ModelKind::Circle => 8..=512,
        ModelKind::Torus2 | ModelKind::Sphere2 => 8..=64,
    }
}

const A0_GRID: [f64; 7] = [5.0, 4.5, 4.0, 3.5, 3.0, 2.0, 1.5];
const NU_GRID: [f64; 8] = [1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0];

/// Measure the constants of one model from scratch.
pub fn calibrate_model(model: &ManifoldModel, bump_power: u32, seed: u64) -> Result<ModelCalibration> {
    let kind = model.kind();
    let a0 = A0_GRID
        .iter()
        .copied()
        .find(|&a0| {
            probe_bands(kind).iter().all(|&omega| {
                let rho = a0 / (omega + 1.0).sqrt();
                build_lattice(model, rho, seed)
                    .and_then(|lat| cubature_weights(&lat, omega))
                    .map(|rule| rule.spread() <= MAX_SPREAD)
                    .unwrap_or(false)
            })
        })
        .ok_or_else(|| Error::Infeasible(format!("no lattice coupling in {A0_GRID:?} yields a cubature on {kind}")))?;
    let support_c0 = measure_support_constant(model, bump_power)?;
    let mut nu = None;
    for cand in NU_GRID {
        let mut ok = true;
        for n in probe_orders(kind) {
            if bump_count(model, (cand * n as f64).ceil() as usize, seed)? < 2 * n {
                ok = false;
                break;
            }
        }
        if ok {
            nu = Some(cand);
            break;
        }
    }
    let nu = nu.ok_or_else(|| Error::Infeasible(format!("no density factor in {NU_GRID:?} gives P >= 2n on {kind}")))?;
    Ok(ModelCalibration { a0, c0: a0, support_c0, nu, bump_power })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_roundtrips_through_ini() {
        let c = Calibration::builtin();
        let again = Calibration::from_ini_str(&c.to_ini_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let err = Calibration::from_ini_str("[circle]\na0 = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
