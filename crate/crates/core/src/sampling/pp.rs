use super::lattice::Lattice;
use crate::error::{domain, Result};
use crate::manifold::{enumerate_spectrum, Spectrum};
use crate::spectral::{lp_norm_on, norm_grid, seq_lp, synthesis_matrix, BandlimitedFunction};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::sync::Arc;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PpMethod {
    /// Extreme singular values of the sampling matrix, sharp over E_omega.
    Exact,
    /// Extremes over a random ensemble, lower/upper estimates only.
    Ensemble { size: usize },
}

/// Plancherel-Polya constants c1 <= rho^{-s/p} ||f||_p / ||f(x)||_{l_p} <= c2.
#[derive(Clone, Debug, Serialize)]
pub struct PpConstants {
    pub p: f64,
    pub omega: f64,
    pub n_omega: usize,
    pub points: usize,
    pub c1: f64,
    pub c2: f64,
    pub method: PpMethod,
    /// Numerical rank of the sampling matrix (p = 2 only).
    pub rank: Option<usize>,
    /// Coefficient vectors attaining c1 and c2 (p = 2 only).
    #[serde(skip)]
    pub witnesses: Option<(Vec<f64>, Vec<f64>)>,
    /// Relative mismatch between the witnesses' ratios and (c1, c2).
    pub witness_residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl PpConstants {
    pub fn ratio(&self) -> f64 {
        self.c2 / self.c1
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank.is_some_and(|r| r < self.n_omega)
    }
}

/// Coupling constant rho * sqrt(omega) when omega > 0.
pub fn coupling(lattice: &Lattice, omega: f64) -> f64 {
    lattice.rho * omega.max(1.0).sqrt()
}

/// Warning text when rho and omega are not coupled within a factor of two of `c0`.
pub fn coupling_warning(lattice: &Lattice, omega: f64, c0: f64) -> Option<String> {
    let a = coupling(lattice, omega) / c0;
    if (0.5..=2.0).contains(&a) {
        None
    } else {
        Some(format!(
            "rho * sqrt(omega) = {:.4} is outside [c0/2, 2 c0] with c0 = {c0:.4}",
            coupling(lattice, omega)
        ))
    }
}

fn check_args(lattice: &Lattice, omega: f64, p: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return domain("omega must be finite and non-negative");
    }
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent p must lie in [1, inf], got {p}"));
    }
    if lattice.is_empty() {
        return domain("lattice has no points");
    }
    Ok(())
}

/// Plancherel-Polya constants of a lattice on E_omega.
pub fn pp_constants(lattice: &Lattice, omega: f64, p: f64, ensemble_size: usize, seed: u64) -> Result<PpConstants> {
    check_args(lattice, omega, p)?;
    let spec = Arc::new(enumerate_spectrum(&lattice.model, omega)?);
    if p == 2.0 {
        exact_p2(lattice, &spec)
    } else {
        ensemble(lattice, spec, p, ensemble_size, seed)
    }
}

fn exact_p2(lattice: &Lattice, spec: &Spectrum) -> Result<PpConstants> {
    let s = lattice.model.dim() as i32;
    let scale = lattice.rho.powf(-0.5 * s as f64);
    let a = synthesis_matrix(spec, &lattice.points);
    let gram = a.tr_mul(&a);
    let eig = gram.symmetric_eigen();
    let n = spec.len();
    let (mut imax, mut imin) = (0, 0);
    for i in 0..n {
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
    }
    let smax = eig.eigenvalues[imax].max(0.0).sqrt();
    let rank = eig.eigenvalues.iter().filter(|&&l| l.max(0.0).sqrt() > RANK_TOL * smax).count();
    let smin = eig.eigenvalues[imin].max(0.0).sqrt();
    let c1 = scale / smax;
    let mut warnings = Vec::new();
    let c2 = if rank < n {
        warnings.push(format!(
            "sampling matrix has rank {rank} < N_omega = {n}; the lattice is too sparse for this band"
        ));
        f64::INFINITY
    } else {
        scale / smin
    };
    let wmax: Vec<f64> = eig.eigenvectors.column(imax).iter().copied().collect();
    let wmin: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
    let ratio_of = |w: &[f64]| {
        let v = DVector::from_column_slice(w);
        scale * v.norm() / (&a * &v).norm()
    };
    let residual = if c2.is_finite() {
        Some(((ratio_of(&wmax) - c1) / c1).abs().max(((ratio_of(&wmin) - c2) / c2).abs()))
    } else {
        None
    };
    Ok(PpConstants {
        p: 2.0,
        omega: spec.omega(),
        n_omega: n,
        points: lattice.len(),
        c1,
        c2,
        method: PpMethod::Exact,
        rank: Some(rank),
        witnesses: Some((wmax, wmin)),
        witness_residual: residual,
        warnings,
    })
}

fn ensemble(lattice: &Lattice, spec: Arc<Spectrum>, p: f64, size: usize, seed: u64) -> Result<PpConstants> {
    if size == 0 {
        return domain("ensemble size must be positive");
    }
    let s = lattice.model.dim() as f64;
    let scale = if p.is_infinite() { 1.0 } else { lattice.rho.powf(-s / p) };
    let grid = norm_grid(&lattice.model, spec.omega())?;
    let a: DMatrix<f64> = synthesis_matrix(&spec, &lattice.points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.len();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    for k in 0..size {
        // alternate spread-out random functions with reproducing kernels peaked at a random point
        let coeffs: Vec<f64> = if k % 2 == 0 || n == 1 {
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        } else {
            spec.eval_all(&lattice.model.random_point(&mut rng))
        };
        let f = BandlimitedFunction::new(spec.clone(), coeffs)?;
        let norm = lp_norm_on(&grid, &f, p, 0.0)?;
        let samples = &a * DVector::from_column_slice(f.coeffs());
        let disc = seq_lp(samples.as_slice(), p);
        if disc == 0.0 {
            c2 = f64::INFINITY;
            continue;
        }
        let ratio = scale * norm / disc;
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    Ok(PpConstants {
        p,
        omega: spec.omega(),
        n_omega: n,
        points: lattice.len(),
        c1,
        c2,
        method: PpMethod::Ensemble { size },
        rank: None,
        witnesses: None,
        witness_residual: None,
        warnings: vec!["constants for p != 2 are ensemble estimates".into()],
    })
}
