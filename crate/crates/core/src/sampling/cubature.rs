use super::lattice::Lattice;
use crate::error::{domain, Error, Result};
use crate::manifold::{enumerate_spectrum, ManifoldModel, Point, Spectrum};
use crate::spectral::{synthesis_matrix, BandlimitedFunction};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Exactness residual accepted for a cubature rule.
pub const EXACTNESS_TOL: f64 = 1e-8;

/// Upper cap on each weight, as a multiple of mu_total / |points|.
const WEIGHT_CAP: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CubatureSolver {
    LinearProgram,
    Nnls,
}

/// Positive weights at lattice points integrating E_omega exactly.
#[derive(Clone, Debug, Serialize)]
pub struct CubatureRule {
    pub model: ManifoldModel,
    pub rho: f64,
    pub omega: f64,
    #[serde(skip)]
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// min weight / rho^s.
    pub c1: f64,
    /// max weight / rho^s.
    pub c2: f64,
    /// Largest |sum_k w_k u_l(x_k) - integral of u_l| over the band.
    pub max_residual: f64,
    pub solver: CubatureSolver,
    pub warnings: Vec<String>,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// max weight / min weight.
    pub fn spread(&self) -> f64 {
        self.c2 / self.c1
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// sum_k w_k v_k for values at the rule's points.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.weights.iter().zip(&self.points).map(|(w, p)| w * f(p)).sum()
    }

    pub fn integrate_band(&self, f: &BandlimitedFunction) -> f64 {
        self.integrate(&f.on_points(&self.points))
    }
}

/// Moments of the eigenbasis: sqrt(mu_total) for the constant, zero otherwise.
fn moments(model: &ManifoldModel, n: usize) -> DVector<f64> {
    let mut b = DVector::zeros(n);
    b[0] = model.mu_total().sqrt();
    b
}

fn residual(a: &DMatrix<f64>, w: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    b - a * w
}

/// Positive cubature weights exact on E_omega at the lattice points.
pub fn cubature_weights(lattice: &Lattice, omega: f64) -> Result<CubatureRule> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return domain("omega must be finite and non-negative");
    }
    if lattice.is_empty() {
        return domain("lattice has no points");
    }
    let model = lattice.model;
    let spec = enumerate_spectrum(&model, omega)?;
    let n = spec.len();
    let np = lattice.len();
    let mut warnings = Vec::new();
    if n > np {
        warnings.push(format!("N_omega = {n} exceeds the {np} lattice points"));
    }
    // rows are eigenfunctions, columns are points
    let a = synthesis_matrix(&spec, &lattice.points).transpose();
    let b = moments(&model, n);
    let cap = WEIGHT_CAP * model.mu_total() / np as f64;

    let (mut w, solver) = match solve_lp(&a, &b, cap) {
        Ok(w) => (w, CubatureSolver::LinearProgram),
        Err(LpFailure::Infeasible) => return Err(infeasible(&spec, np, "linear program is infeasible")),
        Err(LpFailure::Numerical) => {
            warnings.push("linear program failed numerically; used the nonnegative least-squares fallback".into());
            (solve_nnls(&a, &b, model.mu_total() / np as f64)?, CubatureSolver::Nnls)
        }
    };
    polish(&a, &b, &mut w);
    let max_residual = residual(&a, &w, &b).amax();
    let min = w.min();
    if !(min > 0.0) {
        return Err(infeasible(&spec, np, &format!("smallest weight {min:e} is not positive")));
    }
    if max_residual > EXACTNESS_TOL {
        return Err(infeasible(&spec, np, &format!("exactness residual {max_residual:e} exceeds {EXACTNESS_TOL:e}")));
    }
    let rs = lattice.rho.powi(model.dim() as i32);
    Ok(CubatureRule {
        model,
        rho: lattice.rho,
        omega,
        points: lattice.points.clone(),
        c1: min / rs,
        c2: w.max() / rs,
        weights: w.iter().copied().collect(),
        max_residual,
        solver,
        warnings,
    })
}

fn infeasible(spec: &Spectrum, np: usize, why: &str) -> Error {
    Error::Infeasible(format!(
        "no positive cubature for N_omega = {} on {np} points ({why}); use a denser lattice (smaller a0 in rho = a0 (omega+1)^(-1/2))",
        spec.len()
    ))
}

enum LpFailure {
    Infeasible,
    Numerical,
}

/// maximize t subject to A w = b, t <= w_k <= cap.
fn solve_lp(a: &DMatrix<f64>, b: &DVector<f64>, cap: f64) -> std::result::Result<DVector<f64>, LpFailure> {
    let (n, np) = a.shape();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let vars: Vec<_> = (0..np).map(|_| problem.add_var(0.0, (0.0, cap))).collect();
    for l in 0..n {
        let row: Vec<_> = (0..np).filter(|&k| a[(l, k)] != 0.0).map(|k| (vars[k], a[(l, k)])).collect();
        problem.add_constraint(row, ComparisonOp::Eq, b[l]);
    }
    for v in &vars {
        problem.add_constraint([(*v, 1.0), (t, -1.0)], ComparisonOp::Ge, 0.0);
    }
    let solved = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| problem.solve()));
    match solved {
        Ok(Ok(sol)) => Ok(DVector::from_iterator(np, vars.iter().map(|v| sol[*v]))),
        Ok(Err(minilp::Error::Infeasible)) => Err(LpFailure::Infeasible),
        _ => Err(LpFailure::Numerical),
    }
}

/// Minimum-norm correction of the exactness residual, repeated a few times.
fn polish(a: &DMatrix<f64>, b: &DVector<f64>, w: &mut DVector<f64>) {
    let gram = a * a.transpose();
    let Some(chol) = gram.cholesky() else { return };
    for _ in 0..3 {
        let r = residual(a, w, b);
        if r.amax() < 1e-15 {
            break;
        }
        let y = chol.solve(&r);
        *w += a.tr_mul(&y);
    }
}

/// Uniform floor plus a nonnegative least-squares correction of the remaining
/// residual; the floor is halved until the residual closes.
fn solve_nnls(a: &DMatrix<f64>, b: &DVector<f64>, mean: f64) -> Result<DVector<f64>> {
    let np = a.ncols();
    let mut floor = 0.5 * mean;
    for _ in 0..20 {
        let w0 = DVector::from_element(np, floor);
        let v = nnls(a, &residual(a, &w0, b), 10 * np);
        let w = w0 + v;
        if residual(a, &w, b).amax() <= EXACTNESS_TOL {
            return Ok(w);
        }
        floor *= 0.5;
    }
    Err(Error::Infeasible("nonnegative least squares did not reach exactness".into()))
}

/// Lawson-Hanson active set method for min ||A x - b|| with x >= 0.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> DVector<f64> {
    let np = a.ncols();
    let mut x = DVector::zeros(np);
    let mut passive = vec![false; np];
    let scale = a.tr_mul(b).amax().max(1e-300);
    let tol = 1e-12 * scale;
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..np).filter(|&k| passive[k]).collect();
        let sub = a.select_columns(&cols);
        let z = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
        let mut full = DVector::zeros(np);
        for (i, &k) in cols.iter().enumerate() {
            full[k] = z[i];
        }
        full
    };
    for _ in 0..max_iter {
        let g = a.tr_mul(&(b - a * &x));
        let pick = (0..np).filter(|&k| !passive[k] && g[k] > tol).max_by(|&i, &j| g[i].total_cmp(&g[j]));
        let Some(j) = pick else { break };
        passive[j] = true;
        loop {
            let z = solve_passive(&passive);
            let bad: Vec<usize> = (0..np).filter(|&k| passive[k] && z[k] <= 0.0).collect();
            if bad.is_empty() {
                x = z;
                break;
            }
            let alpha = bad
                .iter()
                .filter(|&&k| x[k] - z[k] > 0.0)
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(1.0, f64::min);
            x += (z - &x) * alpha;
            for k in 0..np {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
