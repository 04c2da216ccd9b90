//! Widths of finite-dimensional l_p balls in l_q: closed forms, a
//! brute-force optimiser used as their oracle, and Gluskin's upper shape.

use super::exponents::{check_exponent, conjugate, inv, WidthKind};
use crate::error::{domain, Error, Result};
use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

/// Exact width s_n(b_p^m, l_q^m) for the supported closed forms.
pub fn sequence_width(kind: WidthKind, p: f64, q: f64, m: usize, n: usize) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    if m == 0 {
        return domain("dimension m must be positive");
    }
    if n > m {
        return domain(format!("need n <= m, got n = {n}, m = {m}"));
    }
    if n == m {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok((m as f64).powf((inv(q) - inv(p)).max(0.0)));
    }
    let frac = (1.0 - n as f64 / m as f64).sqrt();
    match (kind, p, q) {
        (WidthKind::Kolmogorov | WidthKind::Gelfand, p, q) if p.is_infinite() && q == 1.0 => Ok((m - n) as f64),
        (WidthKind::Kolmogorov, p, q) if p == 1.0 && q == 2.0 => Ok(frac),
        (WidthKind::Gelfand, p, q) if p == 2.0 && q.is_infinite() => Ok(frac),
        (WidthKind::Kolmogorov, p, q) if p == 2.0 && q == 2.0 => Ok(1.0),
        _ => Err(Error::Unsupported(format!("no closed form for {kind} width of b_{p} in l_{q}"))),
    }
}

/// Combinations with a closed form for 0 < n < m.
pub const CLOSED_FORMS: [(WidthKind, f64, f64); 5] = [
    (WidthKind::Kolmogorov, f64::INFINITY, 1.0),
    (WidthKind::Gelfand, f64::INFINITY, 1.0),
    (WidthKind::Kolmogorov, 1.0, 2.0),
    (WidthKind::Gelfand, 2.0, f64::INFINITY),
    (WidthKind::Kolmogorov, 2.0, 2.0),
];

#[derive(Clone, Debug, Serialize)]
pub struct BruteWidth {
    pub value: f64,
    pub restarts: usize,
    /// Restarts whose local search reported convergence.
    pub converged: usize,
    /// Set when no restart converged; the value is then only an estimate.
    pub flagged: bool,
}

const MAX_BRUTE_M: usize = 4;
const MAX_BRUTE_N: usize = 2;

/// Optimise over subspaces directly. Desk scale only: m <= 4, n <= 2.
pub fn brute_sequence_width(
    kind: WidthKind,
    p: f64,
    q: f64,
    m: usize,
    n: usize,
    restarts: usize,
    seed: u64,
) -> Result<BruteWidth> {
    brute_sequence_width_scaled(kind, p, q, m, n, 1.0, restarts, seed)
}

/// As [`brute_sequence_width`] for the ball of radius `radius`.
#[allow(clippy::too_many_arguments)]
pub fn brute_sequence_width_scaled(
    kind: WidthKind,
    p: f64,
    q: f64,
    m: usize,
    n: usize,
    radius: f64,
    restarts: usize,
    seed: u64,
) -> Result<BruteWidth> {
    check_exponent(p)?;
    check_exponent(q)?;
    if m == 0 || m > MAX_BRUTE_M || n > MAX_BRUTE_N || n > m {
        return domain(format!("brute force needs n <= m <= {MAX_BRUTE_M} and n <= {MAX_BRUTE_N}"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return domain("ball radius must be positive");
    }
    if restarts == 0 {
        return domain("need at least one restart");
    }
    if n == m {
        return Ok(BruteWidth { value: 0.0, restarts, converged: restarts, flagged: false });
    }
    let points = extreme_points(p, m, radius);
    if n == 0 {
        let value = match &points {
            Some(pts) => pts.iter().map(|x| lq(x, q)).fold(0.0, f64::max),
            None => radius * sphere_max_lq(q, m),
        };
        return Ok(BruteWidth { value, restarts, converged: restarts, flagged: false });
    }
    let objective = Objective::new(kind, p, q, m, n, radius, points)?;
    let dim = m * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut converged = 0;
    for _ in 0..restarts {
        let start: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (value, ok) = local_search(&objective, start)?;
        best = best.min(value);
        converged += ok as usize;
    }
    Ok(BruteWidth { value: best, restarts, converged, flagged: converged == 0 })
}

/// max ||x||_q over the Euclidean unit sphere of R^m.
fn sphere_max_lq(q: f64, m: usize) -> f64 {
    (m as f64).powf((inv(q) - 0.5).max(0.0))
}

fn lq(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |a, v| a.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Vertices of b_p^m for p in {1, inf}; other balls are not polytopes.
fn extreme_points(p: f64, m: usize, radius: f64) -> Option<Vec<Vec<f64>>> {
    if p.is_infinite() {
        Some(
            (0..1usize << m)
                .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { radius } else { -radius }).collect())
                .collect(),
        )
    } else if p == 1.0 {
        let mut v = Vec::new();
        for i in 0..m {
            for s in [radius, -radius] {
                let mut x = vec![0.0; m];
                x[i] = s;
                v.push(x);
            }
        }
        Some(v)
    } else {
        None
    }
}

enum Mode {
    /// Kolmogorov: sup over vertices of the l_q distance to span(B).
    Distance { points: Vec<Vec<f64>> },
    /// Kolmogorov with p = q = 2: operator norm of I - P.
    Residual,
    /// Gelfand with p = inf, q = 1: vertices of the cube cut by ker A.
    CubeSection,
    /// Gelfand with p = 2, q = inf: max_i ||P_ker e_i||.
    EuclideanSection,
}

struct Objective {
    m: usize,
    n: usize,
    q: f64,
    radius: f64,
    mode: Mode,
}

impl Objective {
    fn new(kind: WidthKind, p: f64, q: f64, m: usize, n: usize, radius: f64, points: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let unsupported = || Err(Error::Unsupported(format!("no brute-force search for {kind} width of b_{p} in l_{q}")));
        let mode = match kind {
            WidthKind::Kolmogorov if p == 2.0 && q == 2.0 => Mode::Residual,
            WidthKind::Kolmogorov if q == 1.0 || q == 2.0 => match points {
                Some(points) => Mode::Distance { points },
                None => return unsupported(),
            },
            WidthKind::Gelfand if p.is_infinite() && q == 1.0 => Mode::CubeSection,
            WidthKind::Gelfand if p == 2.0 && q.is_infinite() => Mode::EuclideanSection,
            _ => return unsupported(),
        };
        Ok(Objective { m, n, q, radius, mode })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (m, n) = (self.m, self.n);
        match &self.mode {
            Mode::Distance { points } => {
                let b = DMatrix::from_column_slice(m, n, x);
                points.iter().map(|v| distance(&b, v, self.q)).fold(0.0, f64::max)
            }
            Mode::Residual => {
                let b = DMatrix::from_column_slice(m, n, x);
                let proj = projector(&b);
                let resid = DMatrix::identity(m, m) - proj;
                self.radius * resid.singular_values().max()
            }
            Mode::CubeSection => {
                let a = DMatrix::from_column_slice(n, m, x);
                self.radius * cube_section_max_l1(&a)
            }
            Mode::EuclideanSection => {
                let a = DMatrix::from_column_slice(n, m, x);
                let proj = DMatrix::identity(m, m) - projector(&a.transpose());
                let best = (0..m).map(|i| proj.column(i).norm()).fold(0.0, f64::max);
                self.radius * best
            }
        }
    }
}

/// Orthogonal projector onto the column span of b.
fn projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = b.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let tol = 1e-10 * svd.singular_values.max().max(1e-300);
    let mut proj = DMatrix::zeros(b.nrows(), b.nrows());
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > tol {
            let col = u.column(k);
            proj += col * col.transpose();
        }
    }
    proj
}

/// l_q distance from v to the column span of b, q in {1, 2}.
fn distance(b: &DMatrix<f64>, v: &[f64], q: f64) -> f64 {
    let x = DVector::from_column_slice(v);
    if q == 2.0 {
        return (&x - projector(b) * &x).norm();
    }
    // An l_1 best approximation interpolates v on n coordinates.
    let (m, n) = b.shape();
    let mut best = x.iter().map(|t| t.abs()).sum::<f64>();
    for rows in subsets(m, n) {
        let sub = DMatrix::from_fn(n, n, |i, j| b[(rows[i], j)]);
        let rhs = DVector::from_fn(n, |i, _| x[rows[i]]);
        if let Some(c) = sub.lu().solve(&rhs) {
            let resid: f64 = (&x - b * c).iter().map(|t| t.abs()).sum();
            if resid.is_finite() {
                best = best.min(resid);
            }
        }
    }
    best
}

/// max ||x||_1 over the unit cube intersected with ker a.
fn cube_section_max_l1(a: &DMatrix<f64>) -> f64 {
    let (n, m) = a.shape();
    let mut best: f64 = 0.0;
    // Each vertex has at least m - n coordinates at +-1.
    for fixed in subsets(m, m - n) {
        let free: Vec<usize> = (0..m).filter(|i| !fixed.contains(i)).collect();
        let sub = DMatrix::from_fn(n, free.len(), |i, j| a[(i, free[j])]);
        let lu = sub.lu();
        for mask in 0..1usize << fixed.len() {
            let sign = |k: usize| if mask >> k & 1 == 1 { 1.0 } else { -1.0 };
            let rhs = DVector::from_fn(n, |i, _| -(0..fixed.len()).map(|k| a[(i, fixed[k])] * sign(k)).sum::<f64>());
            let Some(y) = lu.solve(&rhs) else { continue };
            if y.iter().all(|v| v.abs() <= 1.0 + 1e-12) {
                best = best.max(fixed.len() as f64 + y.iter().map(|v| v.abs()).sum::<f64>());
            }
        }
    }
    best
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0..1usize << m)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

fn local_search(objective: &Objective, start: Vec<f64>) -> Result<(f64, bool)> {
    let dim = start.len();
    let mut simplex = vec![start.clone()];
    for i in 0..dim {
        let mut v = start.clone();
        v[i] += 0.5;
        simplex.push(v);
    }
    let mut converged = false;
    let mut best_value = f64::INFINITY;
    let mut current = start;
    // Restart the simplex around the incumbent a few times; Nelder-Mead
    // stalls easily on max-type objectives.
    for round in 0..4 {
        if round > 0 {
            let step = 0.25 / (round as f64);
            simplex = vec![current.clone()];
            for i in 0..dim {
                let mut v = current.clone();
                v[i] += step;
                simplex.push(v);
            }
        }
        let solver = NelderMead::new(simplex.clone())
            .with_sd_tolerance(1e-13)
            .map_err(|e| Error::Precision(format!("optimiser setup failed: {e}")))?;
        let res = Executor::new(objective, solver)
            .configure(|s| s.max_iters(4000))
            .run()
            .map_err(|e| Error::Precision(format!("optimiser failed: {e}")))?;
        let state = res.state();
        converged = matches!(state.get_termination_reason(), Some(TerminationReason::SolverConverged));
        if let Some(p) = state.get_best_param() {
            current = p.clone();
        }
        best_value = best_value.min(state.get_best_cost());
    }
    Ok((best_value, converged))
}

impl CostFunction for &Objective {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(x))
    }
}

/// Gluskin's shape m^{1/p'} n^{-1/2} log^{1/2}(1 + m/n) for the linear
/// widths of b_p^m in l_{p'}^m, with constant 1.
pub fn gluskin_upper(p: f64, m: usize, n: usize) -> Result<f64> {
    check_exponent(p)?;
    if p > 2.0 {
        return domain(format!("Gluskin's estimate needs 1 <= p <= 2, got {p}"));
    }
    if n == 0 || n > m {
        return domain(format!("need 1 <= n <= m, got n = {n}, m = {m}"));
    }
    let (m, n) = (m as f64, n as f64);
    Ok(m.powf(inv(conjugate(p))) * n.powf(-0.5) * (1.0 + m / n).ln().sqrt())
}
