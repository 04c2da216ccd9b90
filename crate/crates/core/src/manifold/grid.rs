use super::spectrum::{max_frequency, sphere_degree};
use super::{ManifoldModel, ModelKind, Point};
use crate::error::{domain, Error, Result};
use crate::quadrature::gauss_legendre;
use std::f64::consts::TAU;

/// Grids larger than this are refused with a resource error.
pub const MAX_GRID_NODES: usize = 8_000_000;

/// Product structure of a reference grid, used by fast evaluators.
#[derive(Clone, Debug)]
pub enum GridLayout {
    /// `n` equispaced angles `2 pi j / n`.
    Uniform { n: usize },
    /// `n x n` equispaced angles, row-major in the first angle.
    Product { n: usize },
    /// Gauss-Legendre colatitudes times `n_phi` equispaced longitudes.
    GaussSphere { colatitudes: Vec<f64>, n_phi: usize },
}

/// Quadrature grid with positive weights that integrates every product
/// u_l u_l' with both eigenvalues at most `safe_bandwidth` exactly.
#[derive(Clone, Debug)]
pub struct ReferenceGrid {
    pub model: ManifoldModel,
    pub safe_bandwidth: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub layout: GridLayout,
}

impl ReferenceGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Per-dimension node count (colatitude count on the sphere).
    pub fn resolution(&self) -> usize {
        match &self.layout {
            GridLayout::Uniform { n } | GridLayout::Product { n } => *n,
            GridLayout::GaussSphere { colatitudes, .. } => colatitudes.len(),
        }
    }

    /// Largest gap between neighbouring nodes along a coordinate.
    pub fn spacing(&self) -> f64 {
        match &self.layout {
            GridLayout::Uniform { n } | GridLayout::Product { n } => TAU / *n as f64,
            GridLayout::GaussSphere { n_phi, .. } => TAU / *n_phi as f64,
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Minimal product-exact grid for the band `safe_bandwidth`.
pub fn reference_grid(model: &ManifoldModel, safe_bandwidth: f64) -> Result<ReferenceGrid> {
    if !safe_bandwidth.is_finite() || safe_bandwidth < 0.0 {
        return domain("safe bandwidth must be finite and non-negative");
    }
    let res = match model.kind() {
        ModelKind::Circle | ModelKind::Torus2 => 2 * max_frequency(safe_bandwidth) + 2,
        ModelKind::Sphere2 => sphere_degree(safe_bandwidth) + 1,
    };
    let mut g = reference_grid_with_resolution(model, res)?;
    g.safe_bandwidth = safe_bandwidth;
    Ok(g)
}

/// Grid with an explicit per-dimension resolution. On the sphere `res`
/// is the number of colatitudes and longitudes number `2 res`.
pub fn reference_grid_with_resolution(model: &ManifoldModel, res: usize) -> Result<ReferenceGrid> {
    if res == 0 {
        return domain("grid resolution must be positive");
    }
    let total = match model.kind() {
        ModelKind::Circle => res,
        ModelKind::Torus2 => res.saturating_mul(res),
        ModelKind::Sphere2 => res.saturating_mul(2 * res),
    };
    if total > MAX_GRID_NODES {
        return Err(Error::Resource(format!(
            "reference grid with {total} nodes exceeds the budget of {MAX_GRID_NODES}"
        )));
    }
    let (nodes, weights, layout, safe) = match model.kind() {
        ModelKind::Circle => {
            let h = TAU / res as f64;
            let nodes = (0..res).map(|j| Point::circle(h * j as f64)).collect();
            let k = (res - 1) / 2;
            (nodes, vec![h; res], GridLayout::Uniform { n: res }, (k * k) as f64)
        }
        ModelKind::Torus2 => {
            let h = TAU / res as f64;
            let mut nodes = Vec::with_capacity(total);
            for i in 0..res {
                for j in 0..res {
                    nodes.push(Point::torus(h * i as f64, h * j as f64));
                }
            }
            let k = (res - 1) / 2;
            (nodes, vec![h * h; total], GridLayout::Product { n: res }, (k * k) as f64)
        }
        ModelKind::Sphere2 => {
            let n_phi = 2 * res;
            let (x, w) = gauss_legendre(res);
            let h = TAU / n_phi as f64;
            let mut nodes = Vec::with_capacity(total);
            let mut weights = Vec::with_capacity(total);
            let colat: Vec<f64> = x.iter().rev().map(|z| z.clamp(-1.0, 1.0).acos()).collect();
            let wr: Vec<f64> = w.iter().rev().copied().collect();
            for (th, wi) in colat.iter().zip(&wr) {
                for j in 0..n_phi {
                    nodes.push(Point::sphere(*th, h * j as f64));
                    weights.push(wi * h);
                }
            }
            let l = res - 1;
            (nodes, weights, GridLayout::GaussSphere { colatitudes: colat, n_phi }, (l * (l + 1)) as f64)
        }
    };
    Ok(ReferenceGrid { model: *model, safe_bandwidth: safe, nodes, weights, layout })
}

#[cfg(test)]
mod tests {
    use super::super::enumerate_spectrum;
    use super::*;

    fn gram_error(model: ManifoldModel, omega: f64) -> f64 {
        let spec = enumerate_spectrum(&model, omega).unwrap();
        let grid = reference_grid(&model, omega).unwrap();
        let n = spec.len();
        let mut g = vec![0.0; n * n];
        for (p, w) in grid.nodes.iter().zip(&grid.weights) {
            let v = spec.eval_all(p);
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[i * n + j] - e).abs());
            }
        }
        err
    }

    #[test]
    fn grids_integrate_gram_matrix() {
        assert!(gram_error(ManifoldModel::circle(), 16.0) < 1e-12);
        assert!(gram_error(ManifoldModel::torus2(), 10.0) < 1e-12);
        assert!(gram_error(ManifoldModel::sphere2(), 30.0) < 1e-12);
    }

    #[test]
    fn circle_grid_size_example() {
        let g = reference_grid(&ManifoldModel::circle(), 25.0).unwrap();
        assert_eq!(g.len(), 12);
    }

    #[test]
    fn huge_grid_is_refused() {
        let r = reference_grid(&ManifoldModel::torus2(), 1e9);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn weights_sum_to_measure() {
        for kind in ModelKind::ALL {
            let m = ManifoldModel::new(kind);
            let g = reference_grid(&m, 20.0).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!((total - m.mu_total()).abs() < 1e-12);
        }
    }
}
