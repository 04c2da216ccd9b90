use crate::error::{domain, Result};
use crate::manifold::{count_eigenvalues, enumerate_spectrum, ManifoldModel};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct EllipsoidWidth {
    pub n: usize,
    /// d_n of the graph-norm ball {||f||_2 + ||L^{r/2} f||_2 <= 1} in L_2.
    pub value: f64,
    /// (1 + lambda_n^{r/2})^{-1}.
    pub oracle: f64,
    /// d_n of the quadratic-mean ball {||f||_2^2 + ||L^{r/2} f||_2^2 <= 1}.
    pub hilbert_value: f64,
}

/// Kolmogorov widths of the L_2 Sobolev ball for every n in `ns`.
///
/// The ball is unconditional in the eigenbasis, so the optimal n-dimensional
/// subspace is spanned by the n lowest modes and the worst element is the
/// cheapest remaining mode: d_n = 1 / min_{k >= n} (1 + lambda_k^{r/2}).
pub fn ellipsoid_widths(model: &ManifoldModel, r: f64, ns: &[usize]) -> Result<Vec<EllipsoidWidth>> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("smoothness r must be positive, got {r}"));
    }
    let Some(&top) = ns.iter().max() else { return Ok(Vec::new()) };
    // Load enough of the spectrum to hold index top plus a margin.
    let mut omega = 16.0;
    while count_eigenvalues(model, omega) <= 2 * top + 8 {
        omega *= 2.0;
        if omega > 1e12 {
            return domain(format!("n = {top} lies beyond the loadable spectrum"));
        }
    }
    let spec = enumerate_spectrum(model, omega)?;
    let lambdas = spec.eigenvalues();
    // Suffix minima of the graph-norm cost of a single mode.
    let cost: Vec<f64> = lambdas.iter().map(|l| 1.0 + l.powf(0.5 * r)).collect();
    let mut suffix = cost.clone();
    for k in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[k] = suffix[k].min(suffix[k + 1]);
    }
    ns.iter()
        .map(|&n| {
            if n + 1 >= lambdas.len() {
                return domain(format!("n = {n} lies beyond the loaded spectrum"));
            }
            let lam = lambdas[n];
            Ok(EllipsoidWidth {
                n,
                value: 1.0 / suffix[n],
                oracle: 1.0 / (1.0 + lam.powf(0.5 * r)),
                hilbert_value: 1.0 / (1.0 + lam.powf(r)).sqrt(),
            })
        })
        .collect()
}
