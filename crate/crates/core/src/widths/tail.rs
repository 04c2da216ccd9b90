use super::exponents::{basic_exponent, check_exponent, inv};
use crate::error::{domain, Error, Result};
use crate::manifold::{count_eigenvalues, ManifoldModel};
use crate::spectral::block_upper;
use serde::Serialize;

/// Blocks summed explicitly past M before the geometric tail takes over.
pub const DEFAULT_EXTRA_BLOCKS: u32 = 6;

#[derive(Clone, Debug, Serialize)]
pub struct TailBound {
    pub m: u32,
    /// dim E_{4^M}, the rank of the approximating filter.
    pub n_dim: usize,
    /// Upper certificate for delta_{n_dim}(B_p^r, L_q).
    pub bound: f64,
    pub blocks: Vec<f64>,
    pub tail: f64,
    /// Ratio used for the geometric tail.
    pub ratio: f64,
    /// Scale factor from the reduction q < p to q = p.
    pub reduction: f64,
}

/// Upper certificate from the Littlewood-Paley tail sum_{j >= M} ||phi_j(L)||.
pub fn eta_tail_bound(model: &ManifoldModel, r: f64, p: f64, q: f64, m: u32) -> Result<TailBound> {
    eta_tail_bound_with(model, r, p, q, m, DEFAULT_EXTRA_BLOCKS)
}

pub fn eta_tail_bound_with(model: &ManifoldModel, r: f64, p: f64, q: f64, m: u32, extra: u32) -> Result<TailBound> {
    check_exponent(p)?;
    check_exponent(q)?;
    let s = model.dim();
    if basic_exponent(p, q, r, s) >= 0.0 {
        return domain(format!("basic exponent is not negative for p = {p}, q = {q}, r = {r}"));
    }
    if extra < 2 {
        return domain("need at least two explicit blocks to certify the tail");
    }
    // ||f||_q <= mu^{1/q - 1/p} ||f||_p reduces q < p to q = p.
    let (q_eff, reduction) = if q < p { (p, model.mu_total().powf(inv(q) - inv(p))) } else { (q, 1.0) };
    let j_max = m + extra;
    let blocks: Vec<f64> = (m..=j_max).map(|j| block_upper(model, j, p, q_eff, r)).collect::<Result<_>>()?;
    let last = blocks[blocks.len() - 1];
    let prev = blocks[blocks.len() - 2];
    let theory = 2f64.powf(s as f64 * basic_exponent(p, q_eff, r, s));
    let measured = last / prev;
    if !(measured < 1.0) || (measured / theory - 1.0).abs() > 0.1 {
        return Err(Error::Precision(format!(
            "block ratio {measured:.4} has not settled at {theory:.4} by j = {j_max}; raise the block count"
        )));
    }
    let ratio = measured.max(theory);
    let tail = last * ratio / (1.0 - ratio);
    let bound = reduction * (blocks.iter().sum::<f64>() + tail);
    let n_dim = count_eigenvalues(model, 4f64.powi(m as i32));
    Ok(TailBound { m, n_dim, bound, blocks, tail, ratio, reduction })
}
