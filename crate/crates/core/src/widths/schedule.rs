//! Dyadic allocation of dimensions across spectral blocks and the chained
//! upper bound for linear widths built on it.

use super::exponents::{check_exponent, conjugate, inv};
use super::sequence::gluskin_upper;
use crate::error::{domain, Result};
use crate::manifold::ManifoldModel;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub v: u32,
    pub rho: f64,
    /// Block dimensions m_k = 2^{s(k+1)}.
    pub m: Vec<u64>,
    /// Allocated dimensions n_k; blocks beyond the vector get 0.
    pub n: Vec<u64>,
    pub total: u64,
    /// (total + 1) / 2^{s v}.
    pub c1: f64,
}

impl Schedule {
    /// First block with n_k = 0 beyond v, i.e. ceil((1 + 1/rho) v).
    pub fn end(&self) -> usize {
        self.n.len()
    }
}

fn feasible_rho(r: f64, s: usize, p: f64) -> Result<f64> {
    let gap = r / s as f64 - inv(p);
    if gap <= 0.0 {
        return domain(format!("need r > s/p, got r = {r}, s = {s}, p = {p}; the rho interval is empty"));
    }
    Ok(2.0 * gap)
}

fn schedule_for(s: usize, v: u32, rho: f64) -> Option<Schedule> {
    let s = s as u32;
    let end = ((1.0 + 1.0 / rho) * v as f64 - 1e-12).ceil() as u32;
    let mut m = Vec::new();
    let mut n = Vec::new();
    let mut total: u64 = 0;
    for k in 0..end.max(v + 1) {
        let mk = 1u64.checked_shl(s * (k + 1))?;
        let nk = if k <= v {
            mk
        } else {
            let e = s as f64 * ((1.0 + rho) * v as f64 - k as f64 * rho);
            2f64.powf(e).floor() as u64
        };
        total = total.checked_add(nk)?;
        m.push(mk);
        n.push(nk);
    }
    let c1 = (total + 1) as f64 / 2f64.powi((s * v) as i32);
    Some(Schedule { v, rho, m, n, total, c1 })
}

/// Largest v with sum n_k <= n - 1.
pub fn allocation_schedule(r: f64, s: usize, p: f64, n: u64, rho: f64) -> Result<Schedule> {
    check_exponent(p)?;
    if s == 0 {
        return domain("dimension s must be positive");
    }
    let upper = feasible_rho(r, s, p)?;
    if !(rho > 0.0 && rho < upper) {
        return domain(format!("rho must lie in (0, {upper}), got {rho}"));
    }
    let mut best = None;
    for v in 1..64 {
        match schedule_for(s, v, rho) {
            Some(sch) if sch.total < n => best = Some(sch),
            _ => break,
        }
    }
    best.ok_or_else(|| crate::Error::Domain(format!("n = {n} is too small for a schedule with v >= 1")))
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineBound {
    pub bound: f64,
    /// -r/s + 1/p - 1/2.
    pub exponent: f64,
    pub schedule: Schedule,
    /// Contribution of the blocks with a Gluskin estimate.
    pub middle: f64,
    /// Contribution of the blocks past the schedule, summed in closed form.
    pub tail: f64,
}

/// Chained bound sum_k 2^{-kr} 2^{ks(2/p-1)} bound_k with rho at the middle
/// of its admissible interval.
pub fn linear_width_pipeline(model: &ManifoldModel, r: f64, p: f64, q: f64, n: u64) -> Result<PipelineBound> {
    let rho = feasible_rho(r, model.dim(), p)? / 2.0;
    linear_width_pipeline_with(model, r, p, q, n, rho)
}

pub fn linear_width_pipeline_with(
    model: &ManifoldModel,
    r: f64,
    p: f64,
    q: f64,
    n: u64,
    rho: f64,
) -> Result<PipelineBound> {
    check_exponent(p)?;
    check_exponent(q)?;
    let s = model.dim();
    if !(p <= 2.0) {
        return domain(format!("need p <= 2, got {p}"));
    }
    if !(q >= 2.0) {
        return domain(format!("need q >= 2, got {q}"));
    }
    let pc = conjugate(p);
    if q > pc {
        return domain(format!("need q <= p' = {pc}, got {q}"));
    }
    if !(r > s as f64 * inv(p)) {
        return domain(format!("need r > s/p = {}, got {r}", s as f64 * inv(p)));
    }
    let schedule = allocation_schedule(r, s, p, n, rho)?;
    let sf = s as f64;
    let log_ratio = -r + sf * (2.0 * inv(p) - 1.0);
    let weight = |k: usize| 2f64.powf(k as f64 * log_ratio);
    let mut middle = 0.0;
    for k in (schedule.v as usize + 1)..schedule.end() {
        let nk = schedule.n[k];
        let bk = if nk == 0 { 1.0 } else { gluskin_upper(p, schedule.m[k] as usize, nk as usize)?.min(1.0) };
        middle += weight(k) * bk;
    }
    let a = 2f64.powf(log_ratio);
    let tail = weight(schedule.end()) / (1.0 - a);
    Ok(PipelineBound {
        bound: middle + tail,
        exponent: -r / sf + inv(p) - 0.5,
        schedule,
        middle,
        tail,
    })
}
