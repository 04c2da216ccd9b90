use super::legendre::{lm_index, normalized_legendre};
use super::{ManifoldModel, ModelKind, Point};
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

/// Label of a real eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EigenLabel {
    Circle { k: u32, parity: Parity },
    Torus { k1: i32, k2: i32, parity: Parity },
    Sphere { l: u32, m: i32 },
}

impl fmt::Display for EigenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |p: &Parity| if *p == Parity::Cos { "cos" } else { "sin" };
        match self {
            EigenLabel::Circle { k, parity } => write!(f, "k={k}:{}", p(parity)),
            EigenLabel::Torus { k1, k2, parity } => write!(f, "k=({k1};{k2}):{}", p(parity)),
            EigenLabel::Sphere { l, m } => write!(f, "l={l};m={m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenIndex {
    pub ordinal: usize,
    pub lambda: f64,
    pub label: EigenLabel,
}

/// All eigenpairs with eigenvalue at most `omega`, sorted by eigenvalue
/// and then by label.
#[derive(Clone, Debug)]
pub struct Spectrum {
    model: ManifoldModel,
    omega: f64,
    entries: Vec<EigenIndex>,
    kmax: usize,
}

fn floor_sqrt(x: f64) -> usize {
    if x < 0.0 {
        return 0;
    }
    let mut k = x.sqrt().floor() as usize;
    while ((k + 1) * (k + 1)) as f64 <= x {
        k += 1;
    }
    while k > 0 && ((k * k) as f64) > x {
        k -= 1;
    }
    k
}

/// Largest l with l(l+1) <= omega.
pub(crate) fn sphere_degree(omega: f64) -> usize {
    let mut l = ((omega + 0.25).max(0.0).sqrt() - 0.5).floor().max(0.0) as usize;
    while ((l + 1) * (l + 2)) as f64 <= omega {
        l += 1;
    }
    while l > 0 && ((l * (l + 1)) as f64) > omega {
        l -= 1;
    }
    l
}

/// Largest integer frequency k with k^2 <= omega.
pub(crate) fn max_frequency(omega: f64) -> usize {
    floor_sqrt(omega)
}

/// Eigenvalue counting function N(omega) = dim E_omega.
pub fn count_eigenvalues(model: &ManifoldModel, omega: f64) -> usize {
    if omega < 0.0 {
        return 0;
    }
    match model.kind() {
        ModelKind::Circle => 2 * floor_sqrt(omega) + 1,
        ModelKind::Torus2 => {
            let k = floor_sqrt(omega);
            (0..=k)
                .map(|k1| {
                    let rows = 2 * floor_sqrt(omega - (k1 * k1) as f64) + 1;
                    if k1 == 0 {
                        rows
                    } else {
                        2 * rows
                    }
                })
                .sum()
        }
        ModelKind::Sphere2 => {
            let l = sphere_degree(omega);
            (l + 1) * (l + 1)
        }
    }
}

pub fn enumerate_spectrum(model: &ManifoldModel, omega: f64) -> Result<Spectrum> {
    if !omega.is_finite() || omega < 0.0 {
        return domain(format!("bandwidth must be finite and non-negative, got {omega}"));
    }
    let mut entries = Vec::new();
    let kmax;
    match model.kind() {
        ModelKind::Circle => {
            kmax = floor_sqrt(omega);
            for k in 0..=kmax {
                let lambda = (k * k) as f64;
                entries.push((lambda, EigenLabel::Circle { k: k as u32, parity: Parity::Cos }));
                if k > 0 {
                    entries.push((lambda, EigenLabel::Circle { k: k as u32, parity: Parity::Sin }));
                }
            }
        }
        ModelKind::Torus2 => {
            kmax = floor_sqrt(omega);
            let kk = kmax as i32;
            for k1 in 0..=kk {
                for k2 in -kk..=kk {
                    let lambda = (k1 * k1 + k2 * k2) as f64;
                    if lambda > omega || (k1 == 0 && k2 < 0) {
                        continue;
                    }
                    entries.push((lambda, EigenLabel::Torus { k1, k2, parity: Parity::Cos }));
                    if k1 != 0 || k2 != 0 {
                        entries.push((lambda, EigenLabel::Torus { k1, k2, parity: Parity::Sin }));
                    }
                }
            }
        }
        ModelKind::Sphere2 => {
            kmax = sphere_degree(omega);
            for l in 0..=kmax as i32 {
                let lambda = (l * (l + 1)) as f64;
                for m in -l..=l {
                    entries.push((lambda, EigenLabel::Sphere { l: l as u32, m }));
                }
            }
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let entries = entries
        .into_iter()
        .enumerate()
        .map(|(ordinal, (lambda, label))| EigenIndex { ordinal, lambda, label })
        .collect();
    Ok(Spectrum { model: *model, omega, entries, kmax })
}

impl Spectrum {
    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EigenIndex] {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// Largest frequency (circle, torus) or degree (sphere) present.
    pub fn max_degree(&self) -> usize {
        self.kmax
    }

    /// Distinct eigenvalues with the ordinal range of each eigenspace.
    pub fn eigenspaces(&self) -> Vec<(f64, std::ops::Range<usize>)> {
        let mut out: Vec<(f64, std::ops::Range<usize>)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some((lam, r)) if *lam == e.lambda => r.end = e.ordinal + 1,
                _ => out.push((e.lambda, e.ordinal..e.ordinal + 1)),
            }
        }
        out
    }

    /// Number of eigenpairs with eigenvalue at most `omega`.
    pub fn count_upto(&self, omega: f64) -> usize {
        self.entries.partition_point(|e| e.lambda <= omega)
    }

    /// Values of every basis function at `x`, in ordinal order.
    pub fn eval_all(&self, x: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut scratch = Vec::new();
        self.eval_all_into(x, &mut out, &mut scratch);
        out
    }

    /// Allocation-free variant of [`Spectrum::eval_all`].
    pub fn eval_all_into(&self, x: &Point, out: &mut [f64], scratch: &mut Vec<f64>) {
        match self.model.kind() {
            ModelKind::Circle => {
                let c0 = 1.0 / TAU.sqrt();
                let ck = 1.0 / PI.sqrt();
                for (o, e) in out.iter_mut().zip(&self.entries) {
                    if let EigenLabel::Circle { k, parity } = e.label {
                        *o = if k == 0 {
                            c0
                        } else {
                            let arg = k as f64 * x.a;
                            ck * if parity == Parity::Cos { arg.cos() } else { arg.sin() }
                        };
                    }
                }
            }
            ModelKind::Torus2 => {
                let k = self.kmax;
                scratch.clear();
                scratch.resize(4 * (k + 1), 0.0);
                let (c1, rest) = scratch.split_at_mut(k + 1);
                let (s1, rest) = rest.split_at_mut(k + 1);
                let (c2, s2) = rest.split_at_mut(k + 1);
                for j in 0..=k {
                    let (s, c) = (j as f64 * x.a).sin_cos();
                    c1[j] = c;
                    s1[j] = s;
                    let (s, c) = (j as f64 * x.b).sin_cos();
                    c2[j] = c;
                    s2[j] = s;
                }
                let c0 = 1.0 / TAU;
                let ck = 1.0 / (PI * 2f64.sqrt());
                for (o, e) in out.iter_mut().zip(&self.entries) {
                    if let EigenLabel::Torus { k1, k2, parity } = e.label {
                        if k1 == 0 && k2 == 0 {
                            *o = c0;
                            continue;
                        }
                        let a = k1 as usize;
                        let b = k2.unsigned_abs() as usize;
                        let sg = if k2 < 0 { -1.0 } else { 1.0 };
                        let (cb, sb) = (c2[b], sg * s2[b]);
                        *o = ck * match parity {
                            Parity::Cos => c1[a] * cb - s1[a] * sb,
                            Parity::Sin => s1[a] * cb + c1[a] * sb,
                        };
                    }
                }
            }
            ModelKind::Sphere2 => {
                let lmax = self.kmax;
                let (st, ct) = x.a.sin_cos();
                normalized_legendre(lmax, ct, st, scratch);
                let r2 = 2f64.sqrt();
                let mut trig = vec![(1.0, 0.0); lmax + 1];
                for (m, t) in trig.iter_mut().enumerate().skip(1) {
                    let (s, c) = (m as f64 * x.b).sin_cos();
                    *t = (c, s);
                }
                for (o, e) in out.iter_mut().zip(&self.entries) {
                    if let EigenLabel::Sphere { l, m } = e.label {
                        let p = scratch[lm_index(l as usize, m.unsigned_abs() as usize)];
                        *o = match m.cmp(&0) {
                            std::cmp::Ordering::Equal => p,
                            std::cmp::Ordering::Greater => r2 * p * trig[m as usize].0,
                            std::cmp::Ordering::Less => r2 * p * trig[(-m) as usize].1,
                        };
                    }
                }
            }
        }
    }

    /// Value of a single eigenfunction.
    pub fn eval(&self, ordinal: usize, x: &Point) -> f64 {
        self.eval_all(x)[ordinal]
    }

    /// Ordinals ordered by label, for lookups.
    pub fn find(&self, label: &EigenLabel) -> Option<usize> {
        self.entries.iter().position(|e| e.label == *label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_example_matches() {
        let s = enumerate_spectrum(&ManifoldModel::circle(), 4.0).unwrap();
        let l: Vec<f64> = s.eigenvalues();
        assert_eq!(l, vec![0.0, 1.0, 1.0, 4.0, 4.0]);
    }

    #[test]
    fn sphere_example_matches() {
        let s = enumerate_spectrum(&ManifoldModel::sphere2(), 6.0).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.eigenspaces().iter().map(|(l, r)| (*l, r.len())).collect::<Vec<_>>(),
            vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
    }

    #[test]
    fn torus_count_at_100() {
        let m = ManifoldModel::torus2();
        let s = enumerate_spectrum(&m, 100.0).unwrap();
        assert_eq!(s.len(), 317);
        assert_eq!(count_eigenvalues(&m, 100.0), 317);
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for kind in ModelKind::ALL {
            let m = ManifoldModel::new(kind);
            for om in [0.0, 0.5, 1.0, 2.0, 5.0, 12.0, 30.5, 99.0] {
                assert_eq!(enumerate_spectrum(&m, om).unwrap().len(), count_eigenvalues(&m, om));
            }
        }
    }

    #[test]
    fn negative_bandwidth_rejected() {
        assert!(enumerate_spectrum(&ManifoldModel::circle(), -1.0).is_err());
    }
}
