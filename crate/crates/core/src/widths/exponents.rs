use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which n-width is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthKind {
    /// d_n: best n-dimensional subspace.
    Kolmogorov,
    /// d^n: best subspace of codimension n.
    Gelfand,
    /// delta_n: best rank-n linear operator.
    Linear,
}

impl WidthKind {
    pub const ALL: [WidthKind; 3] = [WidthKind::Kolmogorov, WidthKind::Gelfand, WidthKind::Linear];

    pub fn name(self) -> &'static str {
        match self {
            WidthKind::Kolmogorov => "kolmogorov",
            WidthKind::Gelfand => "gelfand",
            WidthKind::Linear => "linear",
        }
    }
}

impl fmt::Display for WidthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WidthKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kolmogorov" | "d_n" | "dn" => Ok(WidthKind::Kolmogorov),
            "gelfand" | "d^n" => Ok(WidthKind::Gelfand),
            "linear" | "delta_n" | "delta" => Ok(WidthKind::Linear),
            other => domain(format!("unknown width kind '{other}'")),
        }
    }
}

/// Parameters of a width question for the Sobolev ball B_p^r in L_q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthQuery {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub kind: WidthKind,
    pub n: usize,
}

impl WidthQuery {
    pub fn new(p: f64, q: f64, r: f64, kind: WidthKind, n: usize) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("smoothness r must be positive, got {r}"));
        }
        Ok(WidthQuery { p, q, r, kind, n })
    }

    /// Basic exponent for a manifold of dimension s.
    pub fn basic_exponent(&self, s: usize) -> f64 {
        basic_exponent(self.p, self.q, self.r, s)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return domain(format!("exponent must lie in [1, inf], got {p}"));
    }
    Ok(())
}

/// 1/p with 1/inf = 0.
pub(crate) fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Hoelder conjugate.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// -r/s + (1/p - 1/q)_+.
pub fn basic_exponent(p: f64, q: f64, r: f64, s: usize) -> f64 {
    -r / s as f64 + (inv(p) - inv(q)).max(0.0)
}

/// Predicted decay exponent of a width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "exponent", rename_all = "snake_case")]
pub enum Prediction {
    /// Matching upper and lower rates are known.
    Exact(f64),
    /// Only the basic upper rate is known.
    UpperOnly(f64),
    NotCovered,
}

impl Prediction {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Prediction::Exact(e) | Prediction::UpperOnly(e) => Some(*e),
            Prediction::NotCovered => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prediction::Exact(_))
    }
}

/// Rate of s_n(B_p^r, L_q) on an s-dimensional homogeneous manifold.
pub fn predicted_exponent(p: f64, q: f64, r: f64, s: usize, kind: WidthKind) -> Prediction {
    if p.is_nan() || q.is_nan() || p < 1.0 || q < 1.0 || !(r > 0.0) || s == 0 {
        return Prediction::NotCovered;
    }
    let sf = s as f64;
    let basic = basic_exponent(p, q, r, s);
    if basic >= 0.0 {
        return Prediction::NotCovered;
    }
    let (ip, iq) = (inv(p), inv(q));
    if kind == WidthKind::Gelfand {
        return Prediction::NotCovered;
    }
    if p <= 2.0 && 2.0 <= q {
        let pc = conjugate(p);
        let upper = Prediction::UpperOnly(basic);
        return match kind {
            WidthKind::Kolmogorov if r > sf * ip => Prediction::Exact(-r / sf + ip - 0.5),
            WidthKind::Linear if q <= pc && r > sf * ip => Prediction::Exact(-r / sf + ip - 0.5),
            WidthKind::Linear if q > pc && r > sf * (1.0 - iq) => Prediction::Exact(-r / sf + 0.5 - iq),
            _ => upper,
        };
    }
    if 2.0 <= p && p <= q {
        return match kind {
            WidthKind::Kolmogorov if r > sf * ip => Prediction::Exact(-r / sf),
            WidthKind::Kolmogorov => Prediction::UpperOnly(basic),
            _ => Prediction::Exact(basic),
        };
    }
    Prediction::Exact(basic)
}

/// Least-squares power law value ~ C n^exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_range: (u64, u64),
}

/// Fit log value = intercept + exponent log n. Needs at least four points,
/// one decade of n and positive values.
pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return domain(format!("rate fit needs at least 4 points, got {}", pairs.len()));
    }
    if let Some((n, v)) = pairs.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0) || !v.is_finite()) {
        return domain(format!("rate fit needs positive finite data, got ({n}, {v})"));
    }
    let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return domain(format!("rate fit needs n to span a decade, got [{lo}, {hi}]"));
    }
    let k = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let r_squared = if syy <= 1e-300 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit { exponent, intercept, r_squared, n_range: (lo.round() as u64, hi.round() as u64) })
}
