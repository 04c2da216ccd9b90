//! Scalar profiles F on [0, inf) that generate F(t^2 L).

use crate::error::{domain, Result};
use crate::quadrature::{gauss_legendre, Chebyshev};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Relative level below which a profile counts as negligible.
pub const NEGLIGIBLE: f64 = 1e-16;

#[derive(Clone)]
pub struct FilterProfile {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub vanishes_at_zero: bool,
    pub paley_wiener: bool,
    /// `|F(u)| <= NEGLIGIBLE * max|F|` for every u beyond this point.
    horizon: f64,
    /// `F(u) = 0` exactly for u at or beyond this point, if compactly supported.
    support_end: Option<f64>,
    max_abs: f64,
}

impl fmt::Debug for FilterProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterProfile")
            .field("name", &self.name)
            .field("vanishes_at_zero", &self.vanishes_at_zero)
            .field("paley_wiener", &self.paley_wiener)
            .field("horizon", &self.horizon)
            .field("support_end", &self.support_end)
            .finish()
    }
}

impl FilterProfile {
    /// Profile from a closure. The horizon is located numerically when not given.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: Option<f64>,
        support_end: Option<f64>,
    ) -> Self {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let probe_end = support_end.or(horizon).unwrap_or(1e4);
        let (max_abs, found) = scan(&*f, probe_end);
        let horizon = support_end.or(horizon).unwrap_or(found);
        let vanishes_at_zero = f(0.0) == 0.0;
        FilterProfile {
            name: name.into(),
            f,
            vanishes_at_zero,
            paley_wiener: false,
            horizon,
            support_end,
            max_abs,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if let Some(end) = self.support_end {
            if u >= end {
                return 0.0;
            }
        }
        (self.f)(u)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// F(u) = 1. Has no decay, so kernels of it are refused.
    pub fn one() -> Self {
        FilterProfile {
            name: "one".into(),
            f: Arc::new(|_| 1.0),
            vanishes_at_zero: false,
            paley_wiener: false,
            horizon: f64::INFINITY,
            support_end: None,
            max_abs: 1.0,
        }
    }

    pub fn zero() -> Self {
        FilterProfile {
            name: "zero".into(),
            f: Arc::new(|_| 0.0),
            vanishes_at_zero: true,
            paley_wiener: false,
            horizon: 0.0,
            support_end: Some(0.0),
            max_abs: 0.0,
        }
    }

    /// F(u) = exp(-u).
    pub fn gaussian() -> Self {
        FilterProfile {
            name: "gaussian".into(),
            f: Arc::new(|u: f64| (-u).exp()),
            vanishes_at_zero: false,
            paley_wiener: false,
            horizon: -(NEGLIGIBLE.ln()),
            support_end: None,
            max_abs: 1.0,
        }
    }

    /// F(u) = u exp(-u), the Gaussian-type profile with F(0) = 0.
    pub fn gaussian_vanishing() -> Self {
        let mut p = Self::custom("gaussian_vanishing", |u: f64| u * (-u).exp(), None, None);
        p.vanishes_at_zero = true;
        p
    }

    /// Smooth cutoff equal to 1 on [0, 1] and 0 on [4, inf).
    pub fn eta() -> Self {
        FilterProfile {
            name: "eta".into(),
            f: Arc::new(eta),
            vanishes_at_zero: false,
            paley_wiener: false,
            horizon: 4.0,
            support_end: Some(4.0),
            max_abs: 1.0,
        }
    }

    /// phi(x) = eta(x/4) - eta(x), supported in [1, 16].
    pub fn phi() -> Self {
        FilterProfile {
            name: "phi".into(),
            f: Arc::new(phi),
            vanishes_at_zero: true,
            paley_wiener: false,
            horizon: 16.0,
            support_end: Some(16.0),
            max_abs: 1.0,
        }
    }

    /// Paley-Wiener profile F(u) = h(sqrt u) with h-hat a smooth bump in (-1, 1).
    pub fn paley_wiener() -> Self {
        let pw = pw_table();
        FilterProfile {
            name: "paley_wiener".into(),
            f: Arc::new(|u: f64| pw_h(u.max(0.0).sqrt())),
            vanishes_at_zero: false,
            paley_wiener: true,
            horizon: pw.horizon_xi * pw.horizon_xi,
            support_end: None,
            max_abs: 1.0,
        }
    }

    /// Paley-Wiener bump u^m F_0(u); its transform stays supported in (-1, 1).
    pub fn paley_wiener_bump(m: u32) -> Self {
        let pw = pw_table();
        // Past the horizon h sits at its rounding floor; u^m would amplify it.
        let cut = pw.horizon_xi * pw.horizon_xi;
        let f = move |u: f64| {
            let u = u.max(0.0);
            if u > cut {
                0.0
            } else {
                u.powi(m as i32) * pw_h(u.sqrt())
            }
        };
        let (max_abs, horizon) = scan(&f, pw.horizon_xi * pw.horizon_xi * 1.5);
        FilterProfile {
            name: format!("paley_wiener_bump{m}"),
            f: Arc::new(f),
            vanishes_at_zero: m > 0,
            paley_wiener: true,
            horizon,
            support_end: None,
            max_abs,
        }
    }

    /// Look up one of the named built-in profiles.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(Self::one()),
            "zero" => Ok(Self::zero()),
            "gaussian" => Ok(Self::gaussian()),
            "gaussian_vanishing" => Ok(Self::gaussian_vanishing()),
            "eta" => Ok(Self::eta()),
            "phi" => Ok(Self::phi()),
            "paley_wiener" => Ok(Self::paley_wiener()),
            other => {
                if let Some(m) = other.strip_prefix("paley_wiener_bump") {
                    if let Ok(m) = m.parse::<u32>() {
                        return Ok(Self::paley_wiener_bump(m));
                    }
                }
                domain(format!("unknown profile '{other}'"))
            }
        }
    }

    /// u -> F(u / scale).
    pub fn dilate(&self, scale: f64) -> Self {
        let f = self.f.clone();
        let end = self.support_end.map(|e| e * scale);
        let inner = move |u: f64| f(u / scale);
        FilterProfile {
            name: format!("{}(u/{scale})", self.name),
            f: Arc::new(inner),
            vanishes_at_zero: self.vanishes_at_zero,
            paley_wiener: false,
            horizon: self.horizon * scale,
            support_end: end,
            max_abs: self.max_abs,
        }
    }

    /// u -> u^a F(u). Used for L^{r/2} applied to a filter.
    pub fn times_power(&self, a: f64) -> Self {
        let f = self.f.clone();
        let end = self.support_end;
        let inner = move |u: f64| if u <= 0.0 { if a == 0.0 { f(u) } else { 0.0 } } else { u.powf(a) * f(u) };
        let (max_abs, horizon) = match end {
            Some(e) => (scan(&inner, e).0, e),
            None => scan(&inner, self.horizon * 2.0),
        };
        FilterProfile {
            name: format!("u^{a}*{}", self.name),
            f: Arc::new(inner),
            vanishes_at_zero: a > 0.0 || self.vanishes_at_zero,
            paley_wiener: self.paley_wiener && a.fract() == 0.0,
            horizon,
            support_end: end,
            max_abs,
        }
    }

    /// u -> F(u)^2, the profile of the Gram kernel.
    pub fn squared(&self) -> Self {
        let f = self.f.clone();
        let inner = move |u: f64| {
            let v = f(u);
            v * v
        };
        let (max_abs, found) = match self.support_end {
            Some(e) => (scan(&inner, e).0, e),
            None => scan(&inner, self.horizon * 1.5),
        };
        FilterProfile {
            name: format!("({})^2", self.name),
            f: Arc::new(inner),
            vanishes_at_zero: self.vanishes_at_zero,
            paley_wiener: self.paley_wiener,
            horizon: found,
            support_end: self.support_end,
            max_abs,
        }
    }
}

/// Max |F| on [0, end] and the last point where |F| exceeds the negligible level.
fn scan(f: &dyn Fn(f64) -> f64, end: f64) -> (f64, f64) {
    let n = 20_000;
    let mut pts: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    pts.extend((1..=200).map(|i| end * (1.0 + i as f64 * 0.05)));
    let vals: Vec<f64> = pts.iter().map(|&u| f(u).abs()).collect();
    let max_abs = vals.iter().cloned().fold(0.0, f64::max);
    let level = NEGLIGIBLE * max_abs;
    let mut last = 0.0;
    for (u, v) in pts.iter().zip(&vals) {
        if *v > level {
            last = *u;
        }
    }
    let step = end / n as f64;
    (max_abs, last + step)
}

/// Smooth step S(x): 0 for x <= 0, 1 for x >= 1, built from exp(-1/(x(1-x))).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let t = step_table();
    let n = t.values.len() - 1;
    let pos = x * n as f64;
    let i = (pos.floor() as usize).min(n - 1);
    let h = 1.0 / n as f64;
    let s = pos - i as f64;
    let (y0, y1) = (t.values[i], t.values[i + 1]);
    let (d0, d1) = (t.slopes[i] * h, t.slopes[i + 1] * h);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
}

struct StepTable {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

fn bump01(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

fn step_table() -> &'static StepTable {
    static TABLE: OnceLock<StepTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 8192;
        let h = 1.0 / n as f64;
        let (gx, gw) = gauss_legendre(12);
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            let a = i as f64 * h;
            let cell: f64 = gx.iter().zip(&gw).map(|(x, w)| w * bump01(a + 0.5 * h * (x + 1.0))).sum::<f64>() * 0.5 * h;
            cum[i + 1] = cum[i] + cell;
        }
        let z = cum[n];
        let values = cum.iter().map(|c| c / z).collect();
        let slopes = (0..=n).map(|i| bump01(i as f64 * h) / z).collect();
        StepTable { values, slopes }
    })
}

/// eta(x) = 1 on [0, 1], 0 on [4, inf), smooth and non-increasing.
pub fn eta(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 4.0 {
        0.0
    } else {
        1.0 - smooth_step((x - 1.0) / 3.0)
    }
}

pub fn phi(x: f64) -> f64 {
    eta(x / 4.0) - eta(x)
}

/// Littlewood-Paley bank: phi_0 = eta, phi_j(x) = phi(x / 4^{j-1}).
pub fn filter_bank(j: i64) -> Result<FilterProfile> {
    if j < 0 {
        return domain(format!("filter bank index must be non-negative, got {j}"));
    }
    if j == 0 {
        return Ok(FilterProfile::eta());
    }
    let scale = 4f64.powi(j as i32 - 1);
    let mut p = FilterProfile::phi().dilate(scale);
    p.name = format!("phi_{j}");
    Ok(p)
}

/// Companion psi_j(x) = psi(x / 4^{j-1}) with psi(x) = phi(x) / x^{r/2}.
pub fn filter_bank_companion(j: i64, r: f64) -> Result<FilterProfile> {
    if j < 1 {
        return domain("companion profile exists for j >= 1 only");
    }
    if r < 0.0 {
        return domain("smoothness must be non-negative");
    }
    let scale = 4f64.powi(j as i32 - 1);
    let base = FilterProfile::custom(
        format!("psi(r={r})"),
        move |x: f64| if x <= 0.0 { 0.0 } else { phi(x) / x.powf(0.5 * r) },
        Some(16.0),
        Some(16.0),
    );
    let mut p = base.dilate(scale);
    p.name = format!("psi_{j}(r={r})");
    Ok(p)
}

/// Width of the Gaussian window in the Fourier variable.
const PW_SIGMA: f64 = 0.12;
const PW_SAMPLES: usize = 1 << 14;

struct PwTable {
    cheb: Chebyshev,
    norm: f64,
    horizon_xi: f64,
}

/// h-hat(tau) on (-1, 1), smooth with compact support.
pub fn paley_wiener_transform(tau: f64) -> f64 {
    if tau.abs() >= 1.0 {
        0.0
    } else {
        (-tau * tau / (2.0 * PW_SIGMA * PW_SIGMA) - 1.0 / (1.0 - tau * tau)).exp()
    }
}

/// Unnormalised h(xi) = int h-hat(tau) cos(xi tau) d tau by the trapezoid rule.
fn pw_direct(xi: f64) -> f64 {
    let n = PW_SAMPLES;
    let h = 2.0 / n as f64;
    let mut s = paley_wiener_transform(0.0);
    for j in 1..n / 2 {
        let tau = j as f64 * h;
        s += 2.0 * paley_wiener_transform(tau) * (xi * tau).cos();
    }
    s * h
}

fn pw_table() -> &'static PwTable {
    static TABLE: OnceLock<PwTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let norm = pw_direct(0.0);
        let upper = 100.0;
        let cheb = Chebyshev::fit(0.0, upper, 200, |x| pw_direct(x) / norm);
        // |h(xi)| is dominated by the Gaussian window exp(-sigma^2 xi^2 / 2)
        let horizon_xi = (-2.0 * NEGLIGIBLE.ln()).sqrt() / PW_SIGMA;
        PwTable { cheb, norm, horizon_xi }
    })
}

/// Normalised h with h(0) = 1.
pub fn pw_h(xi: f64) -> f64 {
    let t = pw_table();
    let a = xi.abs();
    if a <= t.cheb.upper() {
        t.cheb.eval(a)
    } else {
        pw_direct(a) / t.norm
    }
}

/// Direct trapezoid evaluation of the normalised h, for cross-checks.
pub fn pw_h_direct(xi: f64) -> f64 {
    pw_direct(xi) / pw_table().norm
}
