//! Families of nearly disjoint Paley-Wiener bumps and the lower bounds for
//! widths they certify.

use super::exponents::{check_exponent, inv, WidthKind};
use crate::calibration::Calibration;
use crate::error::{domain, Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Point};
use crate::sampling::build_lattice;
use crate::spectral::{wave_support_radius_with, FilterProfile, ZonalKernel};
use serde::Serialize;
use std::f64::consts::PI;

/// Relative size of a bump outside its ball that still counts as disjoint.
pub const DISJOINT_TOL: f64 = 1e-8;
/// Leakage above this relative size aborts the construction.
pub const LEAK_LIMIT: f64 = 1e-6;

/// Scale at which the support constant is measured.
const MEASURE_T: f64 = 0.1;
/// Simpson intervals per radial segment.
const RADIAL_STEPS: usize = 2048;
/// Grid points per half axis of the torus patch.
const PATCH_STEPS: usize = 160;

/// Support radius / t of the bump kernel at relative threshold 1e-8.
pub fn measure_support_constant(model: &ManifoldModel, power: u32) -> Result<f64> {
    let profile = FilterProfile::paley_wiener_bump(power);
    let kernel = ZonalKernel::new(model, &profile, MEASURE_T)?;
    let scale = radial_values(&kernel, &linspace(0.0, MEASURE_T, 257))?.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ws = wave_support_radius_with(model, &profile, MEASURE_T, DISJOINT_TOL * scale)?;
    Ok(ws.c0)
}

/// Number of centres in the packing of order N.
pub fn bump_count(model: &ManifoldModel, order: usize, seed: u64) -> Result<usize> {
    Ok(packing(model, order, seed)?.len())
}

/// Maximal packing of disjoint balls of radius N^{-1/s}.
fn packing(model: &ManifoldModel, order: usize, seed: u64) -> Result<Vec<Point>> {
    if order == 0 {
        return domain("bump order N must be positive");
    }
    let radius = (order as f64).powf(-1.0 / model.dim() as f64);
    if 4.0 * radius >= model.diameter() / 2.0 {
        return domain(format!("N = {order} is too small: 2 N^(-1/s) must stay well below the diameter"));
    }
    // Farthest-point insertion at separation 2 radius is a maximal packing.
    Ok(build_lattice(model, 4.0 * radius, seed)?.points)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn radial_values(kernel: &ZonalKernel, ds: &[f64]) -> Result<Vec<f64>> {
    match kernel.model().kind() {
        ModelKind::Torus2 => Ok(kernel.on_torus_offsets(ds, &[0.0])?.iter().copied().collect()),
        _ => Ok(ds.iter().map(|&d| kernel.eval_distance(d)).collect()),
    }
}

/// Weighted samples of a kernel around its centre.
#[derive(Clone, Debug, Default)]
struct Samples {
    dist: Vec<f64>,
    weight: Vec<f64>,
    value: Vec<f64>,
    /// Node belongs to the quadrature of the inner ball.
    inner: Vec<bool>,
}

impl Samples {
    fn norm(&self, q: f64, core_only: bool) -> f64 {
        let it = self
            .weight
            .iter()
            .zip(&self.value)
            .zip(&self.inner)
            .filter(|(_, inner)| !core_only || **inner)
            .map(|(wv, _)| wv);
        if q.is_infinite() {
            it.fold(0.0, |m, (_, v)| m.max(v.abs()))
        } else {
            it.map(|(w, v)| w * v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }

    fn max_outside(&self, r: f64) -> f64 {
        self.dist.iter().zip(&self.value).filter(|(d, _)| **d >= r).fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

fn simpson(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / n as f64;
    let x = (0..=n).map(|i| a + h * i as f64).collect();
    let w = (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (x, w)
}

/// Sample `scale * kernel` on the ball of radius `reach`, split at `radius`
/// so that restrictions to the inner ball integrate exactly.
fn sample_kernel(kernel: &ZonalKernel, scale: f64, radius: f64, reach: f64) -> Result<Samples> {
    let model = kernel.model();
    match model.kind() {
        ModelKind::Circle | ModelKind::Sphere2 => {
            let jac = |d: f64| if model.kind() == ModelKind::Circle { 2.0 } else { 2.0 * PI * d.sin() };
            let mut out = Samples::default();
            let split = radius.min(reach);
            for (a, b, is_inner) in [(0.0, split, true), (split, reach, false)] {
                if b > a {
                    let (x, w) = simpson(a, b, RADIAL_STEPS);
                    for (xi, wi) in x.into_iter().zip(w) {
                        out.weight.push(wi * jac(xi));
                        out.dist.push(xi);
                        out.inner.push(is_inner);
                    }
                }
            }
            out.value = radial_values(kernel, &out.dist)?.into_iter().map(|v| v * scale).collect();
            Ok(out)
        }
        ModelKind::Torus2 => {
            let n = PATCH_STEPS;
            let h = reach / n as f64;
            let offs: Vec<f64> = (0..=2 * n).map(|i| -reach + h * i as f64).collect();
            let m = kernel.on_torus_offsets(&offs, &offs)?;
            let mut out = Samples::default();
            for (i, a) in offs.iter().enumerate() {
                for (j, b) in offs.iter().enumerate() {
                    let d = (a * a + b * b).sqrt();
                    out.dist.push(d);
                    out.weight.push(h * h);
                    out.value.push(scale * m[(i, j)]);
                    out.inner.push(d <= radius);
                }
            }
            Ok(out)
        }
    }
}

/// Largest |kernel| over a coarse sweep of the whole manifold beyond `from`.
fn far_field(kernel: &ZonalKernel, scale: f64, from: f64) -> Result<f64> {
    let model = kernel.model();
    match model.kind() {
        ModelKind::Torus2 => {
            let offs = linspace(-PI, PI, 97);
            let m = kernel.on_torus_offsets(&offs, &offs)?;
            let mut worst: f64 = 0.0;
            for (i, a) in offs.iter().enumerate() {
                for (j, b) in offs.iter().enumerate() {
                    if (a * a + b * b).sqrt() >= from {
                        worst = worst.max(m[(i, j)].abs());
                    }
                }
            }
            Ok(scale * worst)
        }
        _ => {
            let ds = linspace(from.min(PI), PI, 512);
            Ok(scale * radial_values(kernel, &ds)?.into_iter().fold(0.0f64, |m, v| m.max(v.abs())))
        }
    }
}

/// Norms of one bump, identical for every centre by homogeneity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BumpNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// Norms of the restriction to B(x_i, N^{-1/s}).
    pub core_l1: f64,
    pub core_l2: f64,
    pub core_linf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisEntry {
    pub p: f64,
    /// Upper bound for ||sum a_i L^{r/2} phi_i||_p / ||a||_p.
    pub bound: f64,
    /// bound / N^{r/s - 1/p}.
    pub scaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpSystem {
    pub model: ManifoldModel,
    /// The order N.
    pub order: usize,
    /// N^{-1/s}.
    pub radius: f64,
    pub t: f64,
    pub support_c0: f64,
    pub power: u32,
    #[serde(skip)]
    pub centers: Vec<Point>,
    /// P_N.
    pub count: usize,
    pub norms: BumpNorms,
    #[serde(skip)]
    samples: Samples,
    /// ||phi||_q N^{1/q} for q = 1, 2, inf.
    pub scaled_norms: [f64; 3],
    /// sup |phi_i| outside B(x_i, N^{-1/s}), including the truncation tail.
    pub leak: f64,
    pub leak_rel: f64,
    pub disjoint: bool,
    /// Upper bound on how many centres lie within t of any point.
    pub overlap: usize,
    /// Bound on |phi_i| beyond the exact support radius t.
    pub truncation: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BumpOptions {
    /// Support constant; measured when absent.
    pub support_c0: Option<f64>,
    pub power: u32,
    pub seed: u64,
}

impl BumpOptions {
    /// Options from the bundled calibration.
    pub fn calibrated(model: &ManifoldModel) -> Self {
        let c = *Calibration::builtin().get(model.kind());
        BumpOptions { support_c0: Some(c.support_c0), power: c.bump_power, seed: 0 }
    }
}

fn bump_profile(power: u32) -> FilterProfile {
    FilterProfile::paley_wiener_bump(power)
}

/// Bumps phi_i = K_t(x_i, .) / N with t = N^{-1/s} / (2 C_0).
pub fn bump_system(model: &ManifoldModel, order: usize, opts: &BumpOptions) -> Result<BumpSystem> {
    let centers = packing(model, order, opts.seed)?;
    let s = model.dim() as f64;
    let nf = order as f64;
    let radius = nf.powf(-1.0 / s);
    let support_c0 = match opts.support_c0 {
        Some(c) if c > 0.0 && c.is_finite() => c,
        Some(c) => return domain(format!("support constant must be positive, got {c}")),
        None => measure_support_constant(model, opts.power)?,
    };
    let t = radius / (2.0 * support_c0);
    let kernel = ZonalKernel::new(model, &bump_profile(opts.power), t)?;
    let scale = 1.0 / nf;
    // The exact kernel vanishes beyond distance t; sample a margin past it.
    let reach = t.max(radius) * 1.25;
    let samples = sample_kernel(&kernel, scale, radius, reach)?;
    let norms = BumpNorms {
        l1: samples.norm(1.0, false),
        l2: samples.norm(2.0, false),
        linf: samples.norm(f64::INFINITY, false),
        core_l1: samples.norm(1.0, true),
        core_l2: samples.norm(2.0, true),
        core_linf: samples.norm(f64::INFINITY, true),
    };
    let truncation = scale * kernel.tail_estimate();
    let far = far_field(&kernel, scale, reach)?;
    let leak = samples.max_outside(radius).max(far).max(truncation);
    let leak_rel = leak / norms.linf;
    if leak_rel > LEAK_LIMIT {
        return Err(Error::Precision(format!(
            "bump leakage {leak_rel:.2e} outside the packing balls exceeds {LEAK_LIMIT:.0e}; raise the spectral resolution"
        )));
    }
    let overlap = overlap_bound(model, t, radius);
    Ok(BumpSystem {
        model: *model,
        order,
        radius,
        t,
        support_c0,
        power: opts.power,
        count: centers.len(),
        centers,
        scaled_norms: [norms.l1 * nf, norms.l2 * nf.sqrt(), norms.linf],
        norms,
        leak,
        leak_rel,
        disjoint: leak_rel <= DISJOINT_TOL,
        overlap,
        truncation,
        samples,
    })
}

/// Centres within distance t of a point: their disjoint balls of radius
/// `radius` fit inside a ball of radius t + radius.
fn overlap_bound(model: &ManifoldModel, t: f64, radius: f64) -> usize {
    if t < radius {
        return 1;
    }
    (model.ball_measure(t + radius) / model.ball_measure(radius)).floor().max(1.0) as usize
}

impl BumpSystem {
    /// ||phi_i||_q.
    pub fn norm(&self, q: f64) -> f64 {
        self.samples.norm(q, false)
    }

    /// ||phi_i||_q restricted to B(x_i, N^{-1/s}).
    pub fn core_norm(&self, q: f64) -> f64 {
        self.samples.norm(q, true)
    }

    /// Kernel and scale of L^{r/2} phi_i; needs r/2 + M to be an integer so
    /// that the profile keeps compact Fourier support.
    fn derivative_kernel(&self, r: f64) -> Result<(ZonalKernel, f64)> {
        if !(r >= 0.0) || (r / 2.0).fract() != 0.0 {
            return Err(Error::Unsupported(format!(
                "bump derivatives need an even smoothness index, got r = {r}"
            )));
        }
        let profile = bump_profile(self.power).times_power(r / 2.0);
        let kernel = ZonalKernel::new(&self.model, &profile, self.t)?;
        Ok((kernel, self.t.powf(-r) / self.order as f64))
    }

    /// Bounds A_1, A_inf on the synthesis a -> sum a_i L^{r/2} phi_i from
    /// l_1 and l_inf.
    pub fn synthesis_ends(&self, r: f64) -> Result<(f64, f64)> {
        if r == 0.0 {
            let a_inf = self.overlap as f64 * self.norms.linf + self.count as f64 * self.truncation;
            return Ok((self.norms.l1, a_inf));
        }
        let (kernel, scale) = self.derivative_kernel(r)?;
        let reach = self.t.max(self.radius) * 1.25;
        let samples = sample_kernel(&kernel, scale, self.radius, reach)?;
        let trunc = scale * kernel.tail_estimate();
        let a_inf = self.overlap as f64 * samples.norm(f64::INFINITY, false) + self.count as f64 * trunc;
        Ok((samples.norm(1.0, false), a_inf))
    }

    /// Riesz-Thorin bound for the synthesis from l_p.
    pub fn synthesis_bound(&self, r: f64, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(riesz_thorin(self.synthesis_ends(r)?, p))
    }

    /// Synthesis bounds at p = 1 and p = inf against N^{r/s - 1/p}.
    pub fn synthesis_table(&self, r: f64) -> Result<Vec<SynthesisEntry>> {
        let (a1, ainf) = self.synthesis_ends(r)?;
        let s = self.model.dim() as f64;
        let nf = self.order as f64;
        Ok(vec![
            SynthesisEntry { p: 1.0, bound: a1, scaled: a1 / nf.powf(r / s - 1.0) },
            SynthesisEntry { p: f64::INFINITY, bound: ainf, scaled: ainf / nf.powf(r / s) },
        ])
    }

    /// ||sum a_i L^{r/2} phi_i||_p evaluated directly on patches around the
    /// centres with a_i != 0.
    pub fn synthesis_norm(&self, a: &[f64], p: f64, r: f64) -> Result<f64> {
        check_exponent(p)?;
        if a.len() != self.count {
            return domain(format!("need {} coefficients, got {}", self.count, a.len()));
        }
        let (kernel, scale) = if r == 0.0 {
            (ZonalKernel::new(&self.model, &bump_profile(self.power), self.t)?, 1.0 / self.order as f64)
        } else {
            self.derivative_kernel(r)?
        };
        let active: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0.0).collect();
        let reach = self.t.max(self.radius) * 1.25;
        let eval = |x: &Point| -> f64 {
            active
                .iter()
                .map(|&j| {
                    let c = &self.centers[j];
                    if self.model.distance(x, c) > reach {
                        0.0
                    } else {
                        a[j] * scale * kernel.eval(c, x)
                    }
                })
                .sum()
        };
        let mut acc = 0.0f64;
        for &i in &active {
            let c = self.centers[i];
            for (x, w) in patch(&self.model, &c, reach) {
                // Each sample belongs to the nearest active centre only.
                let own = self.model.distance(&x, &c);
                if active.iter().any(|&j| j != i && self.model.distance(&x, &self.centers[j]) < own) {
                    continue;
                }
                let v = eval(&x).abs();
                if p.is_infinite() {
                    acc = acc.max(v);
                } else {
                    acc += w * v.powf(p);
                }
            }
        }
        Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
    }
}

fn riesz_thorin((a1, ainf): (f64, f64), p: f64) -> f64 {
    a1.powf(inv(p)) * ainf.powf(1.0 - inv(p))
}

/// Quadrature nodes on the ball of radius `reach` around `c`.
fn patch(model: &ManifoldModel, c: &Point, reach: f64) -> Vec<(Point, f64)> {
    match model.kind() {
        ModelKind::Circle => {
            let (x, w) = simpson(-reach, reach, 2 * RADIAL_STEPS);
            x.into_iter().zip(w).map(|(d, w)| (Point::circle(crate::manifold::wrap_angle(c.a + d)), w)).collect()
        }
        ModelKind::Torus2 => {
            let n = PATCH_STEPS / 2;
            let h = reach / n as f64;
            let mut out = Vec::new();
            for i in 0..=2 * n {
                for j in 0..=2 * n {
                    let (a, b) = (-reach + h * i as f64, -reach + h * j as f64);
                    if (a * a + b * b).sqrt() <= reach {
                        let p = Point::torus(crate::manifold::wrap_angle(c.a + a), crate::manifold::wrap_angle(c.b + b));
                        out.push((p, h * h));
                    }
                }
            }
            out
        }
        ModelKind::Sphere2 => {
            let (ds, ws) = simpson(0.0, reach, 256);
            let naz = 96;
            let mut out = Vec::new();
            for (d, w) in ds.into_iter().zip(ws) {
                for k in 0..naz {
                    let az = 2.0 * PI * k as f64 / naz as f64;
                    out.push((model.point_at_distance(c, d, az), w * d.sin() * 2.0 * PI / naz as f64));
                }
            }
            out
        }
    }
}

/// Lower certificate for a width of B_p^r in L_q.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub exponent: f64,
    /// Parameter regime: 1 for q <= p, 2 for p <= q <= 2, 3 for 2 <= p <= q,
    /// 4 for p < 2 < q.
    pub case: u8,
    pub n: usize,
    pub order: usize,
    pub count: usize,
    pub kind: WidthKind,
}

/// Lower bound for one finite-dimensional width inside the bump span.
struct Pieces<'a> {
    sys: &'a BumpSystem,
    n: usize,
    /// Synthesis bounds at l_1 and l_inf for phi_i and for L^{r/2} phi_i.
    plain: (f64, f64),
    derived: (f64, f64),
}

impl Pieces<'_> {
    /// Radius eps with eps b_p mapped into the Sobolev ball.
    fn epsilon(&self, p: f64) -> Result<f64> {
        Ok(1.0 / (riesz_thorin(self.plain, p) + riesz_thorin(self.derived, p)))
    }

    /// kappa with ||sum c_i phi_i||_q >= kappa ||c||_q.
    fn kappa(&self, q: f64) -> Result<f64> {
        let sys = self.sys;
        let mu = sys.model.mu_total();
        let pf = sys.count as f64;
        let k = sys.core_norm(q) - sys.leak * mu.powf(inv(q)) * pf.powf(1.0 - inv(q));
        if !(k > 0.0) {
            return Err(Error::Precision("bump leakage swamps the disjoint-support norm bound".into()));
        }
        Ok(k)
    }

    /// Norm bound of the L_2-orthogonal projection onto the bump span in L_q.
    fn projection(&self, q: f64) -> Result<f64> {
        if q == 2.0 {
            return Ok(1.0);
        }
        let sys = self.sys;
        let mu = sys.model.mu_total();
        let jq = riesz_thorin(self.plain, q);
        let jqc = riesz_thorin(self.plain, super::exponents::conjugate(q));
        let off = 2.0 * sys.leak * sys.norms.l1 + sys.leak * sys.leak * mu;
        let gram = sys.norms.core_l2.powi(2) - (sys.count as f64 - 1.0) * off;
        if !(gram > 0.0) {
            return Err(Error::Precision("bump Gram matrix is not diagonally dominant".into()));
        }
        Ok(jq * jqc / gram)
    }

    fn width(&self, kind: WidthKind, p: f64, q: f64, seq: f64) -> Result<f64> {
        let base = self.epsilon(p)? * self.kappa(q)? * seq;
        Ok(match kind {
            WidthKind::Kolmogorov => base / self.projection(q)?,
            _ => base,
        })
    }

    fn frac(&self) -> f64 {
        (1.0 - self.n as f64 / self.sys.count as f64).sqrt()
    }

    /// Case q <= p through B_inf^r in L_1, where both widths equal P - n.
    fn via_inf_one(&self, kind: WidthKind, p: f64, q: f64) -> Result<f64> {
        let mu = self.sys.model.mu_total();
        let embed = mu.powf(-inv(p)) * mu.powf(inv(q) - 1.0);
        let seq = (self.sys.count - self.n) as f64;
        let kind = if kind == WidthKind::Linear { WidthKind::Gelfand } else { kind };
        Ok(embed * self.width(kind, f64::INFINITY, 1.0, seq)?)
    }
}

/// Lower certificate on a prepared bump system.
pub fn lower_bound_on(system: &BumpSystem, p: f64, q: f64, r: f64, kind: WidthKind, n: usize) -> Result<LowerBound> {
    check_exponent(p)?;
    check_exponent(q)?;
    if !(r > 0.0) {
        return domain("smoothness r must be positive");
    }
    if system.count < 2 * n {
        return domain(format!("P_N = {} is below 2n = {}; raise the density factor", system.count, 2 * n));
    }
    let s = system.model.dim() as f64;
    let pieces = Pieces { sys: system, n, plain: system.synthesis_ends(0.0)?, derived: system.synthesis_ends(r)? };
    let mu = system.model.mu_total();
    let sharp = -r / s + inv(p) - inv(q);
    let (case, dn, gn) = if q <= p {
        let e = -r / s;
        (1, (pieces.via_inf_one(WidthKind::Kolmogorov, p, q)?, e), (pieces.via_inf_one(WidthKind::Gelfand, p, q)?, e))
    } else if q <= 2.0 {
        let dn = pieces.width(WidthKind::Kolmogorov, p, q, pieces.frac())?;
        let gn = mu.powf(inv(q) - inv(p)) * pieces.via_inf_one(WidthKind::Gelfand, p, p)?;
        (2, (dn, sharp), (gn, -r / s))
    } else if p >= 2.0 {
        let gn = pieces.width(WidthKind::Gelfand, p, q, pieces.frac())?;
        let dn = mu.powf(inv(q) - inv(p)) * pieces.via_inf_one(WidthKind::Kolmogorov, p, p)?;
        (3, (dn, -r / s), (gn, sharp))
    } else {
        let pf = system.count as f64;
        let dn = pieces.width(WidthKind::Kolmogorov, p, q, pf.powf(inv(q) - 0.5) * pieces.frac())?;
        let gn = pieces.width(WidthKind::Gelfand, p, q, pf.powf(0.5 - inv(p)) * pieces.frac())?;
        (4, (dn, sharp + inv(q) - 0.5), (gn, sharp + 0.5 - inv(p)))
    };
    let (value, exponent) = match kind {
        WidthKind::Kolmogorov => dn,
        WidthKind::Gelfand => gn,
        WidthKind::Linear => (dn.0.max(gn.0), dn.1.max(gn.1)),
    };
    Ok(LowerBound { value, exponent, case, n, order: system.order, count: system.count, kind })
}

/// Lower certificate at N = ceil(nu n) with the bundled calibration.
pub fn lower_bound_certificate(
    model: &ManifoldModel,
    p: f64,
    q: f64,
    r: f64,
    kind: WidthKind,
    n: usize,
) -> Result<LowerBound> {
    let nu = Calibration::builtin().get(model.kind()).nu;
    let system = bump_system(model, (nu * n as f64).ceil() as usize, &BumpOptions::calibrated(model))?;
    lower_bound_on(&system, p, q, r, kind, n)
}
