use super::neighbors::{embed, geodesic_to_proxy, proxy_to_geodesic, Embedded, NeighborIndex};
use crate::error::{domain, Error, Result};
use crate::manifold::{ManifoldModel, ModelKind, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

/// Largest candidate pool the greedy construction will generate.
pub const MAX_POOL: usize = 4_000_000;

/// Probe points used for the multiplicity certificate.
const MULTIPLICITY_PROBES: usize = 50_000;

/// Measured lattice properties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCertificates {
    /// Smallest pairwise geodesic distance.
    pub min_separation: f64,
    /// Largest distance from a probe point to the lattice.
    pub covering_radius: f64,
    /// Spacing of the probe set; the true covering radius is within this of the measured one.
    pub probe_spacing: f64,
    /// Largest number of rho-balls containing a probe point.
    pub multiplicity: usize,
    /// Volume-packing bound 5^s on the multiplicity for a rho/2-separated set.
    pub multiplicity_bound: usize,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    pub model: ManifoldModel,
    pub rho: f64,
    pub points: Vec<Point>,
    pub certificates: LatticeCertificates,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// |points| * rho^s, which stays bounded above and below for genuine lattices.
    pub fn count_constant(&self) -> f64 {
        self.points.len() as f64 * self.rho.powi(self.model.dim() as i32)
    }

    /// Whether the three lattice certificates hold.
    pub fn is_valid(&self) -> bool {
        let c = &self.certificates;
        c.min_separation >= 0.5 * self.rho
            && c.covering_radius <= 0.5 * self.rho + c.probe_spacing
            && c.multiplicity <= c.multiplicity_bound
    }

    /// Wrap an externally supplied point set and measure its certificates.
    pub fn from_points(model: &ManifoldModel, rho: f64, points: Vec<Point>) -> Result<Self> {
        check_rho(model, rho)?;
        if points.is_empty() {
            return domain("point set is empty");
        }
        let points = points.into_iter().map(|p| model.normalize(p)).collect::<Result<Vec<_>>>()?;
        let (pool, spacing) = candidate_pool(model, rho / 8.0, 0)?;
        let certificates = certify(model, rho, &points, &pool, spacing);
        Ok(Lattice { model: *model, rho, points, certificates })
    }
}

fn check_rho(model: &ManifoldModel, rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return domain(format!("rho must be positive, got {rho}"));
    }
    if rho >= 0.5 * model.diameter() {
        return domain(format!(
            "rho = {rho} is too large for {}: need rho < {}",
            model.kind(),
            0.5 * model.diameter()
        ));
    }
    Ok(())
}

/// Greedy rho-lattice over a candidate pool of spacing rho/8.
pub fn build_lattice(model: &ManifoldModel, rho: f64, seed: u64) -> Result<Lattice> {
    build_lattice_with_pool(model, rho, seed, rho / 8.0)
}

/// Greedy rho-lattice with an explicit pool spacing (at most rho/8).
pub fn build_lattice_with_pool(model: &ManifoldModel, rho: f64, seed: u64, pool_spacing: f64) -> Result<Lattice> {
    check_rho(model, rho)?;
    if !(pool_spacing > 0.0) || pool_spacing > rho / 8.0 * (1.0 + 1e-12) {
        return Err(Error::Resource(format!(
            "candidate pool spacing {pool_spacing} exceeds rho/8 = {}",
            rho / 8.0
        )));
    }
    let (pool, spacing) = candidate_pool(model, pool_spacing, seed)?;
    let points = farthest_point(model, rho, &pool, seed);
    if points.len() < 2 {
        return domain(format!("rho = {rho} leaves room for fewer than two points"));
    }
    let certificates = certify(model, rho, &points, &pool, spacing);
    Ok(Lattice { model: *model, rho, points, certificates })
}

/// Seeded candidate pool with spacing at most `h`; returns the pool and its actual spacing.
fn candidate_pool(model: &ManifoldModel, h: f64, seed: u64) -> Result<(Vec<Point>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_9001);
    let too_big = |n: f64| -> Result<()> {
        if n > MAX_POOL as f64 {
            Err(Error::Resource(format!("candidate pool of {n:.0} points exceeds {MAX_POOL}")))
        } else {
            Ok(())
        }
    };
    match model.kind() {
        ModelKind::Circle => {
            let n = (TAU / h).ceil();
            too_big(n)?;
            let n = n as usize;
            let step = TAU / n as f64;
            let u: f64 = rng.random();
            Ok(((0..n).map(|i| Point::circle((i as f64 + u) * step)).collect(), step))
        }
        ModelKind::Torus2 => {
            let n = (TAU / h).ceil();
            too_big(n * n)?;
            let n = n as usize;
            let step = TAU / n as f64;
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    pts.push(Point::torus((i as f64 + u) * step, (j as f64 + v) * step));
                }
            }
            Ok((pts, step))
        }
        ModelKind::Sphere2 => {
            too_big(4.0 * PI / (h * h) * 1.3)?;
            let rings = (PI / h).ceil() as usize;
            let dth = PI / rings as f64;
            let mut pts = Vec::new();
            for i in 0..rings {
                let th = (i as f64 + 0.5) * dth;
                let n = ((TAU * th.sin() / h).ceil() as usize).max(1);
                let step = TAU / n as f64;
                let u: f64 = rng.random();
                for j in 0..n {
                    pts.push(Point::sphere(th, (j as f64 + u) * step));
                }
            }
            Ok((pts, dth.max(h)))
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate(u64, usize);

/// Farthest-point insertion: keep adding the pool point farthest from the
/// current set while that distance exceeds rho/2.
fn farthest_point(model: &ManifoldModel, rho: f64, pool: &[Point], seed: u64) -> Vec<Point> {
    let kind = model.kind();
    let sep = geodesic_to_proxy(kind, 0.5 * rho);
    let mut index = NeighborIndex::new(kind, sep);
    for p in pool {
        index.insert(embed(model, p));
    }
    let mut dist = vec![f64::INFINITY; pool.len()];
    let mut heap = BinaryHeap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = rng.random_range(0..pool.len());
    let mut reach = f64::INFINITY;
    let mut chosen = Vec::new();
    loop {
        chosen.push(pool[next]);
        dist[next] = 0.0;
        let e: Embedded = index.points[next];
        index.for_each_within(&e, reach.min(10.0), |id, d| {
            if d < dist[id] {
                dist[id] = d;
                heap.push(Candidate(d.to_bits(), id));
            }
        });
        let mut found = None;
        while let Some(Candidate(bits, id)) = heap.pop() {
            let d = f64::from_bits(bits);
            if d == dist[id] {
                found = Some((d, id));
                heap.push(Candidate(bits, id));
                break;
            }
        }
        match found {
            Some((d, id)) if d > sep * (1.0 + 1e-9) => {
                reach = d;
                next = id;
            }
            _ => break,
        }
    }
    chosen
}

/// Geodesic distance from `e` to the nearest indexed point.
fn nearest(kind: ModelKind, index: &NeighborIndex, e: &Embedded, start: f64) -> f64 {
    let mut r = start;
    loop {
        if let Some(d) = index.nearest_within(e, r) {
            return proxy_to_geodesic(kind, d);
        }
        if r > 10.0 {
            return f64::INFINITY;
        }
        r *= 2.0;
    }
}

fn certify(model: &ManifoldModel, rho: f64, points: &[Point], pool: &[Point], spacing: f64) -> LatticeCertificates {
    let kind = model.kind();
    let cell = geodesic_to_proxy(kind, 0.5 * rho);
    let mut index = NeighborIndex::new(kind, cell);
    for p in points {
        index.insert(embed(model, p));
    }
    let mut min_sep = f64::INFINITY;
    for (i, e) in index.points.iter().enumerate() {
        let mut r = cell;
        loop {
            let mut best = f64::INFINITY;
            index.for_each_within(e, r, |id, d| {
                if id != i && d < best {
                    best = d;
                }
            });
            if best.is_finite() {
                min_sep = min_sep.min(proxy_to_geodesic(kind, best));
                break;
            }
            if r > 10.0 {
                break;
            }
            r *= 2.0;
        }
    }
    let mut covering: f64 = 0.0;
    for p in pool {
        covering = covering.max(nearest(kind, &index, &embed(model, p), cell));
    }
    let ball = geodesic_to_proxy(kind, rho);
    let stride = pool.len().div_ceil(MULTIPLICITY_PROBES).max(1);
    let mut multiplicity = 0;
    for e in pool.iter().step_by(stride).map(|p| embed(model, p)).chain(index.points.iter().copied()) {
        let mut count = 0;
        index.for_each_within(&e, ball, |_, d| {
            if d < ball {
                count += 1;
            }
        });
        multiplicity = multiplicity.max(count);
    }
    LatticeCertificates {
        min_separation: min_sep,
        covering_radius: covering,
        probe_spacing: spacing,
        multiplicity,
        multiplicity_bound: 5usize.pow(model.dim() as u32),
    }
}
