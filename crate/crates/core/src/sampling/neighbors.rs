//! Bucketed point sets for radius queries.
//!
//! Circle and sphere points are embedded as unit vectors and compared by
//! chord length; torus points keep their angles with a periodic metric.

use crate::manifold::{ManifoldModel, ModelKind, Point};
use std::collections::HashMap;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Embedded(pub [f64; 3]);

pub(crate) fn embed(model: &ManifoldModel, p: &Point) -> Embedded {
    match model.kind() {
        ModelKind::Circle => Embedded([p.a.cos(), p.a.sin(), 0.0]),
        ModelKind::Torus2 => Embedded([p.a.rem_euclid(TAU), p.b.rem_euclid(TAU), 0.0]),
        ModelKind::Sphere2 => Embedded(p.unit_vector()),
    }
}

/// Monotone proxy of geodesic distance: chord for circle/sphere, flat distance for torus.
#[inline]
pub(crate) fn proxy(model: ModelKind, a: &Embedded, b: &Embedded) -> f64 {
    match model {
        ModelKind::Torus2 => {
            let mut d0 = (a.0[0] - b.0[0]).abs();
            let mut d1 = (a.0[1] - b.0[1]).abs();
            if d0 > TAU - d0 {
                d0 = TAU - d0;
            }
            if d1 > TAU - d1 {
                d1 = TAU - d1;
            }
            (d0 * d0 + d1 * d1).sqrt()
        }
        _ => {
            let d0 = a.0[0] - b.0[0];
            let d1 = a.0[1] - b.0[1];
            let d2 = a.0[2] - b.0[2];
            (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
        }
    }
}

/// Geodesic distance from its proxy.
#[inline]
pub(crate) fn proxy_to_geodesic(model: ModelKind, c: f64) -> f64 {
    match model {
        ModelKind::Torus2 => c,
        _ => 2.0 * (0.5 * c).min(1.0).asin(),
    }
}

/// Proxy value of a geodesic distance.
#[inline]
pub(crate) fn geodesic_to_proxy(model: ModelKind, d: f64) -> f64 {
    match model {
        ModelKind::Torus2 => d,
        _ => 2.0 * (0.5 * d.min(std::f64::consts::PI)).sin(),
    }
}

pub(crate) struct NeighborIndex {
    kind: ModelKind,
    cell: f64,
    torus_cells: i64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    pub points: Vec<Embedded>,
}

impl NeighborIndex {
    /// `cell` is measured in proxy units.
    pub fn new(kind: ModelKind, cell: f64) -> Self {
        let (cell, torus_cells) = if kind == ModelKind::Torus2 {
            let n = ((TAU / cell).floor() as i64).max(1);
            (TAU / n as f64, n)
        } else {
            (cell, 0)
        };
        NeighborIndex { kind, cell, torus_cells, buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, e: &Embedded) -> [i64; 3] {
        match self.kind {
            ModelKind::Torus2 => [
                ((e.0[0] / self.cell).floor() as i64).rem_euclid(self.torus_cells),
                ((e.0[1] / self.cell).floor() as i64).rem_euclid(self.torus_cells),
                0,
            ],
            _ => [
                (e.0[0] / self.cell).floor() as i64,
                (e.0[1] / self.cell).floor() as i64,
                (e.0[2] / self.cell).floor() as i64,
            ],
        }
    }

    pub fn insert(&mut self, e: Embedded) -> usize {
        let id = self.points.len();
        let k = self.key(&e);
        self.buckets.entry(k).or_default().push(id);
        self.points.push(e);
        id
    }

    /// Calls `f(id, proxy_distance)` for every stored point within `radius` (proxy units).
    pub fn for_each_within(&self, e: &Embedded, radius: f64, mut f: impl FnMut(usize, f64)) {
        let span = (radius / self.cell).ceil() as i64;
        let k = self.key(e);
        match self.kind {
            ModelKind::Torus2 => {
                let n = self.torus_cells;
                if 2 * span + 1 >= n {
                    for (id, p) in self.points.iter().enumerate() {
                        let d = proxy(self.kind, e, p);
                        if d <= radius {
                            f(id, d);
                        }
                    }
                    return;
                }
                for di in -span..=span {
                    for dj in -span..=span {
                        let key = [(k[0] + di).rem_euclid(n), (k[1] + dj).rem_euclid(n), 0];
                        if let Some(ids) = self.buckets.get(&key) {
                            for &id in ids {
                                let d = proxy(self.kind, e, &self.points[id]);
                                if d <= radius {
                                    f(id, d);
                                }
                            }
                        }
                    }
                }
            }
            _ => {
                let cells_per_axis = (2.0 / self.cell).ceil() as i64 + 1;
                if 2 * span + 1 >= cells_per_axis {
                    for (id, p) in self.points.iter().enumerate() {
                        let d = proxy(self.kind, e, p);
                        if d <= radius {
                            f(id, d);
                        }
                    }
                    return;
                }
                let zspan = if self.kind == ModelKind::Circle { 0 } else { span };
                for di in -span..=span {
                    for dj in -span..=span {
                        for dk in -zspan..=zspan {
                            let key = [k[0] + di, k[1] + dj, k[2] + dk];
                            if let Some(ids) = self.buckets.get(&key) {
                                for &id in ids {
                                    let d = proxy(self.kind, e, &self.points[id]);
                                    if d <= radius {
                                        f(id, d);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Proxy distance to the nearest stored point, searching up to `radius`.
    pub fn nearest_within(&self, e: &Embedded, radius: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        self.for_each_within(e, radius, |_, d| {
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        });
        best
    }
}
