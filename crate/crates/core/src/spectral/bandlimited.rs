use crate::error::{domain, Result};
use crate::manifold::legendre::{lm_index, normalized_legendre};
use crate::manifold::{
    enumerate_spectrum, EigenLabel, GridLayout, ManifoldModel, ModelKind, Parity, Point, ReferenceGrid, Spectrum,
};
use nalgebra::{Complex, DMatrix};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Element of E_omega stored by its eigen-coefficients.
#[derive(Clone, Debug)]
pub struct BandlimitedFunction {
    spectrum: Arc<Spectrum>,
    coeffs: Vec<f64>,
}

impl BandlimitedFunction {
    pub fn new(spectrum: Arc<Spectrum>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != spectrum.len() {
            return domain(format!(
                "coefficient count {} does not match N_omega = {}",
                coeffs.len(),
                spectrum.len()
            ));
        }
        Ok(BandlimitedFunction { spectrum, coeffs })
    }

    pub fn zero(spectrum: Arc<Spectrum>) -> Self {
        let n = spectrum.len();
        BandlimitedFunction { spectrum, coeffs: vec![0.0; n] }
    }

    /// Single eigenfunction u_ordinal.
    pub fn basis(spectrum: Arc<Spectrum>, ordinal: usize) -> Result<Self> {
        if ordinal >= spectrum.len() {
            return domain("ordinal outside the loaded spectrum");
        }
        let mut c = vec![0.0; spectrum.len()];
        c[ordinal] = 1.0;
        Ok(BandlimitedFunction { spectrum, coeffs: c })
    }

    pub fn from_model(model: &ManifoldModel, omega: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(Arc::new(enumerate_spectrum(model, omega)?), coeffs)
    }

    pub fn model(&self) -> &ManifoldModel {
        self.spectrum.model()
    }

    pub fn omega(&self) -> f64 {
        self.spectrum.omega()
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let v = self.spectrum.eval_all(x);
        v.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Apply a spectral multiplier m(lambda) coefficient-wise.
    pub fn map_spectrum(&self, m: impl Fn(f64) -> f64) -> Self {
        let coeffs = self.coeffs.iter().zip(self.spectrum.entries()).map(|(c, e)| c * m(e.lambda)).collect();
        BandlimitedFunction { spectrum: self.spectrum.clone(), coeffs }
    }

    /// L^{a} f.
    pub fn laplacian_power(&self, a: f64) -> Self {
        self.map_spectrum(|l| if l == 0.0 { if a == 0.0 { 1.0 } else { 0.0 } } else { l.powf(a) })
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// Truncate to a smaller band.
    pub fn restrict(&self, omega: f64) -> Result<Self> {
        if omega > self.omega() {
            return Ok(self.clone());
        }
        let spec = Arc::new(enumerate_spectrum(self.model(), omega)?);
        let n = spec.len();
        Ok(BandlimitedFunction { spectrum: spec, coeffs: self.coeffs[..n].to_vec() })
    }

    /// Values at every node of a point set.
    pub fn on_points(&self, points: &[Point]) -> Vec<f64> {
        let mut row = vec![0.0; self.spectrum.len()];
        let mut scratch = Vec::new();
        points
            .iter()
            .map(|p| {
                self.spectrum.eval_all_into(p, &mut row, &mut scratch);
                row.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Values on a reference grid, using its product structure when it has one.
    pub fn on_grid(&self, grid: &ReferenceGrid) -> Vec<f64> {
        match (&grid.layout, self.model().kind()) {
            (GridLayout::GaussSphere { colatitudes, n_phi }, ModelKind::Sphere2) => {
                self.sphere_rings(colatitudes, *n_phi)
            }
            (GridLayout::Product { n }, ModelKind::Torus2) => self.torus_product(*n),
            _ => self.on_points(&grid.nodes),
        }
    }

    fn sphere_rings(&self, colatitudes: &[f64], n_phi: usize) -> Vec<f64> {
        let lmax = self.spectrum.max_degree();
        let r2 = 2f64.sqrt();
        let mut out = Vec::with_capacity(colatitudes.len() * n_phi);
        let mut leg = Vec::new();
        let h = TAU / n_phi as f64;
        let trig: Vec<Vec<(f64, f64)>> = (0..n_phi)
            .map(|j| (0..=lmax).map(|m| { let (s, c) = (m as f64 * h * j as f64).sin_cos(); (c, s) }).collect())
            .collect();
        for th in colatitudes {
            let (st, ct) = th.sin_cos();
            normalized_legendre(lmax, ct, st, &mut leg);
            let mut gc = vec![0.0; lmax + 1];
            let mut gs = vec![0.0; lmax + 1];
            for (e, a) in self.spectrum.entries().iter().zip(&self.coeffs) {
                if let EigenLabel::Sphere { l, m } = e.label {
                    let p = leg[lm_index(l as usize, m.unsigned_abs() as usize)] * a;
                    match m.cmp(&0) {
                        std::cmp::Ordering::Equal => gc[0] += p,
                        std::cmp::Ordering::Greater => gc[m as usize] += r2 * p,
                        std::cmp::Ordering::Less => gs[(-m) as usize] += r2 * p,
                    }
                }
            }
            for tj in &trig {
                let v: f64 = tj.iter().zip(gc.iter().zip(&gs)).map(|((c, s), (a, b))| a * c + b * s).sum();
                out.push(v);
            }
        }
        out
    }

    fn torus_product(&self, n: usize) -> Vec<f64> {
        let k = self.spectrum.max_degree();
        let w = 2 * k + 1;
        // complex coefficients C[k1][k2 + k] with f = Re sum C e^{i k.x}
        let mut c = vec![Complex::new(0.0, 0.0); (k + 1) * w];
        let ck = 1.0 / (PI * 2f64.sqrt());
        for (e, a) in self.spectrum.entries().iter().zip(&self.coeffs) {
            if let EigenLabel::Torus { k1, k2, parity } = e.label {
                let idx = k1 as usize * w + (k2 + k as i32) as usize;
                if k1 == 0 && k2 == 0 {
                    c[idx] += Complex::new(a / TAU, 0.0);
                } else {
                    c[idx] += match parity {
                        Parity::Cos => Complex::new(a * ck, 0.0),
                        Parity::Sin => Complex::new(0.0, -a * ck),
                    };
                }
            }
        }
        let h = TAU / n as f64;
        let phase = |j: usize, x: f64| Complex::new((j as f64 * x).cos(), (j as f64 * x).sin());
        let mut g = vec![Complex::new(0.0, 0.0); n * w];
        for i in 0..n {
            let x1 = h * i as f64;
            let e1: Vec<Complex<f64>> = (0..=k).map(|j| phase(j, x1)).collect();
            for k1 in 0..=k {
                let row = &c[k1 * w..(k1 + 1) * w];
                let gi = &mut g[i * w..(i + 1) * w];
                for (gv, cv) in gi.iter_mut().zip(row) {
                    *gv += cv * e1[k1];
                }
            }
        }
        let e2: Vec<Vec<Complex<f64>>> = (0..n)
            .map(|j| (0..w).map(|m| phase(1, (m as f64 - k as f64) * h * j as f64)).collect())
            .collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let gi = &g[i * w..(i + 1) * w];
            for e in &e2 {
                let v: f64 = gi.iter().zip(e).map(|(a, b)| a.re * b.re - a.im * b.im).sum();
                out.push(v);
            }
        }
        out
    }
}

/// Sampling matrix with entries u_l(x_k), rows indexed by points.
pub fn synthesis_matrix(spectrum: &Spectrum, points: &[Point]) -> DMatrix<f64> {
    let n = spectrum.len();
    let mut m = DMatrix::zeros(points.len(), n);
    let mut row = vec![0.0; n];
    let mut scratch = Vec::new();
    for (k, p) in points.iter().enumerate() {
        spectrum.eval_all_into(p, &mut row, &mut scratch);
        for (l, v) in row.iter().enumerate() {
            m[(k, l)] = *v;
        }
    }
    m
}

/// Function known only through its values on a reference grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: Arc<ReferenceGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<ReferenceGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain("grid function length does not match the grid");
        }
        Ok(GridFunction { grid, values })
    }

    /// Eigen-coefficients up to `omega` by grid quadrature.
    pub fn analyse(&self, omega: f64) -> Result<BandlimitedFunction> {
        let spec = Arc::new(enumerate_spectrum(&self.grid.model, omega)?);
        let mut coeffs = vec![0.0; spec.len()];
        let mut row = vec![0.0; spec.len()];
        let mut scratch = Vec::new();
        for ((p, w), v) in self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.values) {
            spec.eval_all_into(p, &mut row, &mut scratch);
            for (c, r) in coeffs.iter_mut().zip(&row) {
                *c += w * v * r;
            }
        }
        BandlimitedFunction::new(spec, coeffs)
    }
}
