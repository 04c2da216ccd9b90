//! End-to-end acceptance checks, one test per criterion. Run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` to see
//! the measured values next to each verdict.

use manifold_widths::experiment::{run_experiment, width_sweep, ExperimentConfig, ExperimentKind, RunOutcome};
use manifold_widths::homogeneous::{eigensum_scan, product_bandwidth, PRODUCT_TOL};
use manifold_widths::manifold::{
    count_eigenvalues, enumerate_spectrum, weyl_fit, EigenLabel, ManifoldModel, ModelKind, Parity, Point,
};
use manifold_widths::sampling::{build_lattice, cubature_weights, pp_constants, Lattice};
use manifold_widths::spectral::BandlimitedFunction;
use manifold_widths::widths::*;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

const MODELS: [ModelKind; 3] = [ModelKind::Circle, ModelKind::Torus2, ModelKind::Sphere2];

fn verdict(id: u32, title: &str, passed: bool, detail: &str) {
    println!("criterion {id:>2} {} {title}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {id} ({title}) failed: {detail}");
}

fn run(kind: ExperimentKind, model: ModelKind, dir: &Path, set: &[(&str, &str)]) -> RunOutcome {
    let mut cfg = ExperimentConfig::new(kind, model);
    cfg.out_dir = dir.to_path_buf();
    for (k, v) in set {
        cfg.set(kind.name(), k, v).unwrap();
    }
    run_experiment(&cfg).unwrap()
}

fn check_detail(out: &RunOutcome, name: &str) -> (bool, String) {
    let c = out.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name}"));
    (c.passed, c.detail.clone())
}

#[test]
fn criterion_01_weyl_exponent() {
    let omegas = [100.0, 300.0, 1000.0, 3000.0, 10000.0];
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in MODELS {
        let model = ManifoldModel::new(kind);
        let start = Instant::now();
        let fit = weyl_fit(&model, &omegas).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let half = model.dim() as f64 / 2.0;
        ok &= (fit.slope - half).abs() <= 0.05 && secs < 5.0;
        detail.push(format!("{kind} slope {:.4} (s/2 = {half}) in {secs:.2}s", fit.slope));
    }
    verdict(1, "Weyl exponent", ok, &detail.join("; "));
}

#[test]
fn criterion_02_positive_cubature() {
    let sphere = ManifoldModel::sphere2();
    let a0 = manifold_widths::calibration::Calibration::builtin().get(ModelKind::Sphere2).a0;
    let lat = build_lattice(&sphere, a0 / 73f64.sqrt(), 0).unwrap();
    let rule = cubature_weights(&lat, 72.0).unwrap();
    let sphere_ok = rule.min_weight() > 0.0 && rule.max_residual <= 1e-8 && rule.spread() <= 50.0;

    let m = 16;
    let pts = (0..m).map(|k| Point::circle(TAU * k as f64 / m as f64)).collect();
    let eq = Lattice::from_points(&ManifoldModel::circle(), TAU / m as f64, pts).unwrap();
    let trap = cubature_weights(&eq, 49.0).unwrap();
    let trap_err = trap.weights.iter().map(|w| (w - TAU / m as f64).abs()).fold(0.0, f64::max);
    verdict(
        2,
        "positive cubature",
        sphere_ok && trap_err <= 1e-8,
        &format!(
            "sphere omega 72: {} points, min weight {:.3e}, residual {:.1e}, spread {:.2}; circle trapezoid error {trap_err:.1e}",
            rule.len(),
            rule.min_weight(),
            rule.max_residual,
            rule.spread()
        ),
    );
}

#[test]
fn criterion_03_plancherel_polya_stability() {
    let sphere = ManifoldModel::sphere2();
    let cal = manifold_widths::calibration::Calibration::builtin();
    let lats: Vec<(f64, Lattice)> = [64.0, 256.0, 1024.0]
        .iter()
        .map(|&w| (w, build_lattice(&sphere, cal.get(ModelKind::Sphere2).rho_for(w), 0).unwrap()))
        .collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, limit) in [(2.0, 2.0), (1.0, 4.0), (f64::INFINITY, 4.0)] {
        let ratios: Vec<f64> = lats.iter().map(|(w, l)| pp_constants(l, *w, p, 16, 0).unwrap().ratio()).collect();
        let drift = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= drift <= limit;
        detail.push(format!("p = {p}: drift {drift:.3} (limit {limit})"));
    }
    verdict(3, "Plancherel-Polya stability", ok, &detail.join("; "));
}

#[test]
fn criterion_04_product_band() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in MODELS {
        let out = run(ExperimentKind::Product, kind, &dir.path().join(kind.name()), &[("pairs", "100")]);
        let (mass_ok, mass) = check_detail(&out, "residual_mass");
        let (band_ok, _) = check_detail(&out, "measured_band");
        ok &= mass_ok && band_ok;
        detail.push(format!("{kind}: {mass}"));
    }
    let circle = ManifoldModel::circle();
    for (k, q) in [(1u32, 2u32), (3, 3), (4, 1), (5, 2), (7, 6)] {
        let omega = (k.max(q) * k.max(q)) as f64;
        let spec = Arc::new(enumerate_spectrum(&circle, omega).unwrap());
        let mode = |k: u32| {
            let i = spec.find(&EigenLabel::Circle { k, parity: Parity::Cos }).unwrap();
            BandlimitedFunction::basis(spec.clone(), i).unwrap()
        };
        let r = product_bandwidth(&mode(k), &mode(q), PRODUCT_TOL).unwrap();
        ok &= r.omega_measured == ((k + q) * (k + q)) as f64;
    }
    detail.push("circle pure modes land on (k+m)^2".into());
    verdict(4, "product band", ok, &detail.join("; "));
}

#[test]
fn criterion_05_eigensum_identity() {
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in MODELS {
        let model = ManifoldModel::new(kind);
        // Eigenvalues are integers on every model; take the largest band of dimension at most 2000.
        let (mut lo, mut hi) = (0u64, 4_000_000u64);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if count_eigenvalues(&model, mid as f64) <= 2000 {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let reports = eigensum_scan(&model, lo as f64, 100, 0).unwrap();
        let worst = reports.iter().map(|r| r.max_dev).fold(0.0, f64::max);
        ok &= worst <= 1e-9;
        detail.push(format!("{kind} up to {lo} ({} functions): {worst:.2e}", count_eigenvalues(&model, lo as f64)));
    }
    verdict(5, "eigensum identity", ok, &detail.join("; "));
}

#[test]
fn criterion_06_07_kernel_localization_and_alpha_norms() {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<(ModelKind, RunOutcome)> = MODELS
        .iter()
        .map(|&k| (k, run(ExperimentKind::Kernel, k, &dir.path().join(k.name()), &[("pairs", "1000"), ("points", "20")])))
        .collect();
    let mut ok6 = true;
    let mut d6 = Vec::new();
    for (kind, out) in &outs {
        let (ok, d) = check_detail(out, "envelope_ratio");
        ok6 &= ok;
        d6.push(format!("{kind}: {d}"));
    }
    let mut ok7 = true;
    let mut d7 = Vec::new();
    for (kind, out) in &outs {
        for label in ["1", "2", "inf"] {
            let (ok, d) = check_detail(out, &format!("alpha_{label}_band"));
            ok7 &= ok;
            d7.push(format!("{kind} alpha {label}: {d}"));
        }
    }
    println!("criterion  6 {} kernel localization: {}", if ok6 { "PASS" } else { "FAIL" }, d6.join("; "));
    println!("criterion  7 {} two-sided alpha-norms: {}", if ok7 { "PASS" } else { "FAIL" }, d7.join("; "));
    assert!(ok6 && ok7, "criterion 6: {ok6}, criterion 7: {ok7}");
}

#[test]
fn criterion_08_finite_propagation() {
    let dir = tempfile::tempdir().unwrap();
    let circle = run(ExperimentKind::Wave, ModelKind::Circle, &dir.path().join("c"), &[]);
    let torus = run(ExperimentKind::Wave, ModelKind::Torus2, &dir.path().join("t"), &[]);
    let (r_ok, _) = check_detail(&circle, "radius_within_t");
    let (c_ok, c) = check_detail(&torus, "c0_stability");
    verdict(8, "finite propagation", r_ok && c_ok, &format!("circle radius within t + 2 spacing: {r_ok}; torus {c}"));
}

#[test]
fn criterion_09_ellipsoid_widths() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (model, r) in [(ManifoldModel::circle(), 2.0), (ManifoldModel::torus2(), 3.0)] {
        let ns: Vec<usize> = (1..=512).collect();
        let ws = ellipsoid_widths(&model, r, &ns).unwrap();
        let worst = ws.iter().map(|w| (w.value / w.oracle).max(w.oracle / w.value)).fold(0.0, f64::max);
        let pairs: Vec<(f64, f64)> = ws.iter().filter(|w| w.n >= 8).map(|w| (w.n as f64, w.value)).collect();
        let fit = rate_fit(&pairs).unwrap();
        let target = -r / model.dim() as f64;
        ok &= worst <= 2f64.sqrt() && (fit.exponent - target).abs() <= 0.1;
        detail.push(format!("{:?} r = {r}: worst factor {worst:.4}, exponent {:.4} (target {target})", model.kind(), fit.exponent));
    }
    verdict(9, "ellipsoid widths", ok, &detail.join("; "));
}

#[test]
fn criterion_10_certificate_bracket() {
    let start = Instant::now();
    let circle = ManifoldModel::circle();
    let ns: Vec<usize> = (4..=9).map(|k| 1usize << k).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, q) in [(2.0, 2.0), (1.0, 2.0)] {
        let rep = width_sweep(&circle, p, q, 2.0, WidthKind::Kolmogorov, &ns).unwrap();
        let pred = rep.predicted_exponent.exponent().unwrap();
        let (up, lo) = (rep.upper.as_ref().unwrap().exponent, rep.lower.as_ref().unwrap().exponent);
        let (a, b) = (up.min(lo), up.max(lo));
        // Both fits within 0.1 of the prediction: a window of width 0.2 around it.
        let windowed = (up - pred).abs() <= 0.1 && (lo - pred).abs() <= 0.1;
        let strict = a <= pred && pred <= b;
        ok &= windowed;
        detail.push(format!(
            "({p},{q}): upper {up:.4}, lower {lo:.4}, predicted {pred}, both within 0.1: {windowed}, strictly bracketed: {strict}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    detail.push(format!("{secs:.1}s"));
    verdict(10, "certificate bracket", ok, &detail.join("; "));
}

#[test]
fn criterion_11_sequence_width_oracle() {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (kind, p, q) in CLOSED_FORMS {
        for m in 2..=4 {
            for n in 1..=2usize.min(m - 1) {
                let exact = sequence_width(kind, p, q, m, n).unwrap();
                let b = brute_sequence_width(kind, p, q, m, n, 50, 11).unwrap();
                worst = worst.max((b.value - exact).abs());
                cases += 1;
            }
        }
    }
    verdict(11, "sequence width oracle", worst <= 1e-3, &format!("{cases} cases, largest gap {worst:.2e}"));
}

#[test]
fn criterion_12_chain_and_schedule() {
    let circle = ManifoldModel::circle();
    let opts = ChainOptions::calibrated(&circle);
    let rep = discretization_chain(&circle, 8, 2.0, 2.0, &opts).unwrap();
    let band = rep.weight_band;
    let chain_ok = opts.ensemble == 50
        && rep.reproduction <= 1e-8
        && band.0 <= rep.i2_scaled * (1.0 + 1e-12)
        && rep.i2_scaled <= band.1 * (1.0 + 1e-12);
    let mut grid_ok = true;
    let mut cases = 0;
    for (r, s, p) in [(2.0, 1, 1.0), (3.0, 2, 1.0), (4.0, 2, 2.0), (2.5, 1, 2.0)] {
        for n in [64u64, 1000, 40_000, 2_000_000, 100_000_000] {
            let sch = allocation_schedule(r, s, p, n, r / s as f64 - 1.0 / p).unwrap();
            grid_ok &= sch.total < n && sch.total == sch.n.iter().sum::<u64>();
            cases += 1;
        }
    }
    verdict(
        12,
        "chain and schedule",
        chain_ok && grid_ok && cases == 20,
        &format!(
            "reproduction {:.1e} over {} functions, scaled i2 {:.4} in [{:.4}, {:.4}]; schedule budget held on {cases} points: {grid_ok}",
            rep.reproduction, opts.ensemble, rep.i2_scaled, band.0, band.1
        ),
    );
}

#[test]
fn criterion_13_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut differing = Vec::new();
    for kind in ExperimentKind::ALL {
        let a = run(kind, ModelKind::Circle, &dir.path().join(format!("{kind}-a")), &[]);
        let b = run(kind, ModelKind::Circle, &dir.path().join(format!("{kind}-b")), &[]);
        assert_eq!(a.files, b.files);
        for f in a.files.iter().filter(|f| f.ends_with(".csv") || f.ends_with(".json")) {
            let x = fs::read(dir.path().join(format!("{kind}-a")).join(f)).unwrap();
            let y = fs::read(dir.path().join(format!("{kind}-b")).join(f)).unwrap();
            compared += 1;
            if x != y {
                differing.push(format!("{kind}/{f}"));
            }
        }
    }
    verdict(13, "determinism", differing.is_empty(), &format!("{compared} files compared, differing: {differing:?}"));
}
