use manifold_widths::manifold::{enumerate_spectrum, reference_grid, EigenLabel, ManifoldModel, ModelKind, Parity, Point};
use manifold_widths::spectral::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

#[test]
fn partition_of_unity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for big_j in 1..=8 {
        let bank: Vec<FilterProfile> = (0..=big_j).map(|j| filter_bank(j).unwrap()).collect();
        let top = 4f64.powi(big_j as i32) * (1.0 - 1e-6);
        for _ in 0..400 {
            let lam = top * rng.random::<f64>();
            let s: f64 = bank.iter().map(|p| p.eval(lam)).sum();
            assert!((s - 1.0).abs() <= 1e-12, "J={big_j} lambda={lam} sum={s}");
        }
    }
}

#[test]
fn filter_bank_supports() {
    let phi1 = filter_bank(1).unwrap();
    for i in 0..=2000 {
        let x = 20.0 * i as f64 / 2000.0;
        if !(1.0..=16.0).contains(&x) {
            assert_eq!(phi1.eval(x), 0.0, "x={x}");
        }
    }
    for j in 1..6 {
        let p = filter_bank(j).unwrap();
        let v = p.eval(4f64.powi(j as i32));
        assert!(v > 0.0 && v <= 1.0);
        assert_eq!(p.eval(4f64.powi(j as i32 + 1) + 1e-9), 0.0);
    }
    assert!(filter_bank(-1).is_err());
    let eta = filter_bank(0).unwrap();
    assert_eq!(eta.eval(0.3), 1.0);
    assert_eq!(eta.eval(4.0), 0.0);
}

#[test]
fn psi_companion_is_phi_over_power() {
    let r = 1.5;
    let psi3 = filter_bank_companion(3, r).unwrap();
    let phi3 = filter_bank(3).unwrap();
    for x in [20.0f64, 40.0, 100.0, 200.0] {
        let s = 16.0;
        assert!((psi3.eval(x) - phi3.eval(x) / (x / s).powf(r / 2.0)).abs() < 1e-14);
    }
}

#[test]
fn profiles_have_bounded_derivatives() {
    for p in [FilterProfile::eta(), FilterProfile::phi(), FilterProfile::gaussian_vanishing(), FilterProfile::paley_wiener()] {
        let h = 1e-3;
        let mut max2: f64 = 0.0;
        for i in 1..20_000 {
            let u = i as f64 * h;
            let d2 = (p.eval(u + h) - 2.0 * p.eval(u) + p.eval(u - h)) / (h * h);
            max2 = max2.max(d2.abs());
        }
        assert!(max2.is_finite() && max2 < 1e4, "{}: {max2}", p.name());
    }
}

#[test]
fn band_project_examples() {
    let m = ManifoldModel::circle();
    let spec = Arc::new(enumerate_spectrum(&m, 9.0).unwrap());
    let coeffs: Vec<f64> = (0..spec.len()).map(|i| (i as f64).sin() + 0.5).collect();
    let f = BandlimitedFunction::new(spec.clone(), coeffs.clone()).unwrap();
    let same = band_project(&FilterProfile::eta(), (1.0f64 / 9.0).sqrt(), &f).unwrap();
    assert_eq!(same.coeffs(), f.coeffs());
    let id = band_project(&FilterProfile::one(), 3.7, &f).unwrap();
    assert_eq!(id.coeffs(), f.coeffs());
    let k1 = spec.find(&EigenLabel::Circle { k: 1, parity: Parity::Cos }).unwrap();
    let g = band_project(&FilterProfile::gaussian(), 1.0, &f).unwrap();
    assert!((g.coeffs()[k1] - coeffs[k1] * (-1.0f64).exp()).abs() < 1e-15);
    assert!(band_project(&FilterProfile::eta(), 0.0, &f).is_err());
    // eta at t = 1 keeps only lambda < 4
    let narrow = band_project(&FilterProfile::eta(), 1.0, &f).unwrap();
    assert!(narrow.omega() <= 4.0);
}

#[test]
fn grid_band_project_matches_coefficient_route() {
    let m = ManifoldModel::sphere2();
    let f = rand_band(&m, 20.0, 2.0, 3).unwrap();
    let grid = Arc::new(reference_grid(&m, 30.0).unwrap());
    let g = GridFunction::new(grid.clone(), f.on_grid(&grid)).unwrap();
    let a = band_project_grid(&FilterProfile::eta(), (4.0f64 / 20.0).sqrt(), &g).unwrap();
    let b = band_project(&FilterProfile::eta(), (4.0f64 / 20.0).sqrt(), &f).unwrap();
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x - y).abs() < 1e-11);
    }
    assert!(band_project_grid(&FilterProfile::eta(), 0.1, &g).is_err());
}

#[test]
fn sphere_kernel_is_zonal() {
    let m = ManifoldModel::sphere2();
    let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = 0.8;
    let reference = k.eval_distance(d);
    for _ in 0..100 {
        let x = m.random_point(&mut rng);
        let y = m.point_at_distance(&x, d, TAU * rng.random::<f64>());
        assert!((k.eval(&x, &y) - reference).abs() < 1e-9);
    }
}

#[test]
fn kernels_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for kind in ModelKind::ALL {
        let m = ManifoldModel::new(kind);
        for prof in [FilterProfile::gaussian_vanishing(), FilterProfile::eta()] {
            let k = ZonalKernel::new(&m, &prof, 0.2).unwrap();
            for _ in 0..30 {
                let x = m.random_point(&mut rng);
                let y = m.random_point(&mut rng);
                assert!((k.eval(&x, &y) - k.eval(&y, &x)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn graph_norm_of_eigenfunction() {
    let m = ManifoldModel::sphere2();
    let spec = Arc::new(enumerate_spectrum(&m, 12.0).unwrap());
    let f = BandlimitedFunction::basis(spec.clone(), 6).unwrap();
    let lam = spec.entries()[6].lambda;
    for p in [1.0, 2.0, f64::INFINITY] {
        let plain = lp_norm(&f, p, 0.0).unwrap();
        let graph = lp_norm(&f, p, 3.0).unwrap();
        assert!((graph - (1.0 + lam.powf(1.5)) * plain).abs() < 1e-10 * graph);
    }
}

#[test]
fn parseval_on_reference_grid() {
    for kind in ModelKind::ALL {
        let m = ManifoldModel::new(kind);
        for seed in 0..5 {
            let f = rand_band(&m, 40.0, 2.0, seed).unwrap();
            let grid = reference_grid(&m, 40.0).unwrap();
            let g = lp_norm_on(&grid, &f, 2.0, 0.0).unwrap();
            assert!((g - f.l2_norm()).abs() < 1e-9);
            assert!((f.l2_norm() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn alpha_two_matches_parseval() {
    for kind in ModelKind::ALL {
        let m = ManifoldModel::new(kind);
        let prof = FilterProfile::gaussian_vanishing();
        let t = 0.25;
        let k = ZonalKernel::new(&m, &prof, t).unwrap();
        let x = Point { a: 1.1, b: 0.4 };
        let spec = enumerate_spectrum(&m, k.lambda_cut()).unwrap();
        let u = spec.eval_all(&x);
        let direct: f64 = spec
            .entries()
            .iter()
            .zip(&u)
            .map(|(e, v)| (prof.eval(t * t * e.lambda) * v).powi(2))
            .sum::<f64>()
            .sqrt();
        let measured = alpha_norm(&k, &x, 2.0).unwrap();
        assert!((measured - direct).abs() < 1e-8 * direct, "{kind}: {measured} vs {direct}");
    }
}

#[test]
fn zero_kernel_has_zero_norm() {
    let k = ZonalKernel::new(&ManifoldModel::circle(), &FilterProfile::zero(), 0.5).unwrap();
    assert_eq!(alpha_norm(&k, &Point::circle(0.0), 1.0).unwrap(), 0.0);
}

#[test]
fn coarse_grid_alpha_norm_is_refused() {
    let m = ManifoldModel::circle();
    let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), 0.1).unwrap();
    let grid = reference_grid(&m, 10.0).unwrap();
    assert!(alpha_norm_on(&k, &Point::circle(0.0), 1.0, &grid).is_err());
}

#[test]
fn localization_envelope_is_uniform_for_eta() {
    for kind in ModelKind::ALL {
        let m = ManifoldModel::new(kind);
        let mut env = Vec::new();
        for e in 1..=5 {
            let t = 2f64.powi(-e);
            let k = ZonalKernel::new(&m, &FilterProfile::eta(), t).unwrap();
            let pairs = sample_pairs(&m, t, 400, 21 + e as u64);
            env.push(localization_stat(&k, &pairs, &[]).unwrap().sup_envelope);
        }
        let hi = env.iter().cloned().fold(0.0, f64::max);
        let lo = env.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 10.0, "{kind}: {env:?}");
    }
}

#[test]
fn localization_preconditions() {
    let m = ManifoldModel::circle();
    let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), 2.0).unwrap();
    let pairs = sample_pairs(&m, 2.0, 10, 1);
    assert!(localization_stat(&k, &pairs, &[]).is_err());
    let kv = ZonalKernel::new(&m, &FilterProfile::gaussian_vanishing(), 2.0).unwrap();
    assert!(localization_stat(&kv, &pairs, &[1.0]).unwrap().sup_envelope.is_finite());
    assert!(localization_stat(&kv, &[], &[]).is_err());
    let x = Point::circle(0.4);
    let kd = ZonalKernel::new(&m, &FilterProfile::eta(), 0.3).unwrap();
    let s = localization_stat(&kd, &[(x, x)], &[]).unwrap();
    assert!(s.sup_envelope >= 0.3 * kd.eval(&x, &x) - 1e-15 && s.sup_envelope > 0.0);
}

#[test]
fn young_certificate_holds_for_discrete_operators() {
    let m = ManifoldModel::sphere2();
    let grid = reference_grid(&m, 60.0).unwrap();
    let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), 0.4).unwrap();
    let n = grid.len();
    let mut mat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            mat[i * n + j] = k.eval(&grid.nodes[i], &grid.nodes[j]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (p, alpha) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (1.5, 1.2)] {
        // discrete alpha-norms of rows and columns in the grid measure
        let mut c: f64 = 0.0;
        for i in 0..n {
            let row: Vec<f64> = (0..n).map(|j| mat[i * n + j]).collect();
            c = c.max(weighted_lp(&grid.weights, &row, alpha));
        }
        let (q, bound) = young_bound(c, p, alpha).unwrap();
        for _ in 0..200 {
            let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let kf: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| mat[i * n + j] * grid.weights[j] * f[j]).sum())
                .collect();
            let lhs = weighted_lp(&grid.weights, &kf, q);
            let rhs = bound * weighted_lp(&grid.weights, &f, p);
            assert!(lhs <= rhs * (1.0 + 1e-12), "p={p} alpha={alpha}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn circle_wave_support_is_within_t() {
    let m = ManifoldModel::circle();
    for t in [0.2, 0.1, 0.05] {
        let w = wave_support_radius(&m, t, 1e-8).unwrap();
        assert!(w.radius <= t + 2.0 * w.spacing, "t={t}: R={}", w.radius);
        assert!(w.radius > 0.3 * t);
    }
    assert_eq!(wave_support_radius(&m, 0.1, f64::INFINITY).unwrap().radius, 0.0);
    assert!(wave_support_radius(&m, 0.1, 0.0).is_err());
}

#[test]
fn torus_wave_support_ratio_is_stable() {
    let m = ManifoldModel::torus2();
    let c: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&t| wave_support_radius(&m, t, 1e-8).unwrap().c0).collect();
    let mean = c.iter().sum::<f64>() / 3.0;
    for v in &c {
        assert!((v - mean).abs() <= 0.2 * mean, "{c:?}");
        assert!(*v <= 1.0 + 0.1, "{c:?}");
    }
}

#[test]
fn block_norm_l2_cases() {
    let m = ManifoldModel::circle();
    let opts = BlockNormOptions { spectrum_cap: Some(10.0), ..Default::default() };
    let b = block_norm(&m, 4, 2.0, 2.0, 2.0, &opts).unwrap();
    assert_eq!(b.upper_est, 0.0);
    let mut prev = f64::INFINITY;
    for j in 1..8u32 {
        let b = block_norm(&m, j, 2.0, 2.0, 2.0, &BlockNormOptions::default()).unwrap();
        assert_eq!(b.lower_est, b.upper_est);
        assert!(b.upper_est * 4f64.powi(j as i32) < 2.0, "j={j}");
        assert!(b.upper_est <= prev);
        prev = b.upper_est;
    }
    let zero = BlockNormOptions { ensemble: 0, ..Default::default() };
    assert!(block_norm(&m, 2, 1.0, 2.0, 2.0, &zero).is_err());
}

#[test]
fn block_norm_upper_dominates_ensemble() {
    for kind in [ModelKind::Circle, ModelKind::Sphere2] {
        let m = ManifoldModel::new(kind);
        let s = m.dim() as f64;
        let (p, q, r) = (1.0, 2.0, 2.0);
        let mut scaled = Vec::new();
        for j in 2..=5u32 {
            let b = block_norm(&m, j, p, q, r, &BlockNormOptions::default()).unwrap();
            assert!(b.lower_est <= b.upper_est, "{kind} j={j}: {b:?}");
            let rate = 2f64.powf(j as f64 * s).powf(-r / s + 1.0 / p - 1.0 / q);
            scaled.push(b.upper_est / rate);
        }
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 4.0, "{kind}: {scaled:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_function(seed in any::<u64>(), om in 1.0f64..40.0) {
        let m = ManifoldModel::torus2();
        let a = rand_band(&m, om, 2.0, seed).unwrap();
        let b = rand_band(&m, om, 2.0, seed).unwrap();
        prop_assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn kernel_symmetry_random(t in 0.05f64..1.0, a in 0.0f64..PI, b in 0.0f64..TAU, c in 0.0f64..PI, d in 0.0f64..TAU) {
        let m = ManifoldModel::sphere2();
        let k = ZonalKernel::new(&m, &FilterProfile::gaussian(), t).unwrap();
        let x = Point::sphere(a, b);
        let y = Point::sphere(c, d);
        prop_assert!((k.eval(&x, &y) - k.eval(&y, &x)).abs() <= 1e-12 * (1.0 + k.diagonal()));
    }

    #[test]
    fn partition_of_unity_random(lam in 0.0f64..(4f64.powi(9) * (1.0 - 1e-6))) {
        let s: f64 = (0..=9).map(|j| filter_bank(j).unwrap().eval(lam)).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }
}
