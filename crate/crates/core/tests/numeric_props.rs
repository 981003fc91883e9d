mod common;

use bubblekit::flat::{alpha_exponents, Ambient, AngleVector, FamilyConfig};
use bubblekit::numeric::{
    cone_angle_at_infinity, cone_angle_probe, distance_surrogate, path_length, scaling_slope, sphere_area,
    ConeConfig, QuadratureSpec,
};
use bubblekit::series::Rat;
use common::{beta_fn, germ, germs, oracle_three_point_area, r, random_cone_config, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn length_is_additive_and_parameter_free(seed in any::<u64>(), s in 0.05f64..0.95) {
        let mut g = rng(seed);
        let cfg = random_cone_config(&mut g, 3);
        let spec = QuadratureSpec::with_tolerance(1e-12);
        let a = cfg.positions[0];
        let b = c(g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0));
        let m = a + (b - a) * s;
        let whole = path_length(&cfg, &[a, b], &spec).unwrap();
        let split = path_length(&cfg, &[a, m, b], &spec).unwrap();
        let pieces = path_length(&cfg, &[a, m], &spec).unwrap() + path_length(&cfg, &[m, b], &spec).unwrap();
        prop_assert!((whole - split).abs() <= 1e-10 * whole);
        prop_assert!((split - pieces).abs() <= 1e-10 * whole);
        let reversed = path_length(&cfg, &[b, a], &spec).unwrap();
        prop_assert!((whole - reversed).abs() <= 1e-10 * whole);
    }

    #[test]
    fn surrogate_is_symmetric(seed in any::<u64>()) {
        let mut g = rng(seed);
        let cfg = random_cone_config(&mut g, 3);
        let spec = QuadratureSpec::with_tolerance(1e-9);
        let (a, b) = (cfg.positions[0], cfg.positions[1]);
        let ab = distance_surrogate(&cfg, a, b, &spec).unwrap();
        let ba = distance_surrogate(&cfg, b, a, &spec).unwrap();
        let straight = path_length(&cfg, &[a, b], &spec).unwrap();
        prop_assert!(ab <= straight * (1.0 + 1e-9));
        prop_assert!((ab - ba).abs() <= 2e-2 * ab, "{} {}", ab, ba);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn probes_recover_cone_angles(seed in any::<u64>()) {
        let mut g = rng(seed);
        let cfg = random_cone_config(&mut g, 3);
        for (p, beta) in cfg.positions.iter().zip(&cfg.betas) {
            let est = cone_angle_probe(&cfg, *p, &[0.2, 0.1, 0.05]).unwrap();
            prop_assert!((est - beta).abs() < 1e-3, "{} vs {}", est, beta);
        }
        let smooth = c(3.0, 3.0);
        prop_assert!((cone_angle_probe(&cfg, smooth, &[0.2, 0.1, 0.05]).unwrap() - 1.0).abs() < 1e-3);
        let gamma = cone_angle_at_infinity(&cfg, &[8.0, 16.0, 32.0, 64.0]).unwrap();
        prop_assert!((gamma - cfg.gamma_infinity()).abs() < 1e-2);
    }
}

#[test]
fn two_cone_segment_matches_beta_function() {
    let cfg = ConeConfig::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![0.75, 0.75]).unwrap();
    let spec = QuadratureSpec::default();
    let got = path_length(&cfg, &[c(-1.0, 0.0), c(1.0, 0.0)], &spec).unwrap();
    let exact = 2f64.sqrt() * beta_fn(0.75, 0.75);
    assert!((got / exact - 1.0).abs() < 1e-8, "{got} {exact}");
}

#[test]
fn sphere_area_against_triangle_oracle() {
    let spec = QuadratureSpec::with_tolerance(1e-9);
    for (q, beta) in [
        ([c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
        ([c(0.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5)], [0.5, 0.25, 0.25]),
        ([c(0.3, 0.0), c(1.0, -1.0), c(-1.5, 0.5)], [0.2, 0.45, 0.35]),
    ] {
        let cfg = ConeConfig::new(q.to_vec(), beta.to_vec()).unwrap();
        let area = sphere_area(&cfg, &spec).unwrap();
        let exact = oracle_three_point_area(q, beta);
        assert!((area / exact - 1.0).abs() < 1e-6, "{area} vs {exact}");
    }
}

#[test]
fn sphere_area_scaling_and_refinement() {
    let cfg = ConeConfig::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)], vec![0.5; 4]).unwrap();
    let coarse = sphere_area(&cfg, &QuadratureSpec::with_tolerance(1e-6)).unwrap();
    let fine = sphere_area(&cfg, &QuadratureSpec::with_tolerance(1e-9)).unwrap();
    assert!(fine > 0.0);
    assert!((coarse / fine - 1.0).abs() < 1e-5);
    let doubled = ConeConfig::new(cfg.positions.iter().map(|p| p * 2.0).collect(), cfg.betas.clone()).unwrap();
    let ratio = sphere_area(&doubled, &QuadratureSpec::with_tolerance(1e-9)).unwrap() / fine;
    // 2^(2 sum(beta - 1) + 2) with total defect 2.
    assert!((ratio - 0.25).abs() < 1e-7, "{ratio}");
}

fn plane(texts: &[&str], betas: Vec<Rat>) -> FamilyConfig {
    FamilyConfig::new(germs(texts), AngleVector::new(betas).unwrap(), Ambient::Plane).unwrap()
}

#[test]
fn collision_slope() {
    let fam = plane(&["t", "-t"], vec![r(7, 10), r(6, 10)]);
    let ts: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k)).collect();
    let fit = scaling_slope(&fam, &germ("t"), &germ("-t"), &ts, &QuadratureSpec::default()).unwrap();
    assert!((fit.slope - 0.3).abs() < 2e-2 * 0.3, "{}", fit.slope);
    assert!(fit.r2 > 0.999);
}

#[test]
fn fixed_separation_has_zero_slope() {
    let fam = plane(&["t", "-t"], vec![r(7, 10), r(6, 10)]);
    // The length moves by O(t) as the cone points drift, so small t only.
    let ts: Vec<f64> = (8..=14).map(|k| 2f64.powi(-k)).collect();
    let fit = scaling_slope(&fam, &germ("2 + t"), &germ("3 + t"), &ts, &QuadratureSpec::default()).unwrap();
    assert!(fit.slope.abs() < 1e-3, "{}", fit.slope);
}

#[test]
fn splitting_scale_slope_matches_exponent() {
    let texts = ["t + O(t^6)", "t - t^4 + O(t^6)", "t + t^4 + O(t^6)", "t^2 + O(t^6)"];
    let fam = plane(&texts, vec![r(9, 10); 4]);
    let analysis = alpha_exponents(&fam, &germ("t - t^4 + O(t^6)")).unwrap();
    let predicted = analysis.breakpoints.iter().find(|b| b.d == 4).unwrap().alpha.to_f64();
    let ts: Vec<f64> = (3..=7).map(|k| 2f64.powi(-k)).collect();
    let fit = scaling_slope(&fam, &germ("t - t^4"), &germ("t + t^4"), &ts, &QuadratureSpec::with_tolerance(1e-10)).unwrap();
    assert!((fit.slope - predicted).abs() < 2e-2 * predicted, "{} vs {}", fit.slope, predicted);
}
