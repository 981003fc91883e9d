mod common;

use bubblekit::gibbons_hawking::{
    ak_rescaled_limits, curvature_blowup, curvature_norm, defining_equation, family_equation, potential, AkLimit,
    Basepoint, GhError, Monopole, MonopoleConfig, MonopoleFamily,
};
use bubblekit::rescale::{rescale, WeightVector};
use bubblekit::series::{GaussRat, Germ, Monomial, PolyFamily, Rat};
use bubblekit::tree::VanishingTree;
use common::{distinct_germs, germ, oracle_curvature, random_germ, rng};
use proptest::prelude::*;
use rand::Rng;

fn random_config<R: Rng>(g: &mut R) -> MonopoleConfig {
    let n = g.gen_range(1..=4);
    let mut points: Vec<Monopole> = Vec::new();
    while points.len() < n {
        let position = [0, 1, 2].map(|_| Rat::new(g.gen_range(-8..=8), 4));
        if points.iter().all(|p| p.position != position) {
            points.push(Monopole { position, multiplicity: g.gen_range(1..=3) });
        }
    }
    MonopoleConfig::new(points).unwrap()
}

fn floats(cfg: &MonopoleConfig) -> Vec<([f64; 3], f64)> {
    cfg.points()
        .iter()
        .map(|p| (p.position.clone().map(|c| c.to_f64()), f64::from(p.multiplicity)))
        .collect()
}

fn nearest(cfg: &MonopoleConfig, x: [f64; 3]) -> f64 {
    floats(cfg)
        .iter()
        .map(|(p, _)| ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + (x[2] - p[2]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

fn random_point<R: Rng>(g: &mut R, cfg: &MonopoleConfig, clearance: f64) -> [f64; 3] {
    loop {
        let x = [0, 1, 2].map(|_| g.gen_range(-4.0..4.0));
        if nearest(cfg, x) >= clearance {
            return x;
        }
    }
}

fn random_family<R: Rng>(g: &mut R) -> MonopoleFamily {
    let n = g.gen_range(1..=5);
    let mut z_paths = distinct_germs(g, n, &GaussRat::zero(), 3, 5);
    if g.gen_bool(0.3) {
        z_paths.push(random_germ(g, GaussRat::integer(2), 2, 5));
    }
    let section = if g.gen_bool(0.3) { z_paths[0].clone() } else { random_germ(g, GaussRat::zero(), 4, 5) };
    MonopoleFamily { z_paths, section }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curvature_matches_taylor_jets(seed in any::<u64>()) {
        let mut g = rng(seed);
        let cfg = random_config(&mut g);
        let x = random_point(&mut g, &cfg, 0.75);
        let fd = curvature_norm(&cfg, x).unwrap();
        let exact = oracle_curvature(&floats(&cfg), x);
        prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-3), "fd {} jet {}", fd, exact);
    }

    #[test]
    fn single_monopole_is_flat(seed in any::<u64>()) {
        let mut g = rng(seed);
        let cfg = MonopoleConfig::new(vec![Monopole {
            position: [0, 1, 2].map(|_| Rat::new(g.gen_range(-4..=4), 2)),
            multiplicity: 1,
        }])
        .unwrap();
        let x = random_point(&mut g, &cfg, 0.5);
        prop_assert!(curvature_norm(&cfg, x).unwrap().abs() < 1e-6);
    }

    #[test]
    fn potential_scales_inversely(seed in any::<u64>(), num in 1i64..=12, den in 1i64..=5) {
        let mut g = rng(seed);
        let cfg = random_config(&mut g);
        let x = random_point(&mut g, &cfg, 0.1);
        let lambda = Rat::new(num, den);
        let l = lambda.to_f64();
        let scaled = potential(&cfg.scaled(&lambda), x.map(|c| c * l)).unwrap();
        let base = potential(&cfg, x).unwrap();
        prop_assert!((scaled * l / base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ak_breakpoints_follow_the_tree(seed in any::<u64>()) {
        let fam = random_family(&mut rng(seed));
        let lim = ak_rescaled_limits(&fam).unwrap();
        // Tree of the recentred paths together with the section itself (as 0),
        // unless the section is one of the paths.
        let mut centred: Vec<Germ> = fam.z_paths.iter().map(|p| p - &fam.section).collect();
        let matched = centred.iter().position(|c| c.is_zero());
        let marker = match matched {
            Some(i) => i,
            None => {
                centred.push(Germ::zero(5));
                centred.len() - 1
            }
        };
        let tree = VanishingTree::build(&centred).unwrap();
        let leaf = tree.leaf_of(marker).unwrap();
        let nodes: Vec<usize> = tree
            .ancestors(leaf)
            .into_iter()
            .filter(|&v| tree.node(v).unwrap().split_order.unwrap() >= 1)
            .collect();
        prop_assert_eq!(lim.breakpoints.len(), nodes.len());
        for (b, &v) in lim.breakpoints.iter().zip(&nodes) {
            let node = tree.node(v).unwrap();
            let own = node.members.iter().filter(|&&m| matched.is_some() || m != marker).count() as u32;
            prop_assert_eq!(b.d, node.split_order.unwrap());
            prop_assert_eq!(b.model.cone_order(), own);
            prop_assert_eq!(b.cone_below, own);
            // Child monopoles: one per child at its coefficient, multiplicity its size.
            for &c in &node.children {
                let child = tree.node(c).unwrap();
                let size = child.members.iter().filter(|&&m| matched.is_some() || m != marker).count() as u32;
                let coeff = centred[child.members[0]].coeff(b.d);
                let found = b.model.config.points().iter().find(|p| Monopole::planar(&coeff, p.multiplicity) == **p);
                if size > 0 {
                    prop_assert_eq!(found.map(|p| p.multiplicity), Some(size));
                } else {
                    prop_assert!(found.is_none());
                    prop_assert_eq!(b.model.basepoint, Basepoint::Regular);
                }
            }
        }
    }

    #[test]
    fn ak_limits_agree_with_rescaled_equation(seed in any::<u64>()) {
        let fam = random_family(&mut rng(seed));
        prop_assume!(fam.section.is_zero());
        let lim = ak_rescaled_limits(&fam).unwrap();
        let eq = family_equation(&fam.z_paths);
        for b in &lim.breakpoints {
            // z has weight 1; u, v share the weight balancing uv against the product.
            let total: u32 = fam.z_paths.iter().map(|p| p.ord().finite().unwrap_or(u32::MAX).min(b.d)).sum();
            let uv = Rat::new(i64::from(total), 2 * i64::from(b.d));
            let w = WeightVector::new(vec![uv.clone(), uv, Rat::one()]).unwrap();
            let limit = rescale(&eq, &w, &Rat::from(b.d)).unwrap().limit;
            let z_part = |p: &PolyFamily| {
                PolyFamily::from_terms(
                    p.variables(),
                    p.terms().filter(|(m, _)| m.degrees[0] == 0 && m.degrees[1] == 0).map(|(m, c)| (m.clone(), c.clone())),
                )
                .normalized()
            };
            let expected = z_part(&defining_equation(&b.model.config).unwrap());
            prop_assert_eq!(z_part(&limit), expected);
            prop_assert!(limit.coefficient(&Monomial::new(Rat::zero(), vec![1, 1, 0])).is_some());
        }
    }
}

#[test]
fn eguchi_hanson_origin_and_decay() {
    let eh = MonopoleConfig::planar(&[(GaussRat::integer(1), 1), (GaussRat::integer(-1), 1)]).unwrap();
    let at0 = curvature_norm(&eh, [0.0; 3]).unwrap();
    assert!((at0 - oracle_curvature(&[([1.0, 0.0, 0.0], 1.0), ([-1.0, 0.0, 0.0], 1.0)], [0.0; 3])).abs() < 1e-6);
    assert!((at0 - 6.0).abs() < 1e-6);
    for dir in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, 1.0]] {
        let values: Vec<f64> =
            [2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|r| curvature_norm(&eh, dir.map(|c| c * r)).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(values[4] < 1e-6);
    }
}

#[test]
fn guards() {
    let one = MonopoleConfig::planar(&[(GaussRat::zero(), 1)]).unwrap();
    assert_eq!(curvature_norm(&one, [0.0; 3]), Err(GhError::SingularPoint { index: 0 }));
    assert!(matches!(curvature_norm(&one, [1e-8, 0.0, 0.0]), Err(GhError::StepUnderflow { .. })));
}

#[test]
fn curvature_grows_at_the_collision_rate() {
    // Monopoles at +-t give f_t(x) = f_1(x/t) / t, so 1/f_t = t (1/f_1)(x/t)
    // and its bi-Laplacian at the origin scales as t^(-3).
    let fam = MonopoleFamily { z_paths: vec![germ("t + O(t^3)"), germ("-t + O(t^3)")], section: germ("0 + O(t^3)") };
    let ts = [0.5, 0.25, 0.125, 0.0625, 0.03125];
    let (samples, fit) = curvature_blowup(&fam, &ts).unwrap();
    assert_eq!(samples.len(), 5);
    assert!((fit.slope + 3.0).abs() < 1e-4, "{}", fit.slope);
    assert!(fit.r2 > 0.999_999);
}

#[test]
fn limits_classify_by_regime() {
    let fam = MonopoleFamily {
        z_paths: vec![germ("t + O(t^4)"), germ("-t + O(t^4)"), germ("t^2 + O(t^4)"), germ("-t^2 + O(t^4)")],
        section: germ("0 + O(t^4)"),
    };
    let lim = ak_rescaled_limits(&fam).unwrap();
    match lim.classify(&Rat::new(1, 2)).unwrap() {
        AkLimit::Ale(m) => assert_eq!(m.basepoint_type, 1),
        other => panic!("{other:?}"),
    }
}
