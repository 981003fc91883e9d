mod common;

use bubblekit::flat::bubble_tree;
use bubblekit::moduli::{
    bubble_report_shape, bubbletree_to_nodal_curve, is_beta_stable, nodal_curve_to_bubbletree_shape, node_weights,
    principal_component, resolve,
};
use bubblekit::series::Rat;
use common::{oracle_far_weight, oracle_principal, random_sphere_family, random_stable_curve, rng};
use proptest::prelude::*;

proptest! {
    #[test]
    fn principal_component_matches_scan(seed in any::<u64>()) {
        let inst = random_stable_curve(&mut rng(seed));
        let found = principal_component(&inst.curve, &inst.angles).unwrap();
        prop_assert_eq!(vec![found], oracle_principal(&inst.curve, &inst.angles));
    }

    #[test]
    fn node_weights_pair_up(seed in any::<u64>()) {
        let inst = random_stable_curve(&mut rng(seed));
        let w = node_weights(&inst.curve, &inst.angles).unwrap();
        for &(a, b) in inst.curve.edges() {
            let (ab, ba) = (w.weight(a, b).unwrap(), w.weight(b, a).unwrap());
            prop_assert_eq!(ab, &oracle_far_weight(&inst.curve, &inst.angles, a, b));
            prop_assert_eq!(ab + ba, Rat::integer(2));
            prop_assert!((*ab < 1) != (*ba < 1));
        }
    }

    #[test]
    fn resolution_is_stable(seed in any::<u64>()) {
        let inst = random_stable_curve(&mut rng(seed));
        let tuple = resolve(&inst.curve, &inst.angles).unwrap();
        prop_assert!(is_beta_stable(&tuple, &inst.angles));
    }

    #[test]
    fn bubble_tree_round_trip(seed in any::<u64>()) {
        let cfg = random_sphere_family(&mut rng(seed));
        let curve = bubbletree_to_nodal_curve(&cfg).unwrap();
        let back = nodal_curve_to_bubbletree_shape(&curve, &cfg.angles).unwrap();
        let direct = bubble_report_shape(&cfg, &bubble_tree(&cfg).unwrap());
        prop_assert_eq!(back, direct);
        prop_assert_eq!(principal_component(&curve, &cfg.angles).unwrap(), 0);
    }
}
