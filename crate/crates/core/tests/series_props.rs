mod common;

use bubblekit::series::{GaussRat, Germ, Order, PolyFamily, Rat};
use common::{oracle_agree, random_germ, rng};
use proptest::prelude::*;

fn order_of(o: Option<u32>) -> Order {
    o.map_or(Order::Infinite, Order::Finite)
}

proptest! {
    #[test]
    fn agree_order_is_symmetric_and_ultrametric(seed in any::<u64>()) {
        let mut g = rng(seed);
        let f = random_germ(&mut g, GaussRat::zero(), 5, 6);
        let h = random_germ(&mut g, GaussRat::zero(), 5, 6);
        let k = random_germ(&mut g, GaussRat::zero(), 5, 6);
        prop_assert_eq!(f.agree_order(&h), h.agree_order(&f));
        prop_assert_eq!(f.agree_order(&h), order_of(oracle_agree(&f, &h)));
        prop_assert!(f.agree_order(&k) >= f.agree_order(&h).min(h.agree_order(&k)));
    }

    #[test]
    fn scaling_keeps_order(seed in any::<u64>(), re in -5i64..5, im in -5i64..5) {
        prop_assume!(re != 0 || im != 0);
        let f = random_germ(&mut rng(seed), GaussRat::zero(), 5, 6);
        let c = GaussRat::new(Rat::integer(re), Rat::new(im, 3));
        prop_assert_eq!(f.scale(&c).ord(), f.ord());
    }

    #[test]
    fn germ_render_round_trip(seed in any::<u64>()) {
        let f = random_germ(&mut rng(seed), GaussRat::new(Rat::new(1, 2), Rat::zero()), 5, 7);
        let text = f.to_string();
        prop_assert_eq!(Germ::parse(&text).unwrap(), f.clone(), "{}", text);
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<Germ>(&json).unwrap(), f);
    }

    #[test]
    fn poly_render_round_trip(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_germ(&mut g, GaussRat::integer(1), 3, 4);
        let b = random_germ(&mut g, GaussRat::zero(), 3, 4);
        let vars = vec!["x".to_string(), "y".to_string()];
        let p = PolyFamily::variable(&vars, 0)
            .pow(2)
            .try_mul(&PolyFamily::from_germ(&vars, &a))
            .unwrap()
            .try_sub(&PolyFamily::variable(&vars, 1).try_mul(&PolyFamily::from_germ(&vars, &b)).unwrap())
            .unwrap()
            .shift_t(&Rat::new(1, 2));
        let text = p.to_string();
        prop_assert_eq!(PolyFamily::parse(&text, &["x", "y"]).unwrap(), p, "{}", text);
    }
}

#[test]
fn canonical_rendering() {
    assert_eq!(Germ::parse("t - t^4 + O(t^6)").unwrap().to_string(), "t - t^4 + O(t^6)");
    assert_eq!(Germ::parse("-t^4 + t").unwrap().to_string(), "t - t^4 + O(t^5)");
    let f = PolyFamily::parse("w^2 - z^3 - t*z", &["z", "w"]).unwrap();
    assert_eq!(f.to_string(), "w^2 - z^3 - t*z");
}
