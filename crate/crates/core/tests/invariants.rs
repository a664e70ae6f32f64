use std::sync::Arc;

use fpa_core::ccfpa_blackbox;
use fpa_core::ccfpa_explicit::{canonical_bid_function, eval_canonical};
use fpa_core::cdfpa::{compute_strategy, delta_win_prob, phi, BidGrid};
use fpa_core::dist::{strongly_increasing_transform, Cdf, CdfOracle, MixedCdf, PiecewisePolyCdf};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Rational;

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..=4096).prop_flat_map(|d| (0..=d).prop_map(move |k| Rational::from((k, d))))
}

fn open_rational() -> impl Strategy<Value = Rational> {
    (2i64..=4096).prop_flat_map(|d| (1..d).prop_map(move |k| Rational::from((k, d))))
}

fn fixture() -> impl Strategy<Value = PiecewisePolyCdf> {
    prop_oneof![
        Just(PiecewisePolyCdf::uniform()),
        (1u32..=4).prop_map(PiecewisePolyCdf::power),
        Just(
            PiecewisePolyCdf::new(
                vec![Rational::from(0), Rational::from((1, 2)), Rational::from(1)],
                vec![
                    vec![Rational::new(), Rational::new(), Rational::from(1)],
                    vec![Rational::from((-1, 2)), Rational::from((3, 2))],
                ],
            )
            .unwrap()
        ),
    ]
}

fn grid() -> impl Strategy<Value = BidGrid> {
    prop::collection::btree_set(1u32..100, 0..6).prop_map(|set| {
        let mut bids = vec![Rational::new()];
        bids.extend(set.into_iter().map(|k| Rational::from((k, 100))));
        BidGrid::new(bids).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_coefficients_match_mixture(f in fixture(), d in open_rational(), x in unit_rational()) {
        let direct = strongly_increasing_transform(&f, &d).unwrap().eval(&x).unwrap();
        let mixed = MixedCdf::new(Arc::new(f.clone()), d.clone()).unwrap().eval_exact(&x).unwrap();
        let by_hand = Rational::from(&d * &x) + (1 - d.clone()) * f.eval(&x).unwrap();
        prop_assert_eq!(&direct, &by_hand);
        prop_assert_eq!(mixed, by_hand);
    }

    #[test]
    fn transformed_cdf_is_strongly_increasing(f in fixture(), d in open_rational(), x in unit_rational(), y in unit_rational()) {
        let g = strongly_increasing_transform(&f, &d).unwrap();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let rise = g.eval(&hi).unwrap() - g.eval(&lo).unwrap();
        prop_assert!(rise >= Rational::from(&hi - &lo) * &d);
    }

    #[test]
    fn lipschitz_bound_holds(f in fixture(), x in unit_rational(), y in unit_rational()) {
        let rise = (f.eval(&x).unwrap() - f.eval(&y).unwrap()).abs();
        prop_assert!(rise <= f.lipschitz_bound() * Rational::from(&x - &y).abs());
    }

    #[test]
    fn delta_on_diagonal(f in fixture(), n in 2usize..6, x in unit_rational()) {
        let fx = f.eval(&x).unwrap();
        prop_assert_eq!(delta_win_prob(&f, n, &x, &x).unwrap(), Rational::from((&fx).pow(n as u32 - 1)));
    }

    #[test]
    fn phi_is_n_lipschitz(n in 2usize..8, a in unit_rational(), b in unit_rational(), c in unit_rational(), d in unit_rational()) {
        let diff = (phi(&a, &b, n) - phi(&c, &d, n)).abs();
        let dist = Rational::from(&a - &c).abs().max(Rational::from(&b - &d).abs());
        prop_assert!(diff <= dist * n as u32);
    }

    #[test]
    fn canonical_is_monotone_and_shaded(f in fixture(), n in 2usize..5, x in unit_rational(), y in unit_rational()) {
        let rbf = canonical_bid_function(&f, n).unwrap();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (bl, bh) = (eval_canonical(&rbf, &lo).unwrap(), eval_canonical(&rbf, &hi).unwrap());
        prop_assert!(bl <= bh);
        prop_assert!(bh <= hi && bl >= 0);
    }

    #[test]
    fn riemann_sandwich(f in fixture(), n in 2usize..5, k in 2u32..9, x in unit_rational()) {
        let arc: Arc<dyn Cdf> = Arc::new(f.clone());
        let oracle = CdfOracle::from_cdf(arc, f.lipschitz());
        let eps = Rational::from((1, 1u32 << k));
        let plan = ccfpa_blackbox::precompute::<Rational>(&oracle, n, &eps).unwrap();
        let ev = ccfpa_blackbox::bid(&plan, &oracle, &x).unwrap();
        let exact = eval_canonical(&canonical_bid_function(&f, n).unwrap(), &x).unwrap();
        prop_assert!(ev.lower <= exact && exact <= ev.upper);
        prop_assert!(Rational::from(&ev.upper - &ev.lower) <= eps);
        prop_assert_eq!(oracle.query_count(), plan.k() - 1 + 1);
    }

    #[test]
    fn jump_points_are_ordered(f in fixture(), n in 2usize..5, g in grid(), u in unit_rational()) {
        let u = u * Rational::from((1, 2));
        let delta = Rational::from((1, 1u32 << 24));
        let (s, led) = compute_strategy::<Rational>(&f, f.lipschitz(), n, &g, &u, &delta).unwrap();
        prop_assert_eq!(s.len(), g.m() + 1);
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.iter().all(|x| *x >= 0 && *x <= 1));
        prop_assert!(led.iter().all(|x| *x >= 0));
        for i in 1..=g.m() {
            if s[i - 1] < s[i] {
                prop_assert!(s[i - 1] >= *g.bid(i));
            }
        }
    }
}
