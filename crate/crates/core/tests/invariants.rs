//! Property tests of the solution family through the public API.

use nsaxi_core::{
    c3_bar, classify, extremal, gamma_minus, gamma_plus, reconstruct, solve_ivp, Extremality,
    Params, Sign, Stratum,
};
use proptest::prelude::*;

fn interior_params() -> impl Strategy<Value = Params> {
    (-1.0f64..4.0, -1.0f64..4.0, 0.05f64..6.0)
        .prop_map(|(c1, c2, d)| Params::new(c1, c2, c3_bar(c1, c2).unwrap() + d))
}

/// Each case solves several curves, so the default case count is reduced
/// unless `PROPTEST_CASES` asks for more.
fn config() -> ProptestConfig {
    let mut c = ProptestConfig::default();
    if std::env::var_os("PROPTEST_CASES").is_none() {
        c.cases = 24;
    }
    c
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gamma_interval_is_nonempty(c in interior_params()) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        prop_assert!(lo < hi, "{lo} {hi}");
    }

    #[test]
    fn residual_within_cap(c in interior_params(), t in 0.02f64..0.98, x in -0.999_999f64..0.999_999) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let curve = solve_ivp(&c, lo + t * (hi - lo)).unwrap();
        let r = curve.residual(x).unwrap().abs();
        prop_assert!(r <= curve.residual_bound().max(1e-14) * 1.5 && r <= 1e-9, "{r:e}");
    }

    #[test]
    fn sandwiched_between_extremals(c in interior_params(), t in 0.02f64..0.98, x in -0.999f64..0.999) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let u = solve_ivp(&c, lo + t * (hi - lo)).unwrap().eval(x).unwrap();
        let up = extremal(&c, Sign::Plus).unwrap().eval(x).unwrap();
        let down = extremal(&c, Sign::Minus).unwrap().eval(x).unwrap();
        prop_assert!(down - 1e-8 <= u && u <= up + 1e-8, "{down} {u} {up}");
    }

    #[test]
    fn ordered_in_gamma(c in interior_params(), a in 0.02f64..0.98, b in 0.02f64..0.98, x in -0.99f64..0.99) {
        prop_assume!((a - b).abs() > 1e-3);
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let (a, b) = (a.min(b), a.max(b));
        let ua = solve_ivp(&c, lo + a * (hi - lo)).unwrap().eval(x).unwrap();
        let ub = solve_ivp(&c, lo + b * (hi - lo)).unwrap().eval(x).unwrap();
        prop_assert!(ua < ub, "{ua} {ub}");
    }

    #[test]
    fn reflection_symmetry(c in interior_params(), t in 0.02f64..0.98, x in -0.99f64..0.99) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let g = lo + t * (hi - lo);
        let u = solve_ivp(&c, g).unwrap().eval(x).unwrap();
        let v = solve_ivp(&c.reflect(), -g).unwrap().eval(-x).unwrap();
        prop_assert!((u + v).abs() < 1e-9, "{u} {v}");
        prop_assert!((gamma_plus(&c).unwrap() + gamma_minus(&c.reflect()).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn extremal_values_classify_as_extremal(c in interior_params(), t in 0.02f64..0.98) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let ext = |g: f64| match classify(&c, g).unwrap().stratum {
            Stratum::Surface(_, e) => Some(e),
            _ => None,
        };
        prop_assert_eq!(ext(hi), Some(Extremality::Upper));
        prop_assert_eq!(ext(lo), Some(Extremality::Lower));
        prop_assert_eq!(ext(lo + t * (hi - lo)), Some(Extremality::Between));
        prop_assert_eq!(classify(&c, hi + 1e-3 * (1.0 + hi.abs())).unwrap().stratum, Stratum::OutsideI);
    }

    #[test]
    fn fields_scale_with_radius(c in interior_params(), t in 0.02f64..0.98, x in -0.99f64..0.99, r in 0.1f64..10.0) {
        let (lo, hi) = (gamma_minus(&c).unwrap(), gamma_plus(&c).unwrap());
        let curve = solve_ivp(&c, lo + t * (hi - lo)).unwrap();
        let one = reconstruct(&curve, 1.0, x).unwrap();
        let at = reconstruct(&curve, r, x).unwrap();
        prop_assert_eq!(at, one.at_radius(r).unwrap());
        prop_assert_eq!(at.u_phi, 0.0);
    }
}

#[test]
fn boundary_is_a_single_curve() {
    for (c1, c2) in [(0.0, 0.0), (2.0, -1.0), (-0.5, 0.7)] {
        let c = Params::new(c1, c2, c3_bar(c1, c2).unwrap());
        let g = gamma_plus(&c).unwrap();
        assert_eq!(g, gamma_minus(&c).unwrap());
        assert_eq!(classify(&c, g).unwrap().stratum, Stratum::Boundary);
        let u = solve_ivp(&c, g).unwrap();
        assert!(u.is_closed_form());
        assert_eq!(classify(&c, g + 1e-6).unwrap().stratum, Stratum::OutsideI);
    }
    let below = Params::new(0.0, 0.0, -4.5);
    assert!(gamma_plus(&below).is_err());
    assert!(solve_ivp(&below, 0.0).is_err());
}
