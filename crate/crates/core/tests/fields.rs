use epsflow_core::synth::{band_limited_field, BandLimited};
use epsflow_core::{ghost_even, make_grid, sup_norm, weighted_lp_norm, Parity, ScalarField};
use proptest::prelude::*;

#[test]
fn unit_field_norm_is_exact() {
    for n in [5, 17, 64] {
        let g = make_grid(n, 8, 1.0, 1.0).unwrap();
        let one = ScalarField::from_fn(g, |_, _| 1.0);
        let v = weighted_lp_norm(&one, 2.0).unwrap();
        assert!((v - 0.5_f64.sqrt()).abs() < 1e-14, "{n}: {v}");
    }
}

#[test]
fn radius_integral_converges_at_second_order() {
    let err = |n: usize| {
        let g = make_grid(n + 1, 4, 1.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |r, _| r);
        (weighted_lp_norm(&f, 1.0).unwrap() - 1.0 / 3.0).abs()
    };
    let e = [err(16), err(32), err(64)];
    for w in e.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "{e:?}");
    }
}

#[test]
fn smooth_integrand_converges_at_second_order() {
    // ∬ exp(-r²) r dr dz over [0, 3] x [0, 2) = 1 - exp(-9)
    let exact = 1.0 - (-9.0_f64).exp();
    let err = |n: usize| {
        let g = make_grid(n + 1, 4, 3.0, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |r, _| (-r * r).exp());
        (weighted_lp_norm(&f, 1.0).unwrap() - exact).abs()
    };
    let (a, b) = (err(32), err(64));
    assert!(a / b >= 3.5, "{a} {b}");
}

#[test]
fn sup_norm_examples() {
    let g = make_grid(9, 8, 2.0, 1.0).unwrap();
    assert_eq!(sup_norm(&ScalarField::zeros(g, Parity::Even)), 0.0);
    let mut f = ScalarField::zeros(g, Parity::Even);
    f.values_mut()[[4, 3]] = -3.0;
    assert_eq!(sup_norm(&f), 3.0);
    assert_eq!(sup_norm(&ScalarField::from_fn(g, |r, _| r)), 2.0);
}

#[test]
fn non_finite_input_is_rejected() {
    let g = make_grid(9, 8, 2.0, 1.0).unwrap();
    let mut f = ScalarField::zeros(g, Parity::Even);
    f.values_mut()[[2, 2]] = f64::NAN;
    assert!(weighted_lp_norm(&f, 2.0).is_err());
    assert!(weighted_lp_norm(&ScalarField::zeros(g, Parity::Even), 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_homogeneous(c in -50.0f64..50.0, p in 1.0f64..8.0, seed in 0u64..1000) {
        let g = make_grid(33, 16, 4.0, 4.0).unwrap();
        let f = band_limited_field(g, &BandLimited::for_grid(&g), seed);
        let a = weighted_lp_norm(&f.scaled(c), p).unwrap();
        let b = c.abs() * weighted_lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn centred_axis_derivative_of_even_field_vanishes(seed in 0u64..1000, i in 1isize..16) {
        let g = make_grid(17, 8, 2.0, 1.0).unwrap();
        let f = band_limited_field(g, &BandLimited::for_grid(&g), seed);
        let plus = ghost_even(&f, 1).unwrap();
        let minus = ghost_even(&f, -1).unwrap();
        prop_assert!(plus.iter().zip(minus.iter()).all(|(a, b)| (a - b) / (2.0 * g.hr()) == 0.0));
        prop_assert_eq!(ghost_even(&f, -i).unwrap(), ghost_even(&f, i).unwrap());
        prop_assert!(ghost_even(&f, 17).is_err());
    }

    #[test]
    fn norm_is_monotone_in_pointwise_size(seed in 0u64..1000, p in 1.0f64..6.0) {
        let g = make_grid(17, 16, 4.0, 4.0).unwrap();
        let f = band_limited_field(g, &BandLimited::for_grid(&g), seed);
        let bigger = f.map(|v| 1.5 * v.abs() + 0.1);
        prop_assert!(weighted_lp_norm(&f, p).unwrap() <= weighted_lp_norm(&bigger, p).unwrap());
    }
}
