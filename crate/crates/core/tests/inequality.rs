use epsflow_core::inequality::{
    cutoff_psi, cutoff_psi_prime, hardy_sides, interp_check, lemma3_c1, lemma3_sides,
    CutoffSpec, HardyCase, CUTOFF_SLOPE_MAX, C_DEFAULT,
};
use epsflow_core::synth::{band_limited_field, truncated_gaussian, BandLimited};
use epsflow_core::{make_grid, Parity, ScalarField};
use proptest::prelude::*;

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn zero_function_gives_zero_sides() {
    let r = uniform(0.1, 2.0, 101);
    let case = HardyCase { lambda: 2.0, sigma: 3.0, f: vec![0.0; r.len()], r };
    assert_eq!(hardy_sides(&case).unwrap(), (0.0, 0.0));
}

#[test]
fn indicator_matches_closed_form() {
    // f = 1 on [1, 2]: F = r - 1 there and 1 beyond, so
    // lhs = ∫₁² (r-1)²/r³ + ∫₂^∞ r⁻³ = ln 2 - 1/2, rhs = ∫₁² r⁻¹ = ln 2
    let r = uniform(1.0, 2.0, 20_001);
    let case = HardyCase { lambda: 2.0, sigma: 3.0, f: vec![1.0; r.len()], r };
    let (lhs, rhs) = hardy_sides(&case).unwrap();
    let ln2 = 2.0_f64.ln();
    assert!((lhs - (ln2 - 0.5)).abs() < 1e-8, "{lhs}");
    assert!((rhs - ln2).abs() < 1e-8, "{rhs}");
    assert!(lhs <= rhs);
}

/// Closed-form sides for `f = r^{γ-1}` on `[a, 1]`, `λ = 2`, `γ = (σ-1)/2`.
fn power_family(a: f64, sigma: f64) -> (f64, f64) {
    let g = (sigma - 1.0) / 2.0;
    let ag = a.powf(g);
    let log = -a.ln();
    let inner = log - 2.0 * ag * (1.0 / ag - 1.0) / g + ag * ag * (1.0 / (ag * ag) - 1.0) / (2.0 * g);
    let tail = (1.0 - ag).powi(2) / (2.0 * g);
    ((inner + tail) / (g * g), log / (g * g))
}

#[test]
fn near_sharp_power_family_matches_closed_form() {
    for sigma in [2.0, 3.0, 5.0] {
        let mut prev = 0.0;
        for a in [1e-1_f64, 1e-2, 1e-3, 1e-4] {
            let n = 200_001;
            let r: Vec<f64> = (0..n).map(|k| a * (1.0 / a).powf(k as f64 / (n - 1) as f64)).collect();
            let beta = (sigma - 1.0) / 2.0 - 1.0;
            let f = r.iter().map(|x| x.powf(beta)).collect();
            let (lhs, rhs) = hardy_sides(&HardyCase { lambda: 2.0, sigma, r, f }).unwrap();
            let (l0, r0) = power_family(a, sigma);
            assert!((lhs - l0).abs() <= 1e-6 * l0, "σ {sigma} a {a}: {lhs} vs {l0}");
            assert!((rhs - r0).abs() <= 1e-6 * r0, "σ {sigma} a {a}: {rhs} vs {r0}");
            let ratio = l0 / r0;
            assert!(ratio < 1.0 && ratio > prev, "σ {sigma} a {a}: {ratio}");
            prev = ratio;
        }
    }
}

#[test]
fn bad_cases_are_rejected() {
    let r = uniform(0.1, 1.0, 11);
    let ok = HardyCase { lambda: 2.0, sigma: 3.0, f: vec![1.0; 11], r };
    assert!(hardy_sides(&HardyCase { lambda: 1.0, ..ok.clone() }).is_err());
    assert!(hardy_sides(&HardyCase { sigma: 1.0, ..ok.clone() }).is_err());
    let mut neg = ok.clone();
    neg.f[4] = -1e-3;
    assert!(hardy_sides(&neg).is_err());
}

#[test]
fn cutoff_reference_values() {
    assert_eq!(cutoff_psi(0.5, 1.0), 1.0);
    assert_eq!(cutoff_psi(3.0, 1.0), 0.0);
    assert!((cutoff_psi(1.5, 1.0) - 0.5).abs() < 1e-15);
    let n = 1_000_000;
    let h = 2.0 / n as f64;
    let slope = (0..n)
        .map(|k| {
            let r = k as f64 * h;
            ((cutoff_psi(r + h, 1.0) - cutoff_psi(r, 1.0)) / h).abs()
        })
        .fold(0.0_f64, f64::max);
    assert!((slope - 1.875).abs() < 1e-6, "{slope}");
    assert_eq!(CUTOFF_SLOPE_MAX, 1.875);
    assert!(CutoffSpec::new(0.0).is_err());
}

fn capped_swirl(n: usize, r_max: f64, eps: f64, gamma0: f64) -> ScalarField {
    let g = make_grid(n, 8, r_max, 1.0).unwrap();
    let cap = 2.0 * g.hr();
    ScalarField::from_fn(g, move |r, z| {
        gamma0 * r.max(cap).powf(-2.0 / eps) * (0.75 + 0.25 * (2.0 * std::f64::consts::PI * z).cos())
    })
}

#[test]
fn weighted_inequality_holds_for_capped_swirl() {
    let eps_prime = 20.0 / 19.0;
    for eps in [1.2, 1.5, 1.9] {
        let u1 = capped_swirl(1001, 2.5, eps, 1.0);
        let g = *u1.grid();
        for r1 in [0.1, 0.5, 1.0] {
            let f: Vec<f64> = (0..g.nr()).map(|i| cutoff_psi(g.r(i), r1)).collect();
            let s = lemma3_sides(&u1, &f, eps, eps_prime, r1, 1.0, C_DEFAULT).unwrap();
            assert!(s.lhs > 0.0 && s.lhs <= s.rhs, "ε {eps} r1 {r1}: {} > {}", s.lhs, s.rhs);
        }
    }
}

#[test]
fn weighted_inequality_trivial_cases() {
    let eps = 1.5;
    let eps_prime = 20.0 / 19.0;
    let u1 = capped_swirl(201, 2.5, eps, 1.0);
    let g = *u1.grid();
    let zero = vec![0.0; g.nr()];
    let s = lemma3_sides(&u1, &zero, eps, eps_prime, 0.5, 1.0, C_DEFAULT).unwrap();
    assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
    let f: Vec<f64> = (0..g.nr()).map(|i| cutoff_psi(g.r(i), 0.5)).collect();
    let s = lemma3_sides(&ScalarField::zeros(g, Parity::Even), &f, eps, eps_prime, 0.5, 1.0, C_DEFAULT)
        .unwrap();
    assert_eq!(s.lhs, 0.0);
    assert!(s.rhs > 0.0);
    // circulation bound and exponent order are enforced
    assert!(lemma3_sides(&u1, &f, eps, eps_prime, 0.5, 0.5, C_DEFAULT).is_err());
    assert!(lemma3_sides(&u1, &f, eps, 1.6, 0.5, 1.0, C_DEFAULT).is_err());
}

#[test]
fn interpolation_ratios_are_dilation_invariant() {
    let bump = |r: f64, z: f64, scale: f64, zc: f64| {
        truncated_gaussian((r / scale).powi(2) + ((z - zc) / scale).powi(2), 0.3)
    };
    let small = make_grid(129, 128, 4.0, 4.0).unwrap();
    let large = make_grid(257, 256, 8.0, 8.0).unwrap();
    let a = interp_check(&ScalarField::from_fn(small, |r, z| bump(r, z, 1.0, 2.0))).unwrap();
    let b = interp_check(&ScalarField::from_fn(large, |r, z| bump(r, z, 2.0, 4.0))).unwrap();
    assert!(a.gradient > 0.0 && a.sup > 0.0);
    assert!((a.gradient / b.gradient - 1.0).abs() < 0.02, "{a:?} {b:?}");
    assert!((a.sup / b.sup - 1.0).abs() < 0.02, "{a:?} {b:?}");
    assert!(interp_check(&ScalarField::zeros(small, Parity::Even)).is_err());
}

#[test]
fn interpolation_ratios_are_stable_under_refinement() {
    let worst = |n: usize| {
        let g = make_grid(n + 1, n, 4.0, 4.0).unwrap();
        let spec = BandLimited::for_grid(&g);
        (0..20).fold([0.0_f64; 2], |m, seed| {
            let r = interp_check(&band_limited_field(g, &spec, seed)).unwrap();
            [m[0].max(r.gradient), m[1].max(r.sup)]
        })
    };
    let (a, b) = (worst(64), worst(128));
    for k in 0..2 {
        assert!(a[k].is_finite() && (b[k] / a[k] - 1.0).abs() < 0.1, "{a:?} {b:?}");
    }
}

fn bump_profile(r: &[f64], centres: &[(f64, f64, f64)], plateau: bool) -> Vec<f64> {
    r.iter()
        .map(|&x| {
            centres
                .iter()
                .map(|&(c, w, h)| {
                    let d = ((x - c) / w).abs();
                    if d >= 1.0 {
                        0.0
                    } else if plateau {
                        h * (1.0 - d.powi(4))
                    } else {
                        h * (std::f64::consts::FRAC_PI_2 * d).cos().powi(2)
                    }
                })
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hardy_holds_for_random_profiles(
        lambda in 1.05f64..4.0,
        sigma in prop_oneof![-2.0f64..0.95, 1.05f64..5.0],
        centres in prop::collection::vec((0.3f64..2.7, 0.05f64..0.5, 0.0f64..3.0), 1..4),
        plateau in any::<bool>(),
    ) {
        let r = uniform(0.05, 3.5, 4001);
        let f = bump_profile(&r, &centres, plateau);
        let (lhs, rhs) = hardy_sides(&HardyCase { lambda, sigma, r, f }).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-6), "{} > {}", lhs, rhs);
    }

    #[test]
    fn cutoff_shape(r in 0.0f64..10.0, dr in 0.0f64..1.0, r1 in 0.01f64..5.0) {
        let v = cutoff_psi(r, r1);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(cutoff_psi(r + dr, r1) <= v);
        if r <= r1 { prop_assert_eq!(v, 1.0); }
        if r >= 2.0 * r1 { prop_assert_eq!(v, 0.0); }
        prop_assert!(cutoff_psi_prime(r, r1).abs() * r1 <= 2.0);
        prop_assert!((cutoff_psi(r * r1, r1) - cutoff_psi(r, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn c1_grows_with_radius_and_vanishes_at_the_axis(
        eps in 1.1f64..1.99,
        t in 0.0f64..1.0,
        gamma0 in 0.1f64..10.0,
        r1 in 1e-3f64..3.0,
        grow in 1.01f64..4.0,
    ) {
        let eps_prime = 1.0 + 1e-3 + t * (eps - 1.05 - 1e-3);
        let c = |r: f64| lemma3_c1(eps, eps_prime, r, gamma0, C_DEFAULT).unwrap();
        let k = eps / (eps - eps_prime);
        let expo = 2.0 - 2.0 * eps_prime / eps;
        let want = C_DEFAULT * gamma0.powf(eps_prime) * r1.powf(expo) * k * k;
        prop_assert!((c(r1) - want).abs() <= 1e-12 * want);
        prop_assert!(c(r1 * grow) > c(r1));
        prop_assert!(c(1e-300) <= c(1.0) * 1e-300_f64.powf(expo) * (1.0 + 1e-9));
        prop_assert!(c(1e-300) < 1e-10 * c(1.0));
    }

    #[test]
    fn interpolation_ratios_ignore_amplitude(c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0], seed in 0u64..500) {
        let g = make_grid(33, 32, 4.0, 4.0).unwrap();
        let f = band_limited_field(g, &BandLimited::for_grid(&g), seed);
        let a = interp_check(&f).unwrap();
        let b = interp_check(&f.scaled(c)).unwrap();
        prop_assert!((a.gradient - b.gradient).abs() <= 1e-12 * a.gradient);
        prop_assert!((a.sup - b.sup).abs() <= 1e-12 * a.sup);
    }
}
