mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::{manufactured, max_abs_diff, radial_operator, wall_profile, z_eigenvalue};
use epsflow_core::synth::{band_limited_field, BandLimited};
use epsflow_core::{
    apply_l, biot_savart, divergence, evolve, grad, make_grid, rhs, sup_norm, EvolveOptions,
    Exec, GridSpec, ModelParams, Parity, ScalarField, Solver, StepControl, Velocity,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// `ω(0) = g(r) cos(2πz/Lz)` with `u1 = 0`, `ε = 0`: a linear diffusion problem
/// whose exact discrete solution is `exp(ν t (A_r + λ_z)) g`.
fn diffusion_setup(nu: f64) -> (GridSpec, Solver, DMatrix<f64>, DVector<f64>) {
    let g = make_grid(9, 8, 2.0, 2.0).unwrap();
    let solver = Solver::new(g, ModelParams::new(0.0, nu).unwrap()).unwrap();
    let m = g.nr() - 1;
    let op = (radial_operator(&g) + DMatrix::identity(m, m) * z_eigenvalue(&g, 1)) * nu;
    let g0 = DVector::from_fn(m, |i, _| wall_profile(g.r(i), g.r_max()).0);
    (g, solver, op, g0)
}

fn diffusion_state(g: GridSpec, solver: &Solver) -> epsflow_core::State {
    let k = 2.0 * PI / g.lz();
    let w = ScalarField::from_fn(g, |r, z| wall_profile(r, g.r_max()).0 * (k * z).cos());
    solver.state(ScalarField::zeros(g, Parity::Even), w, 0.0).unwrap()
}

/// Radial profile of `ω` on non-wall rows, read at `z = 0`.
fn radial_part(s: &epsflow_core::State) -> DVector<f64> {
    let m = s.grid().nr() - 1;
    DVector::from_fn(m, |i, _| s.omega1.get(i, 0))
}

#[test]
fn one_step_is_the_fourth_order_taylor_polynomial() {
    let (g, solver, op, g0) = diffusion_setup(0.5);
    let s0 = diffusion_state(g, &solver);
    let dt = 0.004;
    let s1 = solver.step(&s0, dt).unwrap();
    let m = op.nrows();
    let a = &op * dt;
    let a2 = &a * &a;
    let a3 = &a2 * &a;
    let a4 = &a3 * &a;
    let poly = DMatrix::identity(m, m) + &a + a2 / 2.0 + a3 / 6.0 + a4 / 24.0;
    let want = poly * &g0;
    let got = radial_part(&s1);
    assert!((got - &want).amax() < 1e-13 * want.amax());
    // the mode keeps its z shape
    let k = 2.0 * PI / g.lz();
    for i in 0..m {
        for j in 0..g.nz() {
            assert!((s1.omega1.get(i, j) - want[i] * (k * g.z(j)).cos()).abs() < 1e-13);
        }
    }
    assert_eq!(sup_norm(&s1.u1), 0.0);
    assert_eq!(s1.t, dt);
}

#[test]
fn mode_decay_matches_matrix_exponential_at_fourth_order() {
    let (g, solver, op, g0) = diffusion_setup(0.5);
    let t_final = 0.2;
    let exact = (&op * t_final).exp() * &g0;
    let err = |steps: usize| {
        let mut s = diffusion_state(g, &solver);
        let dt = t_final / steps as f64;
        for n in 1..=steps {
            s = solver.step_to(&s, n as f64 * dt).unwrap();
        }
        (radial_part(&s) - &exact).amax()
    };
    let (e1, e2) = (err(20), err(40));
    let ratio = e1 / e2;
    assert!((13.0..19.0).contains(&ratio), "{e1} {e2} {ratio}");
}

#[test]
fn nonlinear_run_converges_at_fourth_order_in_time() {
    let g = make_grid(17, 16, 4.0, 4.0).unwrap();
    let solver = Solver::new(g, ModelParams::new(1.0, 0.05).unwrap()).unwrap();
    let spec = BandLimited::for_grid(&g);
    let s0 = solver
        .state(band_limited_field(g, &spec, 3), band_limited_field(g, &spec, 4), 0.0)
        .unwrap();
    let run = |steps: usize| {
        let mut s = s0.clone();
        let dt = 0.2 / steps as f64;
        for n in 1..=steps {
            s = solver.step_to(&s, n as f64 * dt).unwrap();
        }
        s
    };
    let reference = run(160);
    let diff = |s: &epsflow_core::State| {
        max_abs_diff(s.u1.values().iter().copied().zip(reference.u1.values().iter().copied()))
            .max(max_abs_diff(
                s.omega1.values().iter().copied().zip(reference.omega1.values().iter().copied()),
            ))
    };
    let ratio = diff(&run(20)) / diff(&run(40));
    assert!((12.0..20.0).contains(&ratio), "{ratio}");
}

#[test]
fn inviscid_eps_zero_keeps_only_source_terms() {
    let g = make_grid(17, 16, 4.0, 4.0).unwrap();
    let params = ModelParams::new(0.0, 0.0).unwrap();
    let solver = Solver::new(g, params).unwrap();
    let spec = BandLimited::for_grid(&g);
    let s = solver
        .state(band_limited_field(g, &spec, 1), band_limited_field(g, &spec, 2), 0.0)
        .unwrap();
    let (du, dw) = rhs(&s, &params).unwrap();
    let (_, phi_z) = grad(&s.phi1).unwrap();
    let sq = s.u1.map(|v| v * v);
    let (_, sq_z) = grad(&sq).unwrap();
    for i in 0..g.nr() - 1 {
        for j in 0..g.nz() {
            assert_relative_eq!(du.get(i, j), 2.0 * s.u1.get(i, j) * phi_z.get(i, j), epsilon = 1e-13);
            assert_relative_eq!(dw.get(i, j), sq_z.get(i, j), epsilon = 1e-13);
        }
    }
}

#[test]
fn pure_diffusion_of_swirl_matches_hand_laplacian() {
    let err = |n: usize| {
        let g = make_grid(n + 1, n, 1.0, 1.0).unwrap();
        let params = ModelParams::new(0.0, 1.0).unwrap();
        let solver = Solver::new(g, params).unwrap();
        let (phi, l_phi) = manufactured(1.0, 1.0);
        let u = ScalarField::from_fn(g, &phi);
        let s = solver.state(u.clone(), ScalarField::zeros(g, Parity::Even), 0.0).unwrap();
        let (du, _) = rhs(&s, &params).unwrap();
        let lu = apply_l(&u).unwrap();
        let mut e = 0.0_f64;
        for i in 0..g.nr() - 1 {
            for j in 0..g.nz() {
                assert!((du.get(i, j) - lu.get(i, j)).abs() < 1e-9);
                e = e.max((du.get(i, j) - l_phi(g.r(i), g.z(j))).abs());
            }
        }
        e
    };
    let (a, b) = (err(32), err(64));
    assert!(a / b >= 3.5, "{a} {b}");
}

#[test]
fn velocity_of_manufactured_stream_function_converges() {
    let eps = 1.3;
    let err = |n: usize| {
        let g = make_grid(n + 1, n, 1.0, 1.0).unwrap();
        let (phi, _) = manufactured(1.0, 1.0);
        let v = biot_savart(&ScalarField::from_fn(g, &phi), eps).unwrap();
        let k = 2.0 * PI;
        let mut e = 0.0_f64;
        for i in 0..g.nr() {
            let r = g.r(i);
            let (p, p1, _) = wall_profile(r, 1.0);
            for j in 0..g.nz() {
                let z = g.z(j);
                let ur = eps * r * p * k * (k * z).sin();
                let uz = eps * (2.0 * p + r * p1) * (k * z).cos();
                e = e.max((v.ur.get(i, j) - ur).abs()).max((v.uz.get(i, j) - uz).abs());
            }
        }
        e
    };
    let (a, b) = (err(32), err(64));
    assert!(a / b >= 3.5, "{a} {b}");
}

#[test]
fn constant_stream_function_gives_uniform_axial_flow() {
    let g = make_grid(9, 8, 1.0, 1.0).unwrap();
    let v = biot_savart(&ScalarField::from_fn(g, |_, _| 0.75), 1.2).unwrap();
    assert_eq!(sup_norm(&v.ur), 0.0);
    assert!(v.uz.values().iter().all(|&u| (u - 2.0 * 1.2 * 0.75).abs() < 1e-15));
    assert_eq!(sup_norm(&divergence(&v).unwrap()), 0.0);
}

#[test]
fn linear_radial_flow_has_divergence_two() {
    let g = make_grid(17, 8, 2.0, 1.0).unwrap();
    let v = Velocity {
        ur: ScalarField::from_fn_with_parity(g, Parity::Odd, |r, _| r),
        uz: ScalarField::zeros(g, Parity::Even),
    };
    let d = divergence(&v).unwrap();
    assert!(d.values().iter().all(|&x| (x - 2.0).abs() < 1e-12));
}

#[test]
fn divergence_converges_at_second_order() {
    let div = |n: usize| {
        let g = make_grid(n + 1, n, 4.0, 4.0).unwrap();
        let phi = ScalarField::from_fn(g, |r, z| {
            (-(r * r) - (z - 2.0).powi(2)).exp() * (1.0 + 0.3 * (PI * z / 2.0).cos())
        });
        sup_norm(&divergence(&biot_savart(&phi, 1.0).unwrap()).unwrap())
    };
    let d = [div(32), div(64), div(128)];
    for w in d.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "{d:?}");
    }
}

fn small_solver(eps: f64, nu: f64, exec: Exec) -> (Solver, epsflow_core::State) {
    let g = make_grid(33, 32, 4.0, 4.0).unwrap();
    let solver = Solver::with_exec(g, ModelParams::new(eps, nu).unwrap(), exec).unwrap();
    let spec = BandLimited {
        amplitude: 3.0,
        ..BandLimited::for_grid(&g)
    };
    let s = solver
        .state(band_limited_field(g, &spec, 11), band_limited_field(g, &spec, 12), 0.0)
        .unwrap();
    (solver, s)
}

#[test]
fn short_horizon_takes_one_clipped_step() {
    let (solver, s0) = small_solver(1.0, 0.1, Exec::Sequential);
    let opts = EvolveOptions::default();
    let dt = solver.cfl_dt(&s0, &opts.ctl);
    let t_final = 0.5 * dt;
    let out = evolve(&solver, s0, t_final, &opts, |_, _| {}).unwrap();
    assert_eq!(out.steps, 1);
    assert_eq!(out.state.t, t_final);
}

#[test]
fn zero_data_stay_zero() {
    let g = make_grid(17, 16, 4.0, 4.0).unwrap();
    let solver = Solver::new(g, ModelParams::new(1.5, 0.1).unwrap()).unwrap();
    let out = evolve(&solver, solver.zero_state(), 0.3, &EvolveOptions::default(), |_, _| {})
        .unwrap();
    assert_eq!(sup_norm(&out.state.u1), 0.0);
    assert_eq!(sup_norm(&out.state.omega1), 0.0);
    assert_eq!(out.state.t, 0.3);
}

#[test]
fn replay_and_parallel_runs_are_bit_identical() {
    let opts = EvolveOptions {
        ctl: StepControl::default(),
        stride: 3,
        landings: vec![0.05],
    };
    let (solver, s0) = small_solver(1.5, 0.05, Exec::Sequential);
    let a = evolve(&solver, s0.clone(), 0.1, &opts, |_, _| {}).unwrap();
    let b = evolve(&solver, s0.clone(), 0.1, &opts, |_, _| {}).unwrap();
    assert_eq!(a.state, b.state);
    let (par, _) = small_solver(1.5, 0.05, Exec::Parallel);
    let c = evolve(&par, s0, 0.1, &opts, |_, _| {}).unwrap();
    assert_eq!(a.state, c.state);
    assert_eq!(a.steps, c.steps);
}

#[test]
fn observer_sees_landings_and_stride() {
    let (solver, s0) = small_solver(1.0, 0.1, Exec::Sequential);
    let opts = EvolveOptions {
        ctl: StepControl::default(),
        stride: 4,
        landings: vec![0.02, 0.03],
    };
    let mut seen = Vec::new();
    let out = evolve(&solver, s0, 0.05, &opts, |s, info| seen.push((s.t, info))).unwrap();
    assert_eq!(seen[0].1.step, 0);
    for t in [0.02, 0.03, 0.05] {
        assert!(seen.iter().any(|(st, info)| *st == t && info.landing));
    }
    assert!(seen.last().unwrap().1.is_final);
    assert!(seen
        .iter()
        .all(|(_, info)| info.landing || info.step % 4 == 0));
    assert_eq!(out.state.t, 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn velocity_is_linear_in_eps(eps in 0.0f64..1.999, eps2 in 0.01f64..1.999, seed in 0u64..500) {
        let g = make_grid(17, 16, 4.0, 4.0).unwrap();
        let phi = band_limited_field(g, &BandLimited::for_grid(&g), seed);
        let a = biot_savart(&phi, eps).unwrap();
        let b = biot_savart(&phi, eps2).unwrap();
        let c = eps / eps2;
        for (f, h) in [(&a.ur, &b.ur), (&a.uz, &b.uz)] {
            let scale = sup_norm(f).max(1e-300);
            let d = max_abs_diff(f.values().iter().copied().zip(h.values().iter().map(|v| c * v)));
            prop_assert!(d <= 1e-13 * scale.max(c * sup_norm(h)));
        }
        prop_assert!(a.ur.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eps_outside_range_is_rejected(eps in prop_oneof![-5.0f64..-1e-9, 2.0f64..10.0]) {
        let g = make_grid(9, 8, 1.0, 1.0).unwrap();
        prop_assert!(biot_savart(&ScalarField::zeros(g, Parity::Even), eps).is_err());
    }
}
