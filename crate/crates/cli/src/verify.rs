//! Property suites behind `epsflow verify`.
//!
//! Each suite yields [`VerifyRow`]s; a row with `asserted = false` is reported
//! but never fails the suite.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use epsflow_core::diagnostics::{
    energy, energy_identity_residual, gamma_evolution_residual, gamma_field, scaling_transform,
    support_escape, DiagnosticsRecord, EPS_PRIME,
};
use epsflow_core::elliptic::consistency_residual;
use epsflow_core::inequality::{
    cutoff_psi, hardy_sides, lemma3_c1, lemma3_sides, HardyCase, C_DEFAULT,
};
use epsflow_core::synth::{band_limited_field, BandLimited};
use epsflow_core::{
    divergence, evolve, make_grid, sup_norm, weighted_lp_norm, EllipticWorkspace,
    EvolveOptions, GridSpec, ModelParams, Parity, ScalarField, Solver, State, StepControl,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::IcSpec;
use crate::ic::make_ic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hardy,
    Lemma3,
    Elliptic,
    Scaling,
    Energy,
    MaxPrinciple,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = [
        "hardy",
        "lemma3",
        "elliptic",
        "scaling",
        "energy",
        "maxprinciple",
        "all",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hardy => "hardy",
            Suite::Lemma3 => "lemma3",
            Suite::Elliptic => "elliptic",
            Suite::Scaling => "scaling",
            Suite::Energy => "energy",
            Suite::MaxPrinciple => "maxprinciple",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "hardy" => Suite::Hardy,
            "lemma3" => Suite::Lemma3,
            "elliptic" => Suite::Elliptic,
            "scaling" => Suite::Scaling,
            "energy" => Suite::Energy,
            "maxprinciple" => Suite::MaxPrinciple,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite `{other}` (expected one of {})",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub suite: &'static str,
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub asserted: bool,
}

impl VerifyRow {
    pub const COLUMNS: [&'static str; 7] =
        ["suite", "case", "lhs", "rhs", "margin", "asserted", "pass"];

    fn new(suite: &'static str, case: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            suite,
            case: case.into(),
            lhs,
            rhs,
            asserted: true,
        }
    }

    fn informational(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn pass(&self) -> bool {
        self.lhs <= self.rhs
    }

    pub fn violated(&self) -> bool {
        self.asserted && !self.pass()
    }
}

/// Writes the report as CSV.
pub fn write_report(rows: &[VerifyRow], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VerifyRow::COLUMNS)?;
    for r in rows {
        w.write_record([
            r.suite.to_string(),
            r.case.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin().to_string(),
            r.asserted.to_string(),
            r.pass().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parameter overrides for the maximum-principle suite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyOptions {
    pub eps: Option<Vec<f64>>,
    pub nu: Option<Vec<f64>>,
}

impl VerifyOptions {
    pub fn validate(&self) -> Result<(), String> {
        for &e in self.eps.iter().flatten() {
            if !(e > 0.0 && e < 2.0) {
                return Err(format!("--eps values must lie in (0, 2) (got {e})"));
            }
        }
        for &n in self.nu.iter().flatten() {
            if !(n.is_finite() && n >= 0.0) {
                return Err(format!("--nu values must be non-negative (got {n})"));
            }
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<VerifyRow> {
    match suite {
        Suite::Hardy => hardy_suite(HARDY_SEED, HARDY_CASES),
        Suite::Lemma3 => lemma3_suite(),
        Suite::Elliptic => elliptic_suite(),
        Suite::Scaling => scaling_suite(),
        Suite::Energy => energy_suite(),
        Suite::MaxPrinciple => {
            let eps = opts.eps.clone().unwrap_or_else(|| vec![1.0, 1.5, 1.9]);
            let nu = opts.nu.clone().unwrap_or_else(|| vec![0.05, 0.5]);
            maxprinciple_suite(&eps, &nu, 65)
        }
        Suite::All => [
            Suite::Hardy,
            Suite::Lemma3,
            Suite::Elliptic,
            Suite::Scaling,
            Suite::Energy,
            Suite::MaxPrinciple,
        ]
        .into_iter()
        .flat_map(|s| run_suite(s, opts))
        .collect(),
    }
}

// ---------------------------------------------------------------- Hardy

pub const HARDY_SEED: u64 = 20_190_601;
pub const HARDY_CASES: usize = 100;
/// relative quadrature slack on the right-hand side
pub const HARDY_TOLERANCE: f64 = 1e-6;

/// Random admissible case: `λ ∈ (1.1, 4)`, `σ` on either side of 1, and `f` a
/// sum of nonnegative smooth bumps and plateaus on `[a, b] ⊂ (0, ∞)`.
pub fn random_hardy_case(rng: &mut impl Rng) -> HardyCase {
    let lambda = rng.gen_range(1.1..4.0);
    let sigma = if rng.gen_bool(0.5) {
        rng.gen_range(1.2..4.0)
    } else {
        rng.gen_range(-2.0..0.8)
    };
    let a = rng.gen_range(0.05..1.0);
    let b = a + rng.gen_range(0.5..3.0);
    let n = 4001;
    let r: Vec<f64> = (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect();
    let bumps: Vec<(f64, f64, f64, bool)> = (0..rng.gen_range(1..4))
        .map(|_| {
            let c = rng.gen_range(a..b);
            let w = rng.gen_range(0.05..0.5) * (b - a);
            (c, w, rng.gen_range(0.1..2.0), rng.gen_bool(0.3))
        })
        .collect();
    let f = r
        .iter()
        .map(|&x| {
            bumps
                .iter()
                .map(|&(c, w, amp, plateau)| {
                    let d = (x - c).abs() / w;
                    if d >= 1.0 {
                        0.0
                    } else if plateau {
                        amp
                    } else {
                        amp * (0.5 * PI * d).cos().powi(2)
                    }
                })
                .sum()
        })
        .collect();
    HardyCase {
        lambda,
        sigma,
        r,
        f,
    }
}

pub fn hardy_ensemble(seed: u64, n: usize) -> Vec<HardyCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_hardy_case(&mut rng)).collect()
}

pub fn hardy_suite(seed: u64, n: usize) -> Vec<VerifyRow> {
    hardy_ensemble(seed, n)
        .iter()
        .enumerate()
        .map(|(k, case)| {
            let name = format!(
                "case {k}: lambda={:.4} sigma={:.4} support=[{:.3},{:.3}]",
                case.lambda,
                case.sigma,
                case.r[0],
                case.r[case.r.len() - 1]
            );
            match hardy_sides(case) {
                Ok((lhs, rhs)) => VerifyRow::new("hardy", name, lhs, rhs * (1.0 + HARDY_TOLERANCE)),
                Err(e) => VerifyRow::new("hardy", format!("{name}: {e}"), f64::INFINITY, 0.0),
            }
        })
        .collect()
}

// ---------------------------------------------------------------- weighted circulation inequality

pub const LEMMA3_EPS: [f64; 3] = [1.2, 1.5, 1.9];
pub const LEMMA3_R1: [f64; 3] = [0.1, 0.5, 1.0];

/// `‖Γ0‖∞ r^{-2/ε}` with `r` floored at `r_cap`, times an axial profile in
/// `[0, 1]`; it saturates the circulation bound for `r >= r_cap`.
pub fn capped_circulation_field(grid: GridSpec, eps: f64, gamma0: f64, r_cap: f64) -> ScalarField {
    let lz = grid.lz();
    ScalarField::from_fn(grid, move |r, z| {
        let profile = 0.5 * (1.0 + (2.0 * PI * z / lz).cos());
        gamma0 * r.max(r_cap).powf(-2.0 / eps) * profile
    })
}

/// Closed form `C ‖Γ0‖^{ε′} r1^{2-2ε′/ε} (ε/(ε-ε′))²`, written out
/// independently of [`lemma3_c1`].
pub fn c1_closed_form(eps: f64, eps_prime: f64, r1: f64, gamma0: f64, c: f64) -> f64 {
    let ratio = eps / (eps - eps_prime);
    c * gamma0.powf(eps_prime) * (r1.ln() * (2.0 - 2.0 * eps_prime / eps)).exp() * ratio.powi(2)
}

pub fn lemma3_suite() -> Vec<VerifyRow> {
    let grid = make_grid(2001, 16, 2.5, 1.0).expect("fixed grid");
    let gamma0 = 1.0;
    let mut rows = Vec::new();
    for &eps in &LEMMA3_EPS {
        let u1 = capped_circulation_field(grid, eps, gamma0, 2.0 * grid.hr());
        for &r1 in &LEMMA3_R1 {
            for scale in [0.5, 1.0, 2.0] {
                let s = scale * r1;
                let f: Vec<f64> = (0..grid.nr()).map(|i| cutoff_psi(grid.r(i), s)).collect();
                let name = format!("eps={eps} eps'={EPS_PRIME:.6} r1={r1} f=psi(r/{s})");
                match lemma3_sides(&u1, &f, eps, EPS_PRIME, r1, gamma0, C_DEFAULT) {
                    Ok(sides) => rows.push(VerifyRow::new("lemma3", name, sides.lhs, sides.rhs)),
                    Err(e) => rows.push(VerifyRow::new(
                        "lemma3",
                        format!("{name}: {e}"),
                        f64::INFINITY,
                        0.0,
                    )),
                }
            }
        }
        // closed form, monotonicity in r1 and the r1 -> 0 limit
        let c1 = |r1: f64| lemma3_c1(eps, EPS_PRIME, r1, gamma0, C_DEFAULT).unwrap_or(f64::NAN);
        for &r1 in &LEMMA3_R1 {
            let exact = c1_closed_form(eps, EPS_PRIME, r1, gamma0, C_DEFAULT);
            rows.push(VerifyRow::new(
                "lemma3",
                format!("C1 closed form eps={eps} r1={r1}"),
                (c1(r1) - exact).abs(),
                1e-14 * exact,
            ));
        }
        let radii: Vec<f64> = (0..=16).map(|k| 10f64.powi(-k)).collect();
        let increasing = radii.windows(2).all(|w| c1(w[1]) < c1(w[0]));
        rows.push(VerifyRow::new(
            "lemma3",
            format!("C1 increasing in r1 eps={eps}"),
            if increasing { 0.0 } else { 1.0 },
            0.0,
        ));
        rows.push(VerifyRow::new(
            "lemma3",
            format!("C1(1e-16)/C1(1) -> 0 eps={eps}"),
            c1(1e-16) / c1(1.0),
            1e-3,
        ));
    }
    rows
}

// ---------------------------------------------------------------- elliptic

/// `φ★ = (1 - r²/R²)² cos(2πz/Lz)`
pub fn manufactured_phi(grid: &GridSpec) -> ScalarField {
    let (rr, k) = (grid.r_max(), 2.0 * PI / grid.lz());
    ScalarField::from_fn(*grid, move |r, z| {
        let s = 1.0 - r * r / (rr * rr);
        s * s * (k * z).cos()
    })
}

/// `-L φ★`, with `L = ∂r² + (3/r)∂r + ∂z²`.
pub fn manufactured_omega(grid: &GridSpec) -> ScalarField {
    let (rr, k) = (grid.r_max(), 2.0 * PI / grid.lz());
    ScalarField::from_fn(*grid, move |r, z| {
        let s = 1.0 - r * r / (rr * rr);
        let lphi = -16.0 / (rr * rr) + 24.0 * r * r / rr.powi(4) - k * k * s * s;
        -lphi * (k * z).cos()
    })
}

/// Max-norm error of the elliptic solve on the manufactured pair, grid
/// `nr x (nr - 1)` on `[0, 4] x [0, 4)`.
pub fn manufactured_error(nr: usize) -> f64 {
    let grid = make_grid(nr, nr - 1, 4.0, 4.0).expect("valid grid");
    let ws = EllipticWorkspace::new(grid).expect("valid grid");
    let phi = ws.solve(&manufactured_omega(&grid)).expect("solvable");
    let exact = manufactured_phi(&grid);
    let diff = phi.zip_with(&exact, Parity::Even, |a, b| a - b).expect("same grid");
    sup_norm(&diff)
}

/// `‖div u‖∞ / ‖u‖∞` for the velocity of the exact `φ★` at `ε = 1`.
pub fn manufactured_divergence(nr: usize) -> f64 {
    let grid = make_grid(nr, nr - 1, 4.0, 4.0).expect("valid grid");
    let v = epsflow_core::biot_savart(&manufactured_phi(&grid), 1.0).expect("even field");
    sup_norm(&divergence(&v).expect("consistent parity")) / v.sup()
}

pub fn elliptic_suite() -> Vec<VerifyRow> {
    let mut rows = Vec::new();
    let sizes = [33, 65, 129];
    let errs: Vec<f64> = sizes.iter().map(|&n| manufactured_error(n)).collect();
    for k in 1..sizes.len() {
        rows.push(VerifyRow::new(
            "elliptic",
            format!(
                "manufactured error ratio {}->{} ({:.3e} -> {:.3e}) >= 3.5",
                sizes[k - 1],
                sizes[k],
                errs[k - 1],
                errs[k]
            ),
            3.5,
            errs[k - 1] / errs[k],
        ));
    }
    let divs: Vec<f64> = sizes.iter().map(|&n| manufactured_divergence(n)).collect();
    for k in 1..sizes.len() {
        rows.push(VerifyRow::new(
            "elliptic",
            format!(
                "divergence ratio {}->{} ({:.3e} -> {:.3e}) >= 3.5",
                sizes[k - 1],
                sizes[k],
                divs[k - 1],
                divs[k]
            ),
            3.5,
            divs[k - 1] / divs[k],
        ));
    }
    rows.push(VerifyRow::new(
        "elliptic",
        "relative divergence at 129",
        divs[2],
        1e-3,
    ));
    let grid = make_grid(129, 128, 4.0, 4.0).expect("valid grid");
    let ws = EllipticWorkspace::new(grid).expect("valid grid");
    for seed in 0..20u64 {
        let omega = band_limited_field(grid, &BandLimited::for_grid(&grid), seed);
        let phi = ws.solve(&omega).expect("solvable");
        rows.push(VerifyRow::new(
            "elliptic",
            format!("consistency seed={seed}"),
            consistency_residual(&phi, &omega),
            1e-10 * sup_norm(&omega),
        ));
    }
    rows
}

// ---------------------------------------------------------------- evolution helpers

/// Solver on `[0, 4] x [0, 4)` with `n + 1` radial and `n` axial nodes.
pub fn reference_solver(n: usize, eps: f64, nu: f64) -> Solver {
    let grid = make_grid(n + 1, n, 4.0, 4.0).expect("valid grid");
    Solver::new(grid, ModelParams::new(eps, nu).expect("valid parameters")).expect("valid grid")
}

/// Axis-centred Gaussian swirl of amplitude 5 at mid-period.
pub fn reference_ic(solver: &Solver, width: Option<f64>) -> State {
    let spec = IcSpec {
        width,
        ..IcSpec::default()
    };
    make_ic(&spec, solver).expect("reference data fits the grid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRun {
    /// `max |dE/dt + 2ν D| / E(0)`
    pub residual: f64,
    /// `|E(T) - E(0)| / E(0)`
    pub drift: f64,
}

/// Reference data evolved to `t_final`, energy recorded every step.
pub fn energy_run(n: usize, eps: f64, nu: f64, dt_max: f64, t_final: f64) -> EnergyRun {
    let solver = reference_solver(n, eps, nu);
    let s0 = reference_ic(&solver, None);
    let opts = EvolveOptions {
        ctl: StepControl {
            dt_max,
            ..StepControl::default()
        },
        ..EvolveOptions::default()
    };
    let params = *solver.params();
    let mut recs = Vec::new();
    evolve(&solver, s0, t_final, &opts, |s, _| {
        let (e, d) = energy(s, &params).expect("valid state");
        recs.push(DiagnosticsRecord {
            t: s.t,
            e_eps: e,
            d_eps: d,
            gamma_sup: 0.0,
            omega1_l2: 0.0,
            u1_lq: 0.0,
            bkm_proxy: 0.0,
            prodi_serrin: Vec::new(),
            ps_p4: 0.0,
            div_sup: 0.0,
            support_escape: 0.0,
        })
    })
    .expect("reference run is stable");
    let e0 = recs[0].e_eps;
    EnergyRun {
        residual: energy_identity_residual(&recs, nu).expect("enough samples"),
        drift: (recs[recs.len() - 1].e_eps - e0).abs() / e0,
    }
}

pub const ENERGY_EPS: [f64; 3] = [0.5, 1.0, 1.5];

pub fn energy_suite() -> Vec<VerifyRow> {
    let mut rows = Vec::new();
    for &eps in &ENERGY_EPS {
        let viscous = energy_run(128, eps, 0.1, 1e-3, 0.5);
        rows.push(VerifyRow::new(
            "energy",
            format!("identity residual eps={eps} nu=0.1 129x128"),
            viscous.residual,
            1e-2,
        ));
        let inviscid = energy_run(128, eps, 0.0, StepControl::default().dt_max, 0.5);
        rows.push(VerifyRow::new(
            "energy",
            format!("inviscid drift eps={eps} 129x128"),
            inviscid.drift,
            1e-2,
        ));
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleRun {
    pub gamma0: f64,
    pub gamma_max: f64,
    pub escape_max: f64,
}

pub fn maxprinciple_run(n: usize, eps: f64, nu: f64, t_final: f64) -> MaxPrincipleRun {
    let solver = reference_solver(n, eps, nu);
    let s0 = reference_ic(&solver, None);
    let gamma = |s: &State| sup_norm(&gamma_field(&s.u1, eps).expect("eps > 0"));
    let gamma0 = gamma(&s0);
    let (mut gamma_max, mut escape_max) = (0.0f64, 0.0f64);
    evolve(&solver, s0, t_final, &EvolveOptions::default(), |s, _| {
        gamma_max = gamma_max.max(gamma(s));
        escape_max = escape_max.max(support_escape(s));
    })
    .expect("reference run is stable");
    MaxPrincipleRun {
        gamma0,
        gamma_max,
        escape_max,
    }
}

/// Asserted for `ε >= 1, ν > 0`; reported only otherwise.
pub fn maxprinciple_suite(eps_list: &[f64], nu_list: &[f64], n: usize) -> Vec<VerifyRow> {
    let mut rows = Vec::new();
    for &eps in eps_list {
        for &nu in nu_list {
            if !(eps > 0.0 && eps < 2.0) || !(nu >= 0.0) {
                rows.push(VerifyRow::new(
                    "maxprinciple",
                    format!("eps={eps} nu={nu}: inadmissible parameters"),
                    f64::INFINITY,
                    0.0,
                ));
                continue;
            }
            let run = maxprinciple_run(n, eps, nu, 0.5);
            let assert = eps >= 1.0 && nu > 0.0;
            let mut gamma = VerifyRow::new(
                "maxprinciple",
                format!("max gamma_sup eps={eps} nu={nu}"),
                run.gamma_max,
                run.gamma0 * (1.0 + 1e-3),
            );
            let mut escape = VerifyRow::new(
                "maxprinciple",
                format!("support_escape eps={eps} nu={nu}"),
                run.escape_max,
                1e-6,
            );
            if !assert {
                gamma = gamma.informational();
                escape = escape.informational();
            }
            rows.push(gamma);
            rows.push(escape);
        }
    }
    rows
}

/// Sup over sliding three-step windows of the `Γ` equation defect,
/// `ε = 1.5`, `ν = 0.1`, up to `t_final`, for `r >= r_min`.
pub fn gamma_residual_run(n: usize, t_final: f64, r_min: f64) -> f64 {
    let solver = reference_solver(n, 1.5, 0.1);
    let s0 = reference_ic(&solver, None);
    let mut window: Vec<State> = Vec::with_capacity(3);
    let mut worst = 0.0f64;
    evolve(&solver, s0, t_final, &EvolveOptions::default(), |s, _| {
        if window.len() == 3 {
            window.remove(0);
        }
        window.push(s.clone());
        if window.len() == 3 {
            let res = gamma_evolution_residual(&window, solver.params(), r_min)
                .expect("valid window");
            worst = worst.max(res);
        }
    })
    .expect("reference run is stable");
    worst
}

// ---------------------------------------------------------------- scaling

pub const SCALING_TAU: f64 = 4.0;

fn relative_l2(a: &ScalarField, b: &ScalarField) -> f64 {
    let d = a.zip_with(b, Parity::Even, |x, y| x - y).expect("same grid");
    weighted_lp_norm(&d, 2.0).expect("p = 2") / weighted_lp_norm(b, 2.0).expect("p = 2")
}

/// Relative weighted `L²` differences `(u1, ω1)` between evolve-then-scale
/// and scale-then-evolve, `ε = 1.5`, `ν = 0.1`, `τ = 4`, from `t0 = 0.1`.
pub fn scaling_commutation(n: usize) -> (f64, f64) {
    let t0 = 0.1;
    let solver = reference_solver(n, 1.5, 0.1);
    let width = 1.0 / 5.68;
    let s0 = reference_ic(&solver, Some(width));
    let opts = EvolveOptions::default();
    let ws = solver.workspace();
    let a = evolve(&solver, s0.clone(), t0, &opts, |_, _| {})
        .expect("stable")
        .state;
    let a = scaling_transform(&a, SCALING_TAU, ws).expect("fits");
    let b0 = scaling_transform(&s0, SCALING_TAU, ws).expect("fits");
    let b = evolve(&solver, b0, SCALING_TAU * t0, &opts, |_, _| {})
        .expect("stable")
        .state;
    (relative_l2(&a.u1, &b.u1), relative_l2(&a.omega1, &b.omega1))
}

fn argmax(f: &ScalarField) -> (usize, usize) {
    let mut best = (0, 0);
    let mut m = -1.0;
    for ((i, j), &v) in f.values().indexed_iter() {
        if v.abs() > m {
            m = v.abs();
            best = (i, j);
        }
    }
    best
}

pub fn scaling_suite() -> Vec<VerifyRow> {
    let (eu, ew) = scaling_commutation(128);
    let mut rows = vec![
        VerifyRow::new(
            "scaling",
            "evolve/scale commutation u1, tau=4, 129x128",
            eu,
            2e-2,
        ),
        VerifyRow::new(
            "scaling",
            "evolve/scale commutation omega1, tau=4, 129x128",
            ew,
            2e-2,
        ),
    ];
    // peak moves to the contracted node
    let solver = reference_solver(128, 1.5, 0.1);
    let grid = *solver.grid();
    let spec = IcSpec {
        width: Some(0.15),
        r0: 0.5,
        z0: Some(2.5),
        ..IcSpec::default()
    };
    let s0 = make_ic(&spec, &solver).expect("fits");
    let (i0, j0) = argmax(&s0.u1);
    for tau in [1.0, 2.25, 4.0] {
        let s = scaling_transform(&s0, tau, solver.workspace()).expect("fits");
        let (i, j) = argmax(&s.u1);
        let r_expected = grid.r(i0) * tau.sqrt();
        let z_expected = 0.5 * grid.lz() + (grid.z(j0) - 0.5 * grid.lz()) * tau.sqrt();
        let miss = (grid.r(i) - r_expected).abs().max((grid.z(j) - z_expected).abs());
        rows.push(VerifyRow::new(
            "scaling",
            format!("argmax location tau={tau}"),
            miss,
            1e-12,
        ));
    }
    rows
}
