//! Energy, circulation, regularity monitors and the scaling transform.
//!
//! The energy is measured with the `ε`-independent poloidal velocity
//! `ũ = (-r φ1_z, 2φ1 + r φ1_r)`, i.e. the Biot–Savart velocity divided by
//! `ε`:
//!
//! ```text
//! E = ∬ (ũ^r)² + (ũ^z)² + (u^θ)²/(2-ε)  r dr dz,         u^θ = r u1
//! D = ∬ (ω^θ)² + (|∇u^θ|² + (u^θ/r)²)/(2-ε)  r dr dz,     ω^θ = r ω1
//! dE/dt = -2ν D
//! ```

use ndarray::Array2;

use crate::dynamics::{biot_savart_exec, divergence, Velocity};
use crate::elliptic::EllipticWorkspace;
use crate::error::DiagnosticsError;
use crate::exec::Exec;
use crate::fields::{
    sup_norm, weighted_integral, weighted_lp_norm, GridSpec, ModelParams, Parity, ScalarField,
    State,
};
use crate::stencil;

/// Default `ε′` used for the `L^q` monitor, `q = 4 - ε′`.
pub const EPS_PRIME: f64 = 20.0 / 19.0;

/// Radius fraction beyond which content counts as escaped toward the wall.
pub const ESCAPE_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    pub eps_prime: f64,
    /// Prodi–Serrin space exponents `p ∈ (3, ∞]`; the time exponent is
    /// `q = 2p/(p-3)`.
    pub ps_p: Vec<f64>,
    /// steps between records
    pub stride: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            eps_prime: EPS_PRIME,
            ps_p: vec![4.0],
            stride: 1,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        if !(self.eps_prime > 1.0 && self.eps_prime < 2.0) {
            return Err(DiagnosticsError::EpsilonNotPositive {
                what: "eps_prime (must lie in (1, 2))",
                eps: self.eps_prime,
            });
        }
        for &p in &self.ps_p {
            if !(p > 3.0) {
                return Err(DiagnosticsError::BadSerrinExponent(p));
            }
        }
        Ok(())
    }

    /// `q = 4 - ε′`
    pub fn lq_exponent(&self) -> f64 {
        4.0 - self.eps_prime
    }
}

/// Time exponent paired with `p` by `3/p + 2/q = 1`.
pub fn serrin_time_exponent(p: f64) -> Result<f64, DiagnosticsError> {
    if !(p > 3.0) {
        return Err(DiagnosticsError::BadSerrinExponent(p));
    }
    Ok(if p.is_infinite() { 2.0 } else { 2.0 * p / (p - 3.0) })
}

/// One row of monitored quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_eps: f64,
    pub d_eps: f64,
    /// `‖Γ‖∞`; reported as 0 when `ε = 0`, where `Γ` is undefined
    pub gamma_sup: f64,
    pub omega1_l2: f64,
    pub u1_lq: f64,
    /// `‖∇×v‖∞`, a computable upper surrogate for the BMO norm
    pub bkm_proxy: f64,
    /// `(p, ‖v‖_{L^p})` for each configured `p`
    pub prodi_serrin: Vec<(f64, f64)>,
    pub ps_p4: f64,
    pub div_sup: f64,
    pub support_escape: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 10] = [
        "t",
        "E_eps",
        "D_eps",
        "gamma_sup",
        "omega1_l2",
        "u1_lq",
        "bkm_proxy",
        "ps_p4",
        "div_sup",
        "support_escape",
    ];

    /// Values in [`Self::COLUMNS`] order.
    pub fn row(&self) -> [f64; 10] {
        [
            self.t,
            self.e_eps,
            self.d_eps,
            self.gamma_sup,
            self.omega1_l2,
            self.u1_lq,
            self.bkm_proxy,
            self.ps_p4,
            self.div_sup,
            self.support_escape,
        ]
    }
}

fn integrate(grid: GridSpec, values: Array2<f64>) -> f64 {
    weighted_integral(&ScalarField::from_array_unchecked(grid, values, Parity::Even))
}

/// `(E_ε, D_ε)`; see the module docs for the exact integrands.
pub fn energy(state: &State, params: &ModelParams) -> Result<(f64, f64), DiagnosticsError> {
    let grid = *state.grid();
    let w = 1.0 / (2.0 - params.epsilon());
    let vel = biot_savart_exec(&state.phi1, 1.0, Exec::Sequential);
    let u = state.u1.values();
    let om = state.omega1.values();
    let (ur, uz) = (vel.ur.values(), vel.uz.values());
    let e = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let r = grid.r(i);
        let ut = r * u[[i, j]];
        ur[[i, j]].powi(2) + uz[[i, j]].powi(2) + w * ut * ut
    });
    let u_r = stencil::d_r(&state.u1);
    let u_z = stencil::d_z(&state.u1);
    let d = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let r = grid.r(i);
        let q = u[[i, j]];
        let a = q + r * u_r.get(i, j);
        let b = r * u_z.get(i, j);
        let wt = r * om[[i, j]];
        wt * wt + w * (a * a + b * b + q * q)
    });
    Ok((integrate(grid, e), integrate(grid, d)))
}

/// Second-order derivative at the middle of three possibly unequal steps.
fn three_point_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<(), DiagnosticsError> {
    let mut prev = f64::NEG_INFINITY;
    for t in times {
        if !(t > prev) {
            return Err(DiagnosticsError::NonIncreasingTimes);
        }
        prev = t;
    }
    Ok(())
}

/// `max_k |dE/dt(t_k) + 2ν D(t_k)| / E(t_0)` over interior samples, with
/// `dE/dt` from the three-point difference.
pub fn energy_identity_residual(
    records: &[DiagnosticsRecord],
    nu: f64,
) -> Result<f64, DiagnosticsError> {
    if records.len() < 3 {
        return Err(DiagnosticsError::TooFewSamples {
            needed: 3,
            got: records.len(),
        });
    }
    check_times(records.iter().map(|r| r.t))?;
    let e0 = records[0].e_eps;
    let mut worst = 0.0_f64;
    for k in records.windows(3) {
        let de = three_point_derivative(
            [k[0].t, k[1].t, k[2].t],
            [k[0].e_eps, k[1].e_eps, k[2].e_eps],
        );
        worst = worst.max((de + 2.0 * nu * k[1].d_eps).abs());
    }
    Ok(if e0 > 0.0 { worst / e0 } else { worst })
}

fn positive_eps(eps: f64, what: &'static str) -> Result<(), DiagnosticsError> {
    if eps > 0.0 && eps < 2.0 {
        Ok(())
    } else {
        Err(DiagnosticsError::EpsilonNotPositive { what, eps })
    }
}

/// `Γ = u1 r^{2/ε}`; zero on the axis.
pub fn gamma_field(u1: &ScalarField, eps: f64) -> Result<ScalarField, DiagnosticsError> {
    positive_eps(eps, "the modified circulation")?;
    let a = 2.0 / eps;
    Ok(u1.map_with_coords(Parity::Even, |r, _, u| if r == 0.0 { 0.0 } else { u * r.powf(a) }))
}

/// Sup over `r_min <= r < R` of the defect of
///
/// ```text
/// Γ_t + u^r Γ_r + u^z Γ_z = ν (Γ_rr + (3 - 2a)/r Γ_r + a(a-2)/r² Γ + Γ_zz),  a = 2/ε
/// ```
///
/// evaluated at every interior sample with a three-point time difference.
pub fn gamma_evolution_residual(
    samples: &[State],
    params: &ModelParams,
    r_min: f64,
) -> Result<f64, DiagnosticsError> {
    if samples.len() < 3 {
        return Err(DiagnosticsError::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let eps = params.epsilon();
    positive_eps(eps, "the circulation residual")?;
    let grid = *samples[0].grid();
    for s in samples {
        s.u1.same_grid(&samples[0].u1)?;
    }
    let limit = 4.0 * grid.hr();
    if r_min < limit * (1.0 - 1e-12) {
        return Err(DiagnosticsError::RMinTooSmall { r_min, limit });
    }
    check_times(samples.iter().map(|s| s.t))?;
    let a = 2.0 / eps;
    let nu = params.nu();
    let gammas = samples
        .iter()
        .map(|s| gamma_field(&s.u1, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let i0 = (0..grid.nr()).find(|&i| grid.r(i) >= r_min * (1.0 - 1e-12));
    let Some(i0) = i0 else {
        return Ok(0.0);
    };
    let (hr, hz) = (grid.hr(), grid.hz());
    let nz = grid.nz();
    let mut worst = 0.0_f64;
    for k in 1..samples.len() - 1 {
        let vel = biot_savart_exec(&samples[k].phi1, eps, Exec::Sequential);
        let g = gammas[k].values();
        let t = [samples[k - 1].t, samples[k].t, samples[k + 1].t];
        for i in i0.max(1)..grid.nr() - 1 {
            let r = grid.r(i);
            for j in 0..nz {
                let jp = (j + 1) % nz;
                let jm = (j + nz - 1) % nz;
                let g_t = three_point_derivative(
                    t,
                    [gammas[k - 1].get(i, j), g[[i, j]], gammas[k + 1].get(i, j)],
                );
                let g_r = (g[[i + 1, j]] - g[[i - 1, j]]) / (2.0 * hr);
                let g_z = (g[[i, jp]] - g[[i, jm]]) / (2.0 * hz);
                let g_rr = (g[[i + 1, j]] - 2.0 * g[[i, j]] + g[[i - 1, j]]) / (hr * hr);
                let g_zz = (g[[i, jp]] - 2.0 * g[[i, j]] + g[[i, jm]]) / (hz * hz);
                let diff = g_rr + (3.0 - 2.0 * a) / r * g_r + a * (a - 2.0) / (r * r) * g[[i, j]] + g_zz;
                let defect = g_t + vel.ur.get(i, j) * g_r + vel.uz.get(i, j) * g_z - nu * diff;
                worst = worst.max(defect.abs());
            }
        }
    }
    Ok(worst)
}

/// Three-dimensional velocity `v = (u^r/ε, u^z/ε, u^θ/ε^{3/2})`.
///
/// At `ε = 0` the rescaling is singular and `(u^r, u^z, u^θ) = (0, 0, r u1)`
/// is used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct FullVelocity {
    pub vr: ScalarField,
    pub vz: ScalarField,
    pub vtheta: ScalarField,
    /// factor multiplying `r u1` in `v^θ`
    pub swirl_scale: f64,
}

pub fn full_velocity(state: &State, eps: f64) -> FullVelocity {
    let grid = *state.grid();
    let (poloidal, swirl_scale) = if eps > 0.0 {
        (
            biot_savart_exec(&state.phi1, 1.0, Exec::Sequential),
            eps.powf(-1.5),
        )
    } else {
        (Velocity::zeros(grid), 1.0)
    };
    let vtheta = state
        .u1
        .map_with_coords(Parity::Odd, |r, _, u| swirl_scale * r * u);
    FullVelocity {
        vr: poloidal.ur,
        vz: poloidal.uz,
        vtheta,
        swirl_scale,
    }
}

impl FullVelocity {
    pub fn magnitude(&self) -> ScalarField {
        let grid = *self.vr.grid();
        let out = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            let (a, b, c) = (self.vr.get(i, j), self.vz.get(i, j), self.vtheta.get(i, j));
            (a * a + b * b + c * c).sqrt()
        });
        ScalarField::from_array_unchecked(grid, out, Parity::Even)
    }
}

/// Fraction of `∬ (u1² + ω1²) r dr dz` located at `r > 0.9 R`.
pub fn support_escape(state: &State) -> f64 {
    let grid = *state.grid();
    let r_cut = ESCAPE_RADIUS * grid.r_max();
    let u = state.u1.values();
    let w = state.omega1.values();
    let dens = |i: usize, j: usize| u[[i, j]].powi(2) + w[[i, j]].powi(2);
    let total = integrate(grid, Array2::from_shape_fn(grid.shape(), |(i, j)| dens(i, j)));
    if total == 0.0 {
        return 0.0;
    }
    let outer = integrate(
        grid,
        Array2::from_shape_fn(grid.shape(), |(i, j)| {
            if grid.r(i) > r_cut {
                dens(i, j)
            } else {
                0.0
            }
        }),
    );
    outer / total
}

/// Assembles one [`DiagnosticsRecord`].
pub fn criteria_monitor(
    state: &State,
    params: &ModelParams,
    cfg: &MonitorConfig,
) -> Result<DiagnosticsRecord, DiagnosticsError> {
    cfg.validate()?;
    let grid = *state.grid();
    let eps = params.epsilon();
    let (e_eps, d_eps) = energy(state, params)?;
    let gamma_sup = if eps > 0.0 {
        sup_norm(&gamma_field(&state.u1, eps)?)
    } else {
        0.0
    };

    let v = full_velocity(state, eps);
    let speed = v.magnitude();
    let mut prodi_serrin = Vec::with_capacity(cfg.ps_p.len());
    for &p in &cfg.ps_p {
        prodi_serrin.push((p, weighted_lp_norm(&speed, p)?));
    }
    let ps_p4 = match prodi_serrin.iter().find(|(p, _)| *p == 4.0) {
        Some(&(_, n)) => n,
        None => weighted_lp_norm(&speed, 4.0)?,
    };

    // vorticity of v: ω^r = -∂z v^θ, ω^θ = r ω1 (poloidal), ω^z = (1/r)∂r(r v^θ)
    let s = v.swirl_scale;
    let pol = if eps > 0.0 { 1.0 } else { 0.0 };
    let u_r = stencil::d_r(&state.u1);
    let u_z = stencil::d_z(&state.u1);
    let mut bkm_proxy = 0.0_f64;
    for i in 0..grid.nr() {
        let r = grid.r(i);
        for j in 0..grid.nz() {
            let u = state.u1.get(i, j);
            let w_r = -s * r * u_z.get(i, j);
            let w_t = pol * r * state.omega1.get(i, j);
            let w_z = s * (2.0 * u + r * u_r.get(i, j));
            bkm_proxy = bkm_proxy.max((w_r * w_r + w_t * w_t + w_z * w_z).sqrt());
        }
    }

    let div_sup = if eps > 0.0 {
        sup_norm(&divergence(&Velocity {
            ur: v.vr.clone(),
            uz: v.vz.clone(),
        })?)
    } else {
        0.0
    };

    Ok(DiagnosticsRecord {
        t: state.t,
        e_eps,
        d_eps,
        gamma_sup,
        omega1_l2: weighted_lp_norm(&state.omega1, 2.0)?,
        u1_lq: weighted_lp_norm(&state.u1, cfg.lq_exponent())?,
        bkm_proxy,
        prodi_serrin,
        ps_p4,
        div_sup,
        support_escape: support_escape(state),
    })
}

/// Relative amplitude a field may have outside the region that the scaling
/// maps onto the target grid.
pub const SCALING_ESCAPE_TOLERANCE: f64 = 1e-6;

/// Fractional index snapped to the nearest integer when within round-off.
fn snap(x: f64) -> f64 {
    let n = x.round();
    if (x - n).abs() < 1e-9 {
        n
    } else {
        x
    }
}

/// Bilinear sample of `f` at `(r, z)`; zero beyond the wall, periodic in `z`.
fn bilinear(f: &ScalarField, r: f64, z: f64) -> f64 {
    let g = f.grid();
    let fi = snap(r / g.hr());
    let last = (g.nr() - 1) as f64;
    if fi > last {
        return 0.0;
    }
    let nz = g.nz();
    let fj = snap((z / g.hz()).rem_euclid(nz as f64));
    let fj = if fj >= nz as f64 { 0.0 } else { fj };
    let i0 = fi.floor() as usize;
    let j0 = fj.floor() as usize;
    let (a, b) = (fi - i0 as f64, fj - j0 as f64);
    let i1 = (i0 + 1).min(g.nr() - 1);
    let j1 = (j0 + 1) % nz;
    let v = f.values();
    let lo = if b == 0.0 {
        v[[i0, j0]]
    } else {
        (1.0 - b) * v[[i0, j0]] + b * v[[i0, j1]]
    };
    if a == 0.0 {
        return lo;
    }
    let hi = if b == 0.0 {
        v[[i1, j0]]
    } else {
        (1.0 - b) * v[[i1, j0]] + b * v[[i1, j1]]
    };
    (1.0 - a) * lo + a * hi
}

/// Largest `|f|` outside the source region that maps onto `target`,
/// relative to `‖f‖∞`.
fn dropped_fraction(f: &ScalarField, target: &GridSpec, s: f64) -> f64 {
    let g = f.grid();
    let peak = sup_norm(f);
    if peak == 0.0 {
        return 0.0;
    }
    let r_cover = target.r_max() / s + g.hr();
    let half = 0.5 * target.lz() / s;
    let zc = 0.5 * g.lz();
    let mut worst = 0.0_f64;
    for i in 0..g.nr() {
        for j in 0..g.nz() {
            let dz = (g.z(j) - zc).abs();
            let covered = g.r(i) <= r_cover && (half >= 0.5 * g.lz() || dz <= half + g.hz());
            if !covered {
                worst = worst.max(f.get(i, j).abs());
            }
        }
    }
    worst / peak
}

/// `u1 → τ^{-1} u1(x/√τ)`, `ω1 → τ^{-3/2} ω1(x/√τ)`, `t → τ t`, resampled
/// bilinearly onto the workspace grid. `z` is scaled about the centre of
/// each period; `φ1` is re-solved.
pub fn scaling_transform(
    state: &State,
    tau: f64,
    ws: &EllipticWorkspace,
) -> Result<State, DiagnosticsError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(DiagnosticsError::BadScale(tau));
    }
    let target = *ws.grid();
    let s = tau.sqrt();
    for f in [&state.u1, &state.omega1] {
        let dropped = dropped_fraction(f, &target, s);
        if dropped > SCALING_ESCAPE_TOLERANCE {
            return Err(DiagnosticsError::SupportEscape { dropped });
        }
    }
    let src_zc = 0.5 * state.grid().lz();
    let dst_zc = 0.5 * target.lz();
    let resample = |f: &ScalarField, amp: f64| {
        let out = Array2::from_shape_fn(target.shape(), |(i, j)| {
            let r = target.r(i) / s;
            let z = src_zc + (target.z(j) - dst_zc) / s;
            amp * bilinear(f, r, z)
        });
        ScalarField::from_array_unchecked(target, out, Parity::Even)
    };
    let u1 = resample(&state.u1, 1.0 / tau);
    let omega1 = resample(&state.omega1, tau.powf(-1.5));
    let phi1 = ws.solve(&omega1)?;
    Ok(State {
        u1,
        omega1,
        phi1,
        t: tau * state.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Solver;
    use crate::fields::make_grid;

    #[test]
    fn three_point_derivative_is_exact_on_quadratics() {
        let f = |t: f64| 3.0 * t * t - t + 2.0;
        let t = [0.1, 0.25, 0.32];
        let d = three_point_derivative(t, [f(t[0]), f(t[1]), f(t[2])]);
        assert!((d - (6.0 * 0.25 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gamma_at_unit_epsilon_is_classical_circulation() {
        let g = make_grid(9, 4, 2.0, 1.0).unwrap();
        let u = ScalarField::from_fn(g, |r, z| 1.0 + r + z);
        let gam = gamma_field(&u, 1.0).unwrap();
        for i in 0..g.nr() {
            for j in 0..g.nz() {
                let r = g.r(i);
                assert!((gam.get(i, j) - u.get(i, j) * r * r).abs() < 1e-14);
            }
        }
        assert!(gamma_field(&u, 0.0).is_err());
        assert!(gam.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_state_gives_zero_record() {
        let g = make_grid(17, 16, 1.0, 1.0).unwrap();
        let solver = Solver::new(g, ModelParams::new(1.5, 0.1).unwrap()).unwrap();
        let rec = criteria_monitor(&solver.zero_state(), solver.params(), &MonitorConfig::default())
            .unwrap();
        assert!(rec.row().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn serrin_pairs() {
        assert_eq!(serrin_time_exponent(4.0).unwrap(), 8.0);
        assert_eq!(serrin_time_exponent(f64::INFINITY).unwrap(), 2.0);
        assert!(serrin_time_exponent(3.0).is_err());
    }

    #[test]
    fn unit_scale_is_identity() {
        let g = make_grid(33, 32, 2.0, 2.0).unwrap();
        let solver = Solver::new(g, ModelParams::new(1.0, 0.1).unwrap()).unwrap();
        let u = ScalarField::from_fn(g, |r, z| (-(r * r + (z - 1.0).powi(2)) * 20.0).exp());
        let w = u.map(|x| 0.5 * x);
        let s = solver.state(u, w, 0.3).unwrap();
        let s1 = scaling_transform(&s, 1.0, solver.workspace()).unwrap();
        assert_eq!(s1.u1, s.u1);
        assert_eq!(s1.omega1, s.omega1);
        assert_eq!(s1.t, 0.3);
    }
}
