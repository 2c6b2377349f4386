//! Velocity recovery, right-hand sides and explicit time stepping for
//!
//! ```text
//! u1_t + u^r u1_r + u^z u1_z = ν L u1 + 2 u1 φ1_z
//! ω1_t + u^r ω1_r + u^z ω1_z = ν L ω1 + (u1²)_z
//! -L φ1 = ω1,   u^r = -ε r φ1_z,   u^z = 2ε φ1 + ε r φ1_r
//! ```
//!
//! Advection is in convective form with centred differences; `(u1²)_z` is the
//! centred difference of the squared field. `u1` and `ω1` are held at zero on
//! the wall row.

use ndarray::Array2;

use crate::elliptic::{consistency_residual, EllipticWorkspace};
use crate::error::{DynamicsError, FieldError, ModelError};
use crate::exec::{for_each_row, Exec};
use crate::fields::{sup_norm, GridSpec, ModelParams, Parity, ScalarField, State};
use crate::stencil;

/// Poloidal velocity `(u^r, u^z)`; `u^r` is odd across the axis, `u^z` even.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub ur: ScalarField,
    pub uz: ScalarField,
}

impl Velocity {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            ur: ScalarField::zeros(grid, Parity::Odd),
            uz: ScalarField::zeros(grid, Parity::Even),
        }
    }

    /// `max(‖u^r‖∞, ‖u^z‖∞)`
    pub fn sup(&self) -> f64 {
        sup_norm(&self.ur).max(sup_norm(&self.uz))
    }
}

fn check_eps(eps: f64) -> Result<(), ModelError> {
    if eps.is_finite() && (0.0..2.0).contains(&eps) {
        Ok(())
    } else {
        Err(ModelError::EpsilonOutOfRange(eps))
    }
}

pub(crate) fn biot_savart_exec(phi1: &ScalarField, eps: f64, exec: Exec) -> Velocity {
    let grid = *phi1.grid();
    let phi_r = stencil::dr_exec(phi1, exec);
    let phi_z = stencil::dz_exec(phi1, exec);
    let p = phi1.values();
    let (pr, pz) = (phi_r.values(), phi_z.values());
    let mut ur = Array2::zeros(grid.shape());
    let mut uz = Array2::zeros(grid.shape());
    for_each_row(&mut ur, exec, |i, mut row| {
        let r = grid.r(i);
        for j in 0..grid.nz() {
            row[j] = -eps * r * pz[[i, j]];
        }
    });
    for_each_row(&mut uz, exec, |i, mut row| {
        let r = grid.r(i);
        for j in 0..grid.nz() {
            row[j] = eps * (2.0 * p[[i, j]] + r * pr[[i, j]]);
        }
    });
    Velocity {
        ur: ScalarField::from_array_unchecked(grid, ur, Parity::Odd),
        uz: ScalarField::from_array_unchecked(grid, uz, Parity::Even),
    }
}

/// `u^r = -ε r φ1_z`, `u^z = 2ε φ1 + ε r φ1_r`.
pub fn biot_savart(phi1: &ScalarField, eps: f64) -> Result<Velocity, DynamicsError> {
    check_eps(eps)?;
    phi1.require_even()?;
    Ok(biot_savart_exec(phi1, eps, Exec::Sequential))
}

/// `(1/r) ∂r(r u^r) + ∂z u^z`, with the axis limit `2 ∂r u^r + ∂z u^z`.
pub fn divergence(v: &Velocity) -> Result<ScalarField, FieldError> {
    v.ur.same_grid(&v.uz)?;
    let grid = *v.ur.grid();
    let n = grid.nr();
    let hr = grid.hr();
    let ur = v.ur.values();
    let uz_z = stencil::d_z(&v.uz);
    let odd = v.ur.parity() == Parity::Odd;
    let out = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let radial = if i == 0 {
            // 2 ∂r u^r with u^r(-h) = -u^r(h); an even u^r has no axis limit
            if odd {
                2.0 * ur[[1, j]] / hr
            } else {
                f64::NAN
            }
        } else if i + 1 == n {
            let g = |k: usize| grid.r(k) * ur[[k, j]];
            (3.0 * g(i) - 4.0 * g(i - 1) + g(i - 2)) / (2.0 * hr * grid.r(i))
        } else {
            (grid.r(i + 1) * ur[[i + 1, j]] - grid.r(i - 1) * ur[[i - 1, j]])
                / (2.0 * hr * grid.r(i))
        };
        radial + uz_z.get(i, j)
    });
    ScalarField::from_array(grid, out, Parity::Even)
}

/// CFL safety factors and the step cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl_adv: f64,
    pub cfl_diff: f64,
    pub dt_max: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl_adv: 0.5,
            cfl_diff: 0.2,
            dt_max: 1e-2,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("cfl_adv", self.cfl_adv), ("cfl_diff", self.cfl_diff)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must lie in (0, 1] (got {v})"));
            }
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(format!("dt_max must be positive (got {})", self.dt_max));
        }
        Ok(())
    }
}

/// Lower bound on the velocity scale in the advective limit.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Relative threshold for the `φ1`/`ω1` consistency check in [`rhs`].
pub const STALE_PHI_TOLERANCE: f64 = 1e-8;

fn dt_from_speed(grid: &GridSpec, speed: f64, nu: f64, ctl: &StepControl) -> f64 {
    let h = grid.hr().min(grid.hz());
    let mut dt = ctl.cfl_adv * h / speed.max(SPEED_FLOOR);
    if nu > 0.0 {
        dt = dt.min(ctl.cfl_diff * h * h / nu);
    }
    dt.min(ctl.dt_max)
}

/// Fused right-hand side on all rows; the wall row stays zero.
fn rhs_fields(state: &State, eps: f64, nu: f64, exec: Exec) -> (Array2<f64>, Array2<f64>) {
    let grid = *state.grid();
    let n = grid.nr();
    let nz = grid.nz();
    let hr = grid.hr();
    let inv_2hr = 0.5 / hr;
    let inv_hr2 = 1.0 / (hr * hr);
    let inv_2hz = 0.5 / grid.hz();
    let inv_hz2 = 1.0 / (grid.hz() * grid.hz());

    let vel = biot_savart_exec(&state.phi1, eps, exec);
    let (ur, uz) = (vel.ur.values(), vel.uz.values());
    let u = state.u1.values();
    let w = state.omega1.values();
    let phi = state.phi1.values();

    let mut du = Array2::zeros(grid.shape());
    let mut dw = Array2::zeros(grid.shape());

    for_each_row(&mut du, exec, |i, mut row| {
        if i + 1 == n {
            return;
        }
        for j in 0..nz {
            let jp = if j + 1 == nz { 0 } else { j + 1 };
            let jm = if j == 0 { nz - 1 } else { j - 1 };
            let q_r = if i == 0 {
                0.0
            } else {
                (u[[i + 1, j]] - u[[i - 1, j]]) * inv_2hr
            };
            let q_z = (u[[i, jp]] - u[[i, jm]]) * inv_2hz;
            let lap = stencil::l_radial_at(u, i, j, inv_hr2)
                + (u[[i, jp]] - 2.0 * u[[i, j]] + u[[i, jm]]) * inv_hz2;
            let phi_z = (phi[[i, jp]] - phi[[i, jm]]) * inv_2hz;
            row[j] = -ur[[i, j]] * q_r - uz[[i, j]] * q_z + nu * lap + 2.0 * u[[i, j]] * phi_z;
        }
    });

    for_each_row(&mut dw, exec, |i, mut row| {
        if i + 1 == n {
            return;
        }
        for j in 0..nz {
            let jp = if j + 1 == nz { 0 } else { j + 1 };
            let jm = if j == 0 { nz - 1 } else { j - 1 };
            let q_r = if i == 0 {
                0.0
            } else {
                (w[[i + 1, j]] - w[[i - 1, j]]) * inv_2hr
            };
            let q_z = (w[[i, jp]] - w[[i, jm]]) * inv_2hz;
            let lap = stencil::l_radial_at(w, i, j, inv_hr2)
                + (w[[i, jp]] - 2.0 * w[[i, j]] + w[[i, jm]]) * inv_hz2;
            let stretch = (u[[i, jp]] * u[[i, jp]] - u[[i, jm]] * u[[i, jm]]) * inv_2hz;
            row[j] = -ur[[i, j]] * q_r - uz[[i, j]] * q_z + nu * lap + stretch;
        }
    });
    (du, dw)
}

/// Time derivatives `(∂t u1, ∂t ω1)`.
///
/// Rejects a state whose `φ1` no longer solves `-L φ1 = ω1`.
pub fn rhs(
    state: &State,
    params: &ModelParams,
) -> Result<(ScalarField, ScalarField), DynamicsError> {
    state.u1.require_even()?;
    state.omega1.require_even()?;
    state.phi1.require_even()?;
    state.u1.same_grid(&state.omega1)?;
    state.u1.same_grid(&state.phi1)?;
    let residual = consistency_residual(&state.phi1, &state.omega1);
    let threshold = STALE_PHI_TOLERANCE * sup_norm(&state.omega1).max(f64::MIN_POSITIVE);
    if residual > threshold && residual > 1e-300 {
        return Err(DynamicsError::StalePhi {
            residual,
            threshold,
        });
    }
    let grid = *state.grid();
    let (du, dw) = rhs_fields(state, params.epsilon(), params.nu(), Exec::Sequential);
    Ok((
        ScalarField::from_array_unchecked(grid, du, Parity::Even),
        ScalarField::from_array_unchecked(grid, dw, Parity::Even),
    ))
}

/// Explicit step size from the advective and diffusive limits.
pub fn cfl_dt(state: &State, params: &ModelParams, ctl: &StepControl) -> f64 {
    let v = biot_savart_exec(&state.phi1, params.epsilon(), Exec::Sequential);
    dt_from_speed(state.grid(), v.sup(), params.nu(), ctl)
}

/// Model parameters bound to a grid and its elliptic workspace.
#[derive(Debug, Clone)]
pub struct Solver {
    params: ModelParams,
    ws: EllipticWorkspace,
}

impl Solver {
    pub fn new(grid: GridSpec, params: ModelParams) -> Result<Self, DynamicsError> {
        Self::with_exec(grid, params, Exec::Sequential)
    }

    pub fn with_exec(
        grid: GridSpec,
        params: ModelParams,
        exec: Exec,
    ) -> Result<Self, DynamicsError> {
        Ok(Self {
            params,
            ws: EllipticWorkspace::with_exec(grid, exec)?,
        })
    }

    pub fn from_workspace(ws: EllipticWorkspace, params: ModelParams) -> Self {
        Self { params, ws }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        self.ws.grid()
    }

    pub fn workspace(&self) -> &EllipticWorkspace {
        &self.ws
    }

    pub fn exec(&self) -> Exec {
        self.ws.exec()
    }

    /// Builds a consistent state by solving for `φ1`.
    pub fn state(
        &self,
        u1: ScalarField,
        omega1: ScalarField,
        t: f64,
    ) -> Result<State, DynamicsError> {
        u1.require_even()?;
        u1.check_finite()?;
        if u1.grid() != self.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        let phi1 = self.ws.solve(&omega1)?;
        Ok(State {
            u1,
            omega1,
            phi1,
            t,
        })
    }

    pub fn zero_state(&self) -> State {
        let g = *self.grid();
        State {
            u1: ScalarField::zeros(g, Parity::Even),
            omega1: ScalarField::zeros(g, Parity::Even),
            phi1: ScalarField::zeros(g, Parity::Even),
            t: 0.0,
        }
    }

    pub fn velocity(&self, state: &State) -> Velocity {
        biot_savart_exec(&state.phi1, self.params.epsilon(), self.exec())
    }

    pub fn cfl_dt(&self, state: &State, ctl: &StepControl) -> f64 {
        dt_from_speed(self.grid(), self.velocity(state).sup(), self.params.nu(), ctl)
    }

    fn stage(&self, state: &State) -> (Array2<f64>, Array2<f64>) {
        rhs_fields(state, self.params.epsilon(), self.params.nu(), self.exec())
    }

    fn offset(&self, base: &State, du: &Array2<f64>, dw: &Array2<f64>, h: f64) -> State {
        let g = *self.grid();
        let u1 = &base.u1.values().view() + &(du * h);
        let w1 = &base.omega1.values().view() + &(dw * h);
        let omega1 = ScalarField::from_array_unchecked(g, w1, Parity::Even);
        let phi1 = self.ws.solve_unchecked(&omega1);
        State {
            u1: ScalarField::from_array_unchecked(g, u1, Parity::Even),
            omega1,
            phi1,
            t: base.t + h,
        }
    }

    /// One classical RK4 step; `φ1` is re-solved at every stage. The new time
    /// is `t_next` exactly.
    pub fn step_to(&self, state: &State, t_next: f64) -> Result<State, DynamicsError> {
        let dt = t_next - state.t;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DynamicsError::BadTimeStep(dt));
        }
        let g = *self.grid();
        let (k1u, k1w) = self.stage(state);
        let s2 = self.offset(state, &k1u, &k1w, 0.5 * dt);
        let (k2u, k2w) = self.stage(&s2);
        let s3 = self.offset(state, &k2u, &k2w, 0.5 * dt);
        let (k3u, k3w) = self.stage(&s3);
        let s4 = self.offset(state, &k3u, &k3w, dt);
        let (k4u, k4w) = self.stage(&s4);

        let c = dt / 6.0;
        let combine = |y: &Array2<f64>, k1: &Array2<f64>, k2: &Array2<f64>, k3: &Array2<f64>, k4: &Array2<f64>| {
            let mut out = y.clone();
            ndarray::Zip::from(&mut out)
                .and(k1)
                .and(k2)
                .and(k3)
                .and(k4)
                .for_each(|o, &a, &b, &cc, &d| *o += c * (a + 2.0 * b + 2.0 * cc + d));
            out
        };
        let u1 = combine(state.u1.values(), &k1u, &k2u, &k3u, &k4u);
        let w1 = combine(state.omega1.values(), &k1w, &k2w, &k3w, &k4w);
        if !u1.iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::Instability {
                t: t_next,
                field: "u1",
            });
        }
        if !w1.iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::Instability {
                t: t_next,
                field: "omega1",
            });
        }
        let omega1 = ScalarField::from_array_unchecked(g, w1, Parity::Even);
        let phi1 = self.ws.solve_unchecked(&omega1);
        Ok(State {
            u1: ScalarField::from_array_unchecked(g, u1, Parity::Even),
            omega1,
            phi1,
            t: t_next,
        })
    }

    pub fn step(&self, state: &State, dt: f64) -> Result<State, DynamicsError> {
        self.step_to(state, state.t + dt)
    }
}

/// Free-function form of [`Solver::step`].
pub fn step_rk4(
    state: &State,
    params: &ModelParams,
    dt: f64,
    ws: &EllipticWorkspace,
) -> Result<State, DynamicsError> {
    Solver::from_workspace(ws.clone(), *params).step(state, dt)
}

/// What the observer sees after each reported step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// steps taken so far in this call
    pub step: usize,
    /// size of the step that produced the state (0 for the initial state)
    pub dt: f64,
    /// the state sits on one of the requested landing times
    pub landing: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub ctl: StepControl,
    /// observer is called every `stride` steps (and at the start and end)
    pub stride: usize,
    /// extra times the integrator must hit exactly, besides the final time
    pub landings: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ctl: StepControl::default(),
            stride: 1,
            landings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveReport {
    pub state: State,
    pub steps: usize,
    pub last_dt: f64,
}

/// Integration stopped early; `last_good` is the final finite state.
#[derive(Debug, Clone)]
pub struct EvolveFailure {
    pub error: DynamicsError,
    pub last_good: State,
    pub steps: usize,
    pub last_dt: f64,
}

impl std::fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (last good t = {}, {} steps, last dt = {:e})",
            self.error, self.last_good.t, self.steps, self.last_dt
        )
    }
}

impl std::error::Error for EvolveFailure {}

/// Relative slack under which a step is stretched to land on a stop time.
const LANDING_SLACK: f64 = 1e-10;

/// Advances `state0` to `t_final` with CFL-limited steps. Steps are clipped to
/// land exactly on `t_final` and on every landing time in between.
pub fn evolve<F>(
    solver: &Solver,
    state0: State,
    t_final: f64,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<EvolveReport, EvolveFailure>
where
    F: FnMut(&State, StepInfo),
{
    let fail = |error, last_good: State, steps, last_dt| EvolveFailure {
        error,
        last_good,
        steps,
        last_dt,
    };
    if !(t_final.is_finite() && t_final > state0.t) {
        return Err(fail(DynamicsError::BadFinalTime(t_final), state0, 0, 0.0));
    }
    let stride = opts.stride.max(1);
    let mut stops: Vec<f64> = opts
        .landings
        .iter()
        .copied()
        .filter(|&t| t > state0.t && t < t_final)
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite landing times"));
    stops.dedup();
    stops.push(t_final);

    observer(
        &state0,
        StepInfo {
            step: 0,
            dt: 0.0,
            landing: false,
            is_final: false,
        },
    );

    let mut state = state0;
    let mut steps = 0usize;
    let mut last_dt = 0.0;
    let mut next = 0usize;
    loop {
        let stop = stops[next];
        let dt = solver.cfl_dt(&state, &opts.ctl);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(fail(DynamicsError::BadTimeStep(dt), state, steps, last_dt));
        }
        let landing = state.t + dt >= stop - LANDING_SLACK * stop.abs().max(1.0);
        let t_next = if landing { stop } else { state.t + dt };
        let new_state = match solver.step_to(&state, t_next) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, state, steps, last_dt)),
        };
        last_dt = t_next - state.t;
        state = new_state;
        steps += 1;
        let is_final = landing && next + 1 == stops.len();
        if landing {
            next += 1;
        }
        if steps % stride == 0 || landing {
            observer(
                &state,
                StepInfo {
                    step: steps,
                    dt: last_dt,
                    landing,
                    is_final,
                },
            );
        }
        if is_final {
            return Ok(EvolveReport {
                state,
                steps,
                last_dt,
            });
        }
    }
}
