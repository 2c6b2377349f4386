//! Initial-condition library.

use epsflow_core::synth::{band_limited_field, truncated_gaussian, BandLimited, TRUNCATION};
use epsflow_core::{DynamicsError, GridSpec, Parity, ScalarField, Solver, State};
use thiserror::Error;

use crate::config::{IcKind, IcSpec};

#[derive(Debug, Error)]
pub enum IcError {
    #[error("{field} is nonzero at r = {r} >= r_max/2 = {limit}")]
    SupportViolation {
        field: &'static str,
        r: f64,
        limit: f64,
    },
    #[error(transparent)]
    Solver(#[from] DynamicsError),
}

/// Width for which the truncated Gaussian vanishes beyond `r_max/2`.
pub fn default_width(grid: &GridSpec) -> f64 {
    0.5 * grid.r_max() / 5.68
}

fn periodic_dz(z: f64, z0: f64, lz: f64) -> f64 {
    let d = (z - z0).rem_euclid(lz);
    if d > 0.5 * lz {
        d - lz
    } else {
        d
    }
}

/// `g(r-r0) + g(r+r0)` in `r`, periodic Gaussian in `z`, scaled to peak
/// value 1 at `(r0, zc)`.
fn swirl_profile(grid: &GridSpec, r0: f64, zc: f64, w: f64) -> impl Fn(f64, f64) -> f64 {
    let lz = grid.lz();
    let norm = 1.0 + truncated_gaussian(4.0 * r0 * r0, w);
    move |r, z| {
        let dz = periodic_dz(z, zc, lz);
        let a = truncated_gaussian((r - r0).powi(2) + dz * dz, w);
        let b = truncated_gaussian((r + r0).powi(2) + dz * dz, w);
        (a + b) / norm
    }
}

fn truncate(f: ScalarField) -> ScalarField {
    let peak = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return f;
    }
    f.map(|v| if v.abs() < TRUNCATION * peak { 0.0 } else { v })
}

fn check_support(f: &ScalarField, field: &'static str) -> Result<(), IcError> {
    let grid = f.grid();
    let limit = 0.5 * grid.r_max();
    for i in 0..grid.nr() {
        let r = grid.r(i);
        if r >= limit && f.row(i).iter().any(|&v| v != 0.0) {
            return Err(IcError::SupportViolation { field, r, limit });
        }
    }
    Ok(())
}

/// Builds `(u1, ω1)` on the solver's grid and solves for `φ1`.
pub fn make_ic(spec: &IcSpec, solver: &Solver) -> Result<State, IcError> {
    let grid = *solver.grid();
    let w = spec.width.unwrap_or_else(|| default_width(&grid));
    let zc = spec.z0.unwrap_or(0.5 * grid.lz());
    let a = spec.amplitude;
    let zero = || ScalarField::zeros(grid, Parity::Even);
    let (u1, omega1) = match spec.kind {
        IcKind::GaussianSwirl => {
            let g = swirl_profile(&grid, spec.r0, zc, w);
            (ScalarField::from_fn(grid, |r, z| a * g(r, z)), zero())
        }
        IcKind::Dipole => {
            let half = 0.5 * spec.separation.unwrap_or(2.0 * w);
            let up = swirl_profile(&grid, spec.r0, zc + half, w);
            let down = swirl_profile(&grid, spec.r0, zc - half, w);
            (zero(), ScalarField::from_fn(grid, |r, z| a * (up(r, z) - down(r, z))))
        }
        IcKind::RandomSmooth => {
            let shape = BandLimited {
                amplitude: a,
                z_modes: spec.modes,
                ..BandLimited::for_grid(&grid)
            };
            let s = spec.seed.wrapping_mul(2);
            (
                band_limited_field(grid, &shape, s),
                band_limited_field(grid, &shape, s.wrapping_add(1)),
            )
        }
    };
    let (u1, omega1) = (truncate(u1), truncate(omega1));
    check_support(&u1, "u1")?;
    check_support(&omega1, "omega1")?;
    Ok(solver.state(u1, omega1, 0.0)?)
}
