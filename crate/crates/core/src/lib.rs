//! Simulation and verification toolkit for the family of axisymmetric flow
//! models written in the transformed variables `u1 = u^θ/r`, `ω1 = ω^θ/r`,
//! `φ1 = φ^θ/r`, where the parameter `ε` scales the strength of convection.
//!
//! * [`fields`]: grid, fields, weighted quadrature
//! * [`elliptic`]: the stream-function solve `-L φ1 = ω1`
//! * [`dynamics`]: Biot–Savart velocity, right-hand sides, RK4 and CFL control
//! * [`diagnostics`]: energy, circulation, regularity monitors, scaling
//! * [`inequality`]: Hardy, cutoff and weighted-inequality checks

pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod exec;
pub mod fields;
pub mod inequality;
pub mod stencil;
pub mod synth;

pub use dynamics::{
    biot_savart, cfl_dt, divergence, evolve, rhs, step_rk4, EvolveFailure, EvolveOptions,
    EvolveReport, Solver, StepControl, StepInfo, Velocity,
};
pub use elliptic::{apply_l, grad, solve_phi, EllipticWorkspace};
pub use exec::Exec;
pub use fields::{
    ghost_even, make_grid, sup_norm, weighted_lp_norm, GridSpec, ModelParams, Parity,
    ScalarField, State,
};
pub use error::{
    DiagnosticsError, DynamicsError, EllipticError, FieldError, GridError, InequalityError,
    ModelError,
};
