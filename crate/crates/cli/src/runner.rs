//! `run` and `sweep`.

use std::cell::RefCell;
use std::path::{Path, PathBuf};

use epsflow_core::diagnostics::{criteria_monitor, energy_identity_residual, DiagnosticsRecord};
use epsflow_core::{
    evolve, sup_norm, DiagnosticsError, DynamicsError, EvolveOptions, Exec, Solver, State,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::ic::{make_ic, IcError};
use crate::snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INSTABILITY: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_VIOLATION: i32 = 5;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const FINAL_SNAPSHOT: &str = "final.epsf";
pub const LAST_GOOD_SNAPSHOT: &str = "last_good.epsf";
pub const FAILURE_REPORT: &str = "failure.txt";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial condition: {0}")]
    Ic(#[from] IcError),
    #[error("resume: {0}")]
    Resume(String),
    #[error("solver setup: {0}")]
    Setup(DynamicsError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("snapshot: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Ic(_) | RunError::Resume(_) => EXIT_CONFIG,
            RunError::Setup(_) | RunError::Diagnostics(_) => EXIT_INSTABILITY,
            RunError::Snapshot(SnapshotError::Io(_)) | RunError::Io(_) | RunError::Csv(_) => {
                EXIT_IO
            }
            RunError::Snapshot(_) => EXIT_CONFIG,
        }
    }
}

/// Why and where an evolution stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    /// time of the last finite state
    pub t: f64,
    /// field that went non-finite, if that was the cause
    pub field: Option<String>,
    pub last_dt: f64,
    pub message: String,
}

impl FailureReport {
    fn render(&self) -> String {
        format!(
            "t = {}\nfield = {}\nlast_dt = {:e}\nerror = {}\n",
            self.t,
            self.field.as_deref().unwrap_or("none"),
            self.last_dt,
            self.message
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    /// final state, or the last finite state on failure
    pub state: State,
    pub omega1_sup_initial: f64,
    /// steps since the start of the run, counting steps before a resume
    pub steps: u64,
    pub failure: Option<FailureReport>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            EXIT_INSTABILITY
        } else {
            0
        }
    }
}

pub fn snapshot_name(step: u64) -> String {
    format!("snap_{step:08}.epsf")
}

/// Checkpoint times `k Δ` strictly inside `(0, t_final)`.
fn checkpoint_times(cfg: &RunConfig) -> Vec<f64> {
    let Some(dt) = cfg.snapshot_interval else {
        return Vec::new();
    };
    (1..)
        .map(|k| k as f64 * dt)
        .take_while(|&t| t < cfg.t_final * (1.0 - 1e-12))
        .collect()
}

fn write_row(w: &mut csv::Writer<std::fs::File>, rec: &DiagnosticsRecord) -> csv::Result<()> {
    w.write_record(rec.row().iter().map(|v| v.to_string()))
}

/// Evolves `cfg` (or resumes from `resume`) and writes diagnostics and
/// snapshots under `cfg.output`. An instability is reported in the outcome,
/// not as an error, after the last finite state has been written.
pub fn run(cfg: &RunConfig, resume: Option<&Path>) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let monitor = cfg.monitor();
    let solver = Solver::with_exec(grid, params, Exec::from_parallel(cfg.parallel))
        .map_err(RunError::Setup)?;

    let (state0, base_step) = match resume {
        Some(path) => {
            let snap = read_snapshot(path)?;
            if snap.grid != grid {
                return Err(RunError::Resume(format!(
                    "snapshot grid {}x{} on [0,{}]x[0,{}) does not match the configuration",
                    snap.grid.nr(),
                    snap.grid.nz(),
                    snap.grid.r_max(),
                    snap.grid.lz()
                )));
            }
            if snap.epsilon != params.epsilon() || snap.nu != params.nu() {
                return Err(RunError::Resume(format!(
                    "snapshot has epsilon = {}, nu = {}; configuration has {}, {}",
                    snap.epsilon,
                    snap.nu,
                    params.epsilon(),
                    params.nu()
                )));
            }
            if !(snap.t < cfg.t_final) {
                return Err(RunError::Resume(format!(
                    "snapshot time {} is not before t_final = {}",
                    snap.t, cfg.t_final
                )));
            }
            (snap.to_state(solver.workspace())?, snap.step)
        }
        None => (make_ic(&cfg.ic, &solver)?, 0),
    };

    let out = &cfg.output;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.txt"), cfg.dump())?;
    let mut writer = csv::Writer::from_path(out.join(DIAGNOSTICS_FILE))?;
    writer.write_record(DiagnosticsRecord::COLUMNS)?;

    let opts = EvolveOptions {
        ctl: cfg.step_control(),
        stride: 1,
        landings: checkpoint_times(cfg),
    };
    let stride = cfg.diag_stride as u64;
    let records = RefCell::new(Vec::new());
    let pending: RefCell<Option<RunError>> = RefCell::new(None);
    let mut observe = |state: &State, info: epsflow_core::StepInfo| {
        if pending.borrow().is_some() {
            return;
        }
        let global = base_step + info.step as u64;
        let result = (|| -> Result<(), RunError> {
            if info.step == 0 || global % stride == 0 || info.landing {
                let rec = criteria_monitor(state, &params, &monitor)?;
                write_row(&mut writer, &rec)?;
                records.borrow_mut().push(rec);
            }
            if info.landing {
                let snap = Snapshot::new(state, &params, global);
                write_snapshot(&snap, &out.join(snapshot_name(global)))?;
                if info.is_final {
                    write_snapshot(&snap, &out.join(FINAL_SNAPSHOT))?;
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            *pending.borrow_mut() = Some(e);
        }
    };

    let omega1_sup_initial = sup_norm(&state0.omega1);
    let evolved = evolve(&solver, state0, cfg.t_final, &opts, &mut observe);
    if let Some(e) = pending.into_inner() {
        return Err(e);
    }
    let (state, steps, failure) = match evolved {
        Ok(report) => (report.state, base_step + report.steps as u64, None),
        Err(fail) => {
            let steps = base_step + fail.steps as u64;
            let field = match &fail.error {
                DynamicsError::Instability { field, .. } => Some(field.to_string()),
                _ => None,
            };
            let report = FailureReport {
                t: fail.last_good.t,
                field,
                last_dt: fail.last_dt,
                message: fail.error.to_string(),
            };
            write_snapshot(
                &Snapshot::new(&fail.last_good, &params, steps),
                &out.join(LAST_GOOD_SNAPSHOT),
            )?;
            std::fs::write(out.join(FAILURE_REPORT), report.render())?;
            (fail.last_good, steps, Some(report))
        }
    };
    writer.flush()?;
    drop(writer);
    Ok(RunOutcome {
        records: records.into_inner(),
        state,
        omega1_sup_initial,
        steps,
        failure,
    })
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub status: String,
    pub t_end: f64,
    pub omega1_sup_initial: f64,
    pub omega1_sup_final: f64,
    /// `max_t ‖Γ‖∞ / ‖Γ(0)‖∞`
    pub max_gamma_ratio: f64,
    pub energy_residual: f64,
    pub failure_time: Option<f64>,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 9] = [
        "epsilon",
        "status",
        "t_end",
        "omega1_sup_initial",
        "omega1_sup_final",
        "omega1_growth",
        "max_gamma_ratio",
        "energy_residual",
        "failure_time",
    ];

    /// `‖ω1(T)‖∞ / ‖ω1(0)‖∞`
    pub fn omega1_growth(&self) -> f64 {
        self.omega1_sup_final / self.omega1_sup_initial
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.epsilon.to_string(),
            self.status.clone(),
            self.t_end.to_string(),
            self.omega1_sup_initial.to_string(),
            self.omega1_sup_final.to_string(),
            self.omega1_growth().to_string(),
            self.max_gamma_ratio.to_string(),
            self.energy_residual.to_string(),
            self.failure_time.map_or_else(String::new, |t| t.to_string()),
        ]
    }
}

fn summarize(epsilon: f64, nu: f64, result: Result<RunOutcome, RunError>) -> SweepRow {
    match result {
        Ok(out) => {
            let recs = &out.records;
            let gamma0 = recs.first().map_or(0.0, |r| r.gamma_sup);
            let gamma_max = recs.iter().fold(0.0f64, |m, r| m.max(r.gamma_sup));
            let max_gamma_ratio = if gamma0 > 0.0 {
                gamma_max / gamma0
            } else if gamma_max == 0.0 {
                1.0
            } else {
                f64::INFINITY
            };
            SweepRow {
                epsilon,
                status: if out.failure.is_some() {
                    "instability".into()
                } else {
                    "ok".into()
                },
                t_end: out.state.t,
                omega1_sup_initial: out.omega1_sup_initial,
                omega1_sup_final: sup_norm(&out.state.omega1),
                max_gamma_ratio,
                energy_residual: energy_identity_residual(recs, nu).unwrap_or(f64::NAN),
                failure_time: out.failure.as_ref().map(|f| f.t),
            }
        }
        Err(e) => SweepRow {
            epsilon,
            status: format!("error: {e}"),
            t_end: f64::NAN,
            omega1_sup_initial: f64::NAN,
            omega1_sup_final: f64::NAN,
            max_gamma_ratio: f64::NAN,
            energy_residual: f64::NAN,
            failure_time: None,
        },
    }
}

/// Directory of the `epsilon` member of a sweep rooted at `root`.
pub fn sweep_dir(root: &Path, epsilon: f64) -> PathBuf {
    root.join(format!("eps_{epsilon}"))
}

/// Runs `base` once per `ε` (in parallel) and writes `summary.csv`. Every
/// `ε` is checked before anything runs; per-run failures only mark their row.
pub fn sweep(base: &RunConfig, eps_list: &[f64]) -> Result<Vec<SweepRow>, RunError> {
    if eps_list.is_empty() {
        return Err(ConfigError::Invalid {
            key: "epsilon",
            msg: "empty epsilon list".into(),
        }
        .into());
    }
    let configs: Vec<RunConfig> = eps_list
        .iter()
        .map(|&eps| {
            let cfg = RunConfig {
                epsilon: eps,
                output: sweep_dir(&base.output, eps),
                ..base.clone()
            };
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<_, _>>()?;
    std::fs::create_dir_all(&base.output)?;
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .map(|cfg| summarize(cfg.epsilon, cfg.nu, run(cfg, None)))
        .collect();
    let mut w = csv::Writer::from_path(base.output.join(SUMMARY_FILE))?;
    w.write_record(SweepRow::COLUMNS)?;
    for row in &rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(rows)
}
