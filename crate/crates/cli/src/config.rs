//! Flat `key = value` run configuration.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `nr`, `nz` | 129, 128 | radial nodes (axis and wall included), axial nodes per period |
//! | `r_max`, `lz` | 4, 4 | wall radius, axial period |
//! | `epsilon` | 1.5 | convection strength, `[0, 2)` |
//! | `nu` | 0.1 | viscosity |
//! | `t_final` | 0.5 | final time |
//! | `cfl_adv`, `cfl_diff`, `dt_max` | 0.5, 0.2, 0.01 | step control |
//! | `eps_prime` | 20/19 | exponent of the `u1` Lebesgue norm is `4 - eps_prime` |
//! | `ps_p` | 4 | comma-separated Prodi–Serrin exponents, `inf` allowed |
//! | `ic` | gaussian_swirl | `gaussian_swirl`, `dipole` or `random_smooth` |
//! | `ic_amplitude` | 5 | peak amplitude |
//! | `ic_width` | auto | Gaussian width; auto puts the support edge at `r_max/2` |
//! | `ic_r0`, `ic_z0` | 0, `lz/2` | centre |
//! | `ic_separation` | `2 ic_width` | dipole lobe distance |
//! | `ic_modes` | 4 | axial modes of `random_smooth` |
//! | `seed` | 0 | seed of `random_smooth` |
//! | `output` | out | output directory |
//! | `diag_stride` | 5 | steps between diagnostics rows |
//! | `snapshot_interval` | none | time between checkpoints; the final state is always written |
//! | `parallel` | false | parallel row loops |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use epsflow_core::diagnostics::{MonitorConfig, EPS_PRIME};
use epsflow_core::{GridSpec, ModelParams, StepControl};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid `{key}`: {msg}")]
    Invalid { key: &'static str, msg: String },
}

fn invalid(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    GaussianSwirl,
    Dipole,
    RandomSmooth,
}

impl IcKind {
    pub fn name(self) -> &'static str {
        match self {
            IcKind::GaussianSwirl => "gaussian_swirl",
            IcKind::Dipole => "dipole",
            IcKind::RandomSmooth => "random_smooth",
        }
    }
}

impl FromStr for IcKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian_swirl" => Ok(IcKind::GaussianSwirl),
            "dipole" => Ok(IcKind::Dipole),
            "random_smooth" => Ok(IcKind::RandomSmooth),
            other => Err(format!(
                "unknown initial condition `{other}` (expected gaussian_swirl, dipole or random_smooth)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSpec {
    pub kind: IcKind,
    pub amplitude: f64,
    pub width: Option<f64>,
    pub r0: f64,
    pub z0: Option<f64>,
    pub separation: Option<f64>,
    pub modes: usize,
    pub seed: u64,
}

impl Default for IcSpec {
    fn default() -> Self {
        Self {
            kind: IcKind::GaussianSwirl,
            amplitude: 5.0,
            width: None,
            r0: 0.0,
            z0: None,
            separation: None,
            modes: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nr: usize,
    pub nz: usize,
    pub r_max: f64,
    pub lz: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub t_final: f64,
    pub cfl_adv: f64,
    pub cfl_diff: f64,
    pub dt_max: f64,
    pub eps_prime: f64,
    pub ps_p: Vec<f64>,
    pub ic: IcSpec,
    pub output: PathBuf,
    pub diag_stride: usize,
    pub snapshot_interval: Option<f64>,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ctl = StepControl::default();
        Self {
            nr: 129,
            nz: 128,
            r_max: 4.0,
            lz: 4.0,
            epsilon: 1.5,
            nu: 0.1,
            t_final: 0.5,
            cfl_adv: ctl.cfl_adv,
            cfl_diff: ctl.cfl_diff,
            dt_max: ctl.dt_max,
            eps_prime: EPS_PRIME,
            ps_p: vec![4.0],
            ic: IcSpec::default(),
            output: PathBuf::from("out"),
            diag_stride: 5,
            snapshot_interval: None,
            parallel: false,
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse::<f64>().map_err(|e| format!("`{v}` is not a number ({e})")),
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|e| format!("`{v}` is not a non-negative integer ({e})"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn parse_optional(v: &str) -> Result<Option<f64>, String> {
    if v == "auto" || v == "none" {
        Ok(None)
    } else {
        parse_f64(v).map(Some)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses and validates; keys not listed in the module table are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value)
                .map_err(|msg| ConfigError::Parse { line, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "nr" => self.nr = parse_usize(v)?,
            "nz" => self.nz = parse_usize(v)?,
            "r_max" => self.r_max = parse_f64(v)?,
            "lz" => self.lz = parse_f64(v)?,
            "epsilon" => self.epsilon = parse_f64(v)?,
            "nu" => self.nu = parse_f64(v)?,
            "t_final" => self.t_final = parse_f64(v)?,
            "cfl_adv" => self.cfl_adv = parse_f64(v)?,
            "cfl_diff" => self.cfl_diff = parse_f64(v)?,
            "dt_max" => self.dt_max = parse_f64(v)?,
            "eps_prime" => self.eps_prime = parse_f64(v)?,
            "ps_p" => {
                self.ps_p = v
                    .split(',')
                    .map(|s| parse_f64(s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "ic" => self.ic.kind = v.parse()?,
            "ic_amplitude" => self.ic.amplitude = parse_f64(v)?,
            "ic_width" => self.ic.width = parse_optional(v)?,
            "ic_r0" => self.ic.r0 = parse_f64(v)?,
            "ic_z0" => self.ic.z0 = parse_optional(v)?,
            "ic_separation" => self.ic.separation = parse_optional(v)?,
            "ic_modes" => self.ic.modes = parse_usize(v)?,
            "seed" => {
                self.ic.seed = v
                    .parse()
                    .map_err(|e| format!("`{v}` is not a seed ({e})"))?
            }
            "output" => self.output = PathBuf::from(v),
            "diag_stride" => self.diag_stride = parse_usize(v)?,
            "snapshot_interval" => self.snapshot_interval = parse_optional(v)?,
            "parallel" => self.parallel = parse_bool(v)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        if !(self.epsilon.is_finite() && (0.0..2.0).contains(&self.epsilon)) {
            return Err(invalid(
                "epsilon",
                format!("epsilon ∈ [0,2) required (got {})", self.epsilon),
            ));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(invalid("nu", format!("nu >= 0 required (got {})", self.nu)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid("t_final", "must be positive"));
        }
        for (key, v) in [
            ("cfl_adv", self.cfl_adv),
            ("cfl_diff", self.cfl_diff),
            ("dt_max", self.dt_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be positive (got {v})")));
            }
        }
        if !(self.eps_prime > 1.0 && self.eps_prime < 2.0) {
            return Err(invalid("eps_prime", "eps_prime ∈ (1,2) required"));
        }
        if self.ps_p.is_empty() || self.ps_p.iter().any(|&p| !(p > 3.0)) {
            return Err(invalid("ps_p", "every exponent must exceed 3"));
        }
        if !(self.ic.amplitude.is_finite()) {
            return Err(invalid("ic_amplitude", "must be finite"));
        }
        if let Some(w) = self.ic.width {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid("ic_width", "must be positive"));
            }
        }
        if !(self.ic.r0.is_finite() && self.ic.r0 >= 0.0) {
            return Err(invalid("ic_r0", "must be non-negative"));
        }
        if let Some(z0) = self.ic.z0 {
            if !z0.is_finite() {
                return Err(invalid("ic_z0", "must be finite"));
            }
        }
        if let Some(s) = self.ic.separation {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("ic_separation", "must be positive"));
            }
        }
        if self.diag_stride < 1 {
            return Err(invalid("diag_stride", "must be >= 1"));
        }
        if let Some(dt) = self.snapshot_interval {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("snapshot_interval", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(self.nr, self.nz, self.r_max, self.lz).map_err(|e| {
            use epsflow_core::error::GridError::*;
            let key = match e {
                TooFewRadialNodes(_) => "nr",
                TooFewAxialNodes(_) => "nz",
                BadRadialExtent(_) => "r_max",
                BadAxialPeriod(_) => "lz",
            };
            invalid(key, e.to_string())
        })
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(self.epsilon, self.nu).map_err(|e| invalid("epsilon", e.to_string()))
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl_adv: self.cfl_adv,
            cfl_diff: self.cfl_diff,
            dt_max: self.dt_max,
        }
    }

    pub fn monitor(&self) -> MonitorConfig {
        MonitorConfig {
            eps_prime: self.eps_prime,
            ps_p: self.ps_p.clone(),
            stride: self.diag_stride,
        }
    }

    /// Text form accepted by [`RunConfig::parse`]; every key is written.
    pub fn dump(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |x| x.to_string());
        let mut s = String::new();
        let ps: Vec<String> = self.ps_p.iter().map(|p| p.to_string()).collect();
        let lines: [(&str, String); 24] = [
            ("nr", self.nr.to_string()),
            ("nz", self.nz.to_string()),
            ("r_max", self.r_max.to_string()),
            ("lz", self.lz.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("nu", self.nu.to_string()),
            ("t_final", self.t_final.to_string()),
            ("cfl_adv", self.cfl_adv.to_string()),
            ("cfl_diff", self.cfl_diff.to_string()),
            ("dt_max", self.dt_max.to_string()),
            ("eps_prime", self.eps_prime.to_string()),
            ("ps_p", ps.join(", ")),
            ("ic", self.ic.kind.name().to_string()),
            ("ic_amplitude", self.ic.amplitude.to_string()),
            ("ic_width", opt(self.ic.width)),
            ("ic_r0", self.ic.r0.to_string()),
            ("ic_z0", opt(self.ic.z0)),
            ("ic_separation", opt(self.ic.separation)),
            ("ic_modes", self.ic.modes.to_string()),
            ("seed", self.ic.seed.to_string()),
            ("output", self.output.display().to_string()),
            ("diag_stride", self.diag_stride.to_string()),
            ("snapshot_interval", opt(self.snapshot_interval)),
            ("parallel", self.parallel.to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
