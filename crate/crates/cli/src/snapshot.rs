//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "EPSF" | version u32 | nr u64 | nz u64 | r_max f64 | lz f64 | eps f64 | nu f64
//!        | t f64 | step u64 | u1 [nr*nz f64] | omega1 [nr*nz f64] | crc32 u32
//! ```
//!
//! Payloads are row-major with `r` outer. The CRC-32 covers everything between
//! the version word and the checksum. `φ1` is not stored; it is re-solved on
//! load.

use std::io::Write;
use std::path::Path;

use epsflow_core::{
    EllipticError, EllipticWorkspace, GridError, GridSpec, ModelParams, Parity, ScalarField,
    State,
};
use ndarray::Array2;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"EPSF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 * 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported snapshot version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("truncated snapshot: {got} bytes, expected {expected}")]
    Truncated { got: usize, expected: usize },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("invalid grid in snapshot header: {0}")]
    Grid(#[from] GridError),
    #[error("non-finite value in snapshot payload")]
    NonFinite,
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub epsilon: f64,
    pub nu: f64,
    pub t: f64,
    /// steps taken since the start of the run
    pub step: u64,
    pub u1: ScalarField,
    pub omega1: ScalarField,
}

impl Snapshot {
    pub fn new(state: &State, params: &ModelParams, step: u64) -> Self {
        Self {
            grid: *state.grid(),
            epsilon: params.epsilon(),
            nu: params.nu(),
            t: state.t,
            step,
            u1: state.u1.clone(),
            omega1: state.omega1.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.grid.nr() * self.grid.nz();
        let mut buf = Vec::with_capacity(8 + HEADER_LEN + 16 * n + 4);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.grid.nr() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.grid.nz() as u64).to_le_bytes());
        for v in [
            self.grid.r_max(),
            self.grid.lz(),
            self.epsilon,
            self.nu,
            self.t,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&self.step.to_le_bytes());
        for f in [&self.u1, &self.omega1] {
            for v in f.values().iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&buf[8..]);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let min = 8 + HEADER_LEN + 4;
        if bytes.len() < 8 {
            return Err(SnapshotError::Truncated {
                got: bytes.len(),
                expected: min,
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(SnapshotError::Version {
                found: version,
                expected: VERSION,
            });
        }
        if bytes.len() < min {
            return Err(SnapshotError::Truncated {
                got: bytes.len(),
                expected: min,
            });
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap() };
        let nr = u64::from_le_bytes(word(0));
        let nz = u64::from_le_bytes(word(1));
        let expected = (nr as u128)
            .checked_mul(nz as u128)
            .map(|n| 8 + HEADER_LEN as u128 + 16 * n + 4)
            .unwrap_or(u128::MAX);
        let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
        let computed = crc32fast::hash(&bytes[8..bytes.len() - 4]);
        if (bytes.len() as u128) < expected && stored != computed {
            return Err(SnapshotError::Truncated {
                got: bytes.len(),
                expected: expected.min(usize::MAX as u128) as usize,
            });
        }
        if stored != computed {
            return Err(SnapshotError::Checksum { stored, computed });
        }
        if bytes.len() as u128 != expected {
            return Err(SnapshotError::Truncated {
                got: bytes.len(),
                expected: expected.min(usize::MAX as u128) as usize,
            });
        }
        let f = |k: usize| f64::from_le_bytes(word(k));
        let grid = GridSpec::new(nr as usize, nz as usize, f(2), f(3))?;
        let (epsilon, nu, t) = (f(4), f(5), f(6));
        let step = u64::from_le_bytes(word(7));
        let n = grid.nr() * grid.nz();
        let payload = &bytes[8 + HEADER_LEN..bytes.len() - 4];
        let field = |k: usize| -> Result<ScalarField, SnapshotError> {
            let vals: Vec<f64> = payload[8 * n * k..8 * n * (k + 1)]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let arr = Array2::from_shape_vec(grid.shape(), vals).expect("payload length checked");
            ScalarField::from_array(grid, arr, Parity::Even).map_err(|_| SnapshotError::NonFinite)
        };
        Ok(Snapshot {
            grid,
            epsilon,
            nu,
            t,
            step,
            u1: field(0)?,
            omega1: field(1)?,
        })
    }

    /// State with `φ1` solved on `ws`, which must live on the snapshot grid.
    pub fn to_state(&self, ws: &EllipticWorkspace) -> Result<State, SnapshotError> {
        let phi1 = ws.solve(&self.omega1)?;
        Ok(State {
            u1: self.u1.clone(),
            omega1: self.omega1.clone(),
            phi1,
            t: self.t,
        })
    }
}

/// Writes to a temporary sibling first so a crash never leaves a torn file.
pub fn write_snapshot(snap: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(&snap.to_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    Snapshot::from_bytes(&std::fs::read(path)?)
}

/// Reads a snapshot and re-solves `φ1`.
pub fn read_state(path: &Path) -> Result<(Snapshot, State), SnapshotError> {
    let snap = read_snapshot(path)?;
    let ws = EllipticWorkspace::new(snap.grid)?;
    let state = snap.to_state(&ws)?;
    Ok((snap, state))
}
