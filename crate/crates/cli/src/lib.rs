//! Configuration, initial data, checkpoints and the `run`, `sweep` and
//! `verify` drivers of the `epsflow` command.

pub mod config;
pub mod ic;
pub mod runner;
pub mod snapshot;
pub mod verify;

pub use config::{ConfigError, IcKind, IcSpec, RunConfig};
pub use ic::{make_ic, IcError};
pub use runner::{run, sweep, FailureReport, RunError, RunOutcome, SweepRow};
pub use snapshot::{read_snapshot, read_state, write_snapshot, Snapshot, SnapshotError};
pub use verify::{run_suite, Suite, VerifyOptions, VerifyRow};
