//! IO companion to `multiphase-core`: self-describing text formats for
//! instances, joint tables, circuits, probe logs and transcripts; CSV
//! report emission; and the experiment commands behind the `multiphase`
//! binary.
//!
//! Every emitted artifact is deterministic in `(config, seed)`: reruns
//! produce byte-identical files.

pub mod commands;
pub mod formats;
pub mod reports;

pub use commands::{CommandOutcome, ExitCode};
