//! Laboratory for the three-phase dynamic set-disjointness ("Multiphase")
//! problem and the communication games it reduces to.
//!
//! The crate is organized around five experiment surfaces:
//!
//! - [`instance`]: problem instances, the hard input distribution, and the
//!   `DISJ`/`AND` ground-truth primitives every other module checks against.
//! - [`info`]: exact entropy / mutual-information / KL computation over dense
//!   finite joint distributions, with the standard identities as executable
//!   checks (plus an exact dyadic-rational referee in [`exact`]).
//! - [`cellprobe`]: a dynamic cell-probe simulator that enforces the
//!   semi-adaptive layer discipline (free `S_i` read, then `M`-layer probes,
//!   then `Δ`-layer probes) and ships three concrete data structures with
//!   measured probe counts.
//! - [`nof`]: the 3-party restricted / 4-party / modified 4-party
//!   number-on-forehead protocol framework, visibility auditing, the
//!   data-structure-to-protocol reductions, and exact transcript-distribution
//!   extraction at toy scale.
//! - [`andlab`]: the AND-embedding pipeline, the robust cut-and-paste
//!   verifier, and the adversarial search for low-information low-correlation
//!   AND processes.
//! - [`circuits`]: circuits with arbitrary gates, wire counting, and the
//!   translation from depth-`d` circuits to non-adaptive static data
//!   structures with space `n + r` and query time `(l/r)^d`.
//!
//! Everything here is pure computation over owned data; file formats, CSV
//! reports and the command-line runner live in the companion `multiphase-lab`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod andlab;
pub mod bits;
pub mod cellprobe;
pub mod circuits;
pub mod exact;
pub mod info;
pub mod instance;
pub mod nof;
pub mod rng;

pub use bits::BitVec;
pub use info::JointTable;
pub use instance::MultiphaseInstance;
