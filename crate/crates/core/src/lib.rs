//! Radio-efficient clock synchronization.
//!
//! Wake-up schedules for duty-cycled radios, the shift algebra behind their
//! lower bounds, and a seeded simulator for a multi-processor protocol that
//! synchronizes every node to the clock of the node with the largest ID.
//!
//! The crate is organized bottom-up:
//!
//! - [`bitstrings`]: wake-up strings, overlap, union and shift packing.
//! - [`detsched`]: the deterministic two-processor schedule.
//! - [`birthday`]: Monte Carlo estimators for the two balls-in-bins events.
//! - [`randsched`]: random schedule matrices and their meeting graphs.
//! - [`netsim`]: radio semantics, back-off and the bounded-drift model.
//! - [`protocol`]: the synchronization pipeline and `n` estimation.
//! - [`harness`]: sweeps, CSV output, config files and acceptance checks.

pub mod birthday;
pub mod bitstrings;
pub mod detsched;
pub mod harness;
pub mod math;
pub mod netsim;
pub mod protocol;
pub mod randsched;
pub mod seed;

pub use bitstrings::{BitSchedule, ShiftAssignment};
pub use seed::SimRng;
