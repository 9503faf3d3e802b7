//! Deterministic traces and differential execution.
//!
//! A trace is a header plus a list of GET / PUT / SYNC events. The
//! differential runner replays it against the DVV store, the oracle store,
//! and both version-vector baselines at once, checking the DVV store against
//! the oracle after every event and counting the baselines' mistakes.

mod differential;
mod generate;
mod report;
mod rng;
mod shrink;
mod trace;

pub use differential::{
    run_differential, run_many, Differential, DifferentialFailure, FailureKind, Fault, StoreKind,
    StoreSet,
};
pub use generate::{
    append_syncs, canonical_trace, generate_trace, generate_trace_with, GenerateError, OpMix,
    SessionModel,
};
pub use report::{RunReport, StoreMetrics, Summary};
pub use rng::SplitMix64;
pub use shrink::{shrink_failure, shrink_with};
pub use trace::{Trace, TraceError, TraceEvent, TraceHeader};
