//! Causality tracking with dotted version vectors.
//!
//! - [`clock`]: dots, version vectors, dotted version vectors, and literals.
//! - [`oracle`]: explicit causal-history sets and a reference store that
//!   carries them, used as ground truth.
//! - [`kvstore`]: a replicated key-value store tagging versions with DVVs.
//! - [`baselines`]: the same store with per-server or per-client vectors.
//! - [`simulator`]: trace generation and differential execution.

pub mod baselines;
pub mod clock;
pub mod kvstore;
pub mod oracle;
pub mod simulator;

pub use clock::{ClockOrdering, Dot, DottedVersionVector, ReplicaId, VersionVector};
