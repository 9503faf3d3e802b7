//! Clock types and their algebra.
//!
//! A [`VersionVector`] encodes a downward-closed causal history: every event
//! `(r, k)` with `1 <= k <= vv[r]`. A [`DottedVersionVector`] adds one explicit
//! event (the [`Dot`]) on top of such a history, which lets a server tag an
//! update with an identifier that is not implied by the vector, even when the
//! vector already knows about earlier events of the same server.
//!
//! All comparisons in this module are exact with respect to the history sets
//! the clocks denote; the oracle module checks that claim independently.

mod dot;
mod dvv;
mod literal;
mod vv;

pub use dot::{Dot, InvalidReplicaId, ReplicaId};
pub use dvv::{dvv_context, dvv_event, DottedVersionVector, InvalidDvv};
pub use literal::{parse_clock, parse_dvv, parse_vv, Clock, ParseError};
pub use vv::VersionVector;

use std::fmt;

/// Outcome of comparing two causal histories under set inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockOrdering {
    Equal,
    HappensBefore,
    HappensAfter,
    Concurrent,
}

impl ClockOrdering {
    /// Builds the ordering from the two inclusion tests `a ⊆ b` and `b ⊆ a`.
    pub fn from_inclusions(a_in_b: bool, b_in_a: bool) -> Self {
        match (a_in_b, b_in_a) {
            (true, true) => ClockOrdering::Equal,
            (true, false) => ClockOrdering::HappensBefore,
            (false, true) => ClockOrdering::HappensAfter,
            (false, false) => ClockOrdering::Concurrent,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            ClockOrdering::HappensBefore => ClockOrdering::HappensAfter,
            ClockOrdering::HappensAfter => ClockOrdering::HappensBefore,
            other => other,
        }
    }

    /// The word printed by the `compare` command.
    pub fn label(self) -> &'static str {
        match self {
            ClockOrdering::Equal => "EQUAL",
            ClockOrdering::HappensBefore => "BEFORE",
            ClockOrdering::HappensAfter => "AFTER",
            ClockOrdering::Concurrent => "CONCURRENT",
        }
    }
}

impl fmt::Display for ClockOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
