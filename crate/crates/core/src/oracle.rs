//! Ground-truth causality: explicit causal-history sets.
//!
//! Nothing here uses the comparison rules of [`crate::clock`]; clocks are
//! only expanded into the event sets they denote. The [`OracleStore`] replays
//! traces carrying one uncompressed history per version, so the efficient
//! stores can be checked against it event by event.

use crate::clock::{ClockOrdering, Dot, DottedVersionVector, ReplicaId, VersionVector};
use crate::simulator::{TraceError, TraceEvent, TraceHeader};
use std::collections::{BTreeMap, BTreeSet};

/// A finite set of events. Unlike a version vector it may have gaps.
pub type CausalHistory = BTreeSet<Dot>;

pub fn history_of_vv(vv: &VersionVector) -> CausalHistory {
    vv.iter()
        .flat_map(|(r, n)| (1..=n).map(move |k| Dot::new(r.clone(), k)))
        .collect()
}

pub fn history_of_dvv(clock: &DottedVersionVector) -> CausalHistory {
    let mut h = history_of_vv(clock.vector());
    h.insert(clock.dot().clone());
    h
}

pub fn oracle_compare(a: &CausalHistory, b: &CausalHistory) -> ClockOrdering {
    let a_in_b = a.len() <= b.len() && a.is_subset(b);
    let b_in_a = b.len() <= a.len() && b.is_subset(a);
    ClockOrdering::from_inclusions(a_in_b, b_in_a)
}

/// One stored version in the reference store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVersion {
    pub value: Vec<u8>,
    /// Trace position of the put that created this version.
    pub origin: usize,
    /// The event minted for this version; always a member of `history`.
    pub dot: Dot,
    pub history: CausalHistory,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("event {index}: version from put {origin} dropped while its history is not covered")]
    LostUpdate { index: usize, origin: usize },
    #[error("event {index}: version from put {origin} has two different histories")]
    Corruption { index: usize, origin: usize },
}

/// What one trace event did to the reference store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleStep {
    Read {
        siblings: Vec<OracleVersion>,
        context: CausalHistory,
    },
    Wrote {
        version: OracleVersion,
        discarded: Vec<OracleVersion>,
    },
    Synced {
        removed: Vec<OracleVersion>,
    },
}

type KeyVersions = Vec<OracleVersion>;

/// Reference replicated store. Client contexts are exact history unions,
/// never closures.
#[derive(Debug, Clone)]
pub struct OracleStore {
    header: TraceHeader,
    nodes: BTreeMap<ReplicaId, BTreeMap<Vec<u8>, KeyVersions>>,
    contexts: BTreeMap<(ReplicaId, Vec<u8>), CausalHistory>,
}

impl OracleStore {
    pub fn new(header: TraceHeader) -> Self {
        let nodes = header
            .servers
            .iter()
            .map(|s| (s.clone(), BTreeMap::new()))
            .collect();
        OracleStore {
            header,
            nodes,
            contexts: BTreeMap::new(),
        }
    }

    pub fn siblings(&self, node: &ReplicaId, key: &[u8]) -> &[OracleVersion] {
        self.nodes
            .get(node)
            .and_then(|m| m.get(key))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn keys(&self, node: &ReplicaId) -> impl Iterator<Item = &[u8]> + '_ {
        self.nodes
            .get(node)
            .into_iter()
            .flat_map(|m| m.keys().map(Vec::as_slice))
    }

    /// Last context `client` read for `key`; empty if it never read.
    pub fn context(&self, client: &ReplicaId, key: &[u8]) -> CausalHistory {
        self.contexts
            .get(&(client.clone(), key.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn step(&mut self, index: usize, event: &TraceEvent) -> Result<OracleStep, OracleError> {
        self.header.check_event(index, event)?;
        match event {
            TraceEvent::Get { client, node, key } => {
                let siblings = self.siblings(node, key.as_bytes()).to_vec();
                let context: CausalHistory = siblings
                    .iter()
                    .flat_map(|v| v.history.iter().cloned())
                    .collect();
                self.contexts
                    .insert((client.clone(), key.as_bytes().to_vec()), context.clone());
                Ok(OracleStep::Read { siblings, context })
            }
            TraceEvent::Put {
                client,
                node,
                key,
                value,
            } => {
                let ctx = self.context(client, key.as_bytes());
                let versions = self
                    .nodes
                    .get_mut(node)
                    .expect("checked membership")
                    .entry(key.as_bytes().to_vec())
                    .or_default();

                let mut top = 0;
                for d in ctx
                    .iter()
                    .chain(versions.iter().flat_map(|v| v.history.iter()))
                {
                    if d.replica == *node {
                        top = top.max(d.counter);
                    }
                }
                let dot = Dot::new(node.clone(), top.checked_add(1).expect("counter overflow"));
                let mut history = ctx.clone();
                history.insert(dot.clone());

                let (discarded, kept): (Vec<_>, Vec<_>) = std::mem::take(versions)
                    .into_iter()
                    .partition(|v| v.history.is_subset(&ctx));
                for v in &discarded {
                    if !v.history.is_subset(&history) {
                        return Err(OracleError::LostUpdate {
                            index,
                            origin: v.origin,
                        });
                    }
                }
                let version = OracleVersion {
                    value: value.as_bytes().to_vec(),
                    origin: index,
                    dot,
                    history,
                };
                *versions = kept;
                versions.push(version.clone());
                Ok(OracleStep::Wrote { version, discarded })
            }
            TraceEvent::Sync { a, b } => {
                let mut keys: BTreeSet<Vec<u8>> = BTreeSet::new();
                keys.extend(self.keys(a).map(<[u8]>::to_vec));
                keys.extend(self.keys(b).map(<[u8]>::to_vec));
                let mut removed = Vec::new();
                for key in keys {
                    let mut pool: BTreeMap<usize, OracleVersion> = BTreeMap::new();
                    for v in self.siblings(a, &key).iter().chain(self.siblings(b, &key)) {
                        if let Some(prev) = pool.get(&v.origin) {
                            if prev != v {
                                return Err(OracleError::Corruption {
                                    index,
                                    origin: v.origin,
                                });
                            }
                        }
                        pool.insert(v.origin, v.clone());
                    }
                    let all: Vec<OracleVersion> = pool.into_values().collect();
                    let (survivors, dropped): (Vec<_>, Vec<_>) =
                        all.iter().cloned().partition(|v| {
                            !all.iter().any(|w| {
                                w.origin != v.origin
                                    && oracle_compare(&v.history, &w.history)
                                        == ClockOrdering::HappensBefore
                            })
                        });
                    for v in &dropped {
                        if !survivors.iter().any(|w| v.history.is_subset(&w.history)) {
                            return Err(OracleError::LostUpdate {
                                index,
                                origin: v.origin,
                            });
                        }
                    }
                    // Versions lost by either side, counted once per node.
                    for node in [a, b] {
                        for v in self.siblings(node, &key) {
                            if dropped.iter().any(|d| d.origin == v.origin) {
                                removed.push(v.clone());
                            }
                        }
                    }
                    for node in [a, b] {
                        self.nodes
                            .get_mut(node)
                            .expect("checked membership")
                            .insert(key.clone(), survivors.clone());
                    }
                }
                Ok(OracleStep::Synced { removed })
            }
        }
    }
}
