//! Replicated key-value store whose versions are tagged with dotted version
//! vectors.
//!
//! A PUT is assigned a fresh dot by the receiving server and keeps the
//! client's context as its vector, so two clients writing through the same
//! server with the same stale context still produce concurrent siblings.

use crate::clock::{
    dvv_context, dvv_event, ClockOrdering, Dot, DottedVersionVector, ReplicaId, VersionVector,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionedValue {
    pub value: Vec<u8>,
    pub clock: DottedVersionVector,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dot {dot} carries two different versions")]
pub struct Corruption {
    pub dot: Dot,
}

/// The concurrent siblings one replica holds for one key, indexed by dot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyState {
    siblings: BTreeMap<Dot, VersionedValue>,
}

impl KeyState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state from arbitrary versions, keeping only the maximal ones.
    pub fn from_versions<I>(versions: I) -> Result<Self, Corruption>
    where
        I: IntoIterator<Item = VersionedValue>,
    {
        let mut pool: BTreeMap<Dot, VersionedValue> = BTreeMap::new();
        for v in versions {
            if let Some(prev) = pool.get(v.clock.dot()) {
                if *prev != v {
                    return Err(Corruption {
                        dot: v.clock.dot().clone(),
                    });
                }
                continue;
            }
            pool.insert(v.clock.dot().clone(), v);
        }
        let dominated: BTreeSet<Dot> = pool
            .values()
            .filter(|x| {
                pool.values()
                    .any(|y| x.clock.compare(&y.clock) == ClockOrdering::HappensBefore)
            })
            .map(|x| x.clock.dot().clone())
            .collect();
        pool.retain(|dot, _| !dominated.contains(dot));
        Ok(KeyState { siblings: pool })
    }

    pub fn len(&self) -> usize {
        self.siblings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.siblings.is_empty()
    }

    /// Siblings in dot order.
    pub fn iter(&self) -> impl Iterator<Item = &VersionedValue> + '_ {
        self.siblings.values()
    }

    pub fn clocks(&self) -> impl Iterator<Item = &DottedVersionVector> + '_ {
        self.siblings.values().map(|v| &v.clock)
    }

    /// Siblings ordered by their clock literal, the order GET and dumps use.
    pub fn canonical(&self) -> Vec<&VersionedValue> {
        let mut out: Vec<(String, &VersionedValue)> = self
            .siblings
            .values()
            .map(|v| (v.clock.to_string(), v))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter().map(|(_, v)| v).collect()
    }

    /// Anti-entropy merge: union by dot, minus everything strictly dominated.
    pub fn sync(&self, other: &KeyState) -> Result<KeyState, Corruption> {
        KeyState::from_versions(self.iter().chain(other.iter()).cloned())
    }

    /// Pairs of siblings that are not mutually concurrent; empty when the
    /// state is well formed.
    pub fn ordered_pairs(&self) -> Vec<(&VersionedValue, &VersionedValue)> {
        let all: Vec<_> = self.siblings.values().collect();
        let mut bad = Vec::new();
        for (i, x) in all.iter().enumerate() {
            for y in &all[i + 1..] {
                if x.clock.compare(&y.clock) != ClockOrdering::Concurrent {
                    bad.push((*x, *y));
                }
            }
        }
        bad
    }
}

/// Result of a PUT: the minted clock and the siblings it replaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteOutcome {
    pub clock: DottedVersionVector,
    pub discarded: Vec<VersionedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaNode {
    id: ReplicaId,
    store: BTreeMap<Vec<u8>, KeyState>,
}

impl ReplicaNode {
    pub fn new(id: ReplicaId) -> Self {
        ReplicaNode {
            id,
            store: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &ReplicaId {
        &self.id
    }

    pub fn key_state(&self, key: &[u8]) -> Option<&KeyState> {
        self.store.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.store.keys().map(Vec::as_slice)
    }

    /// All sibling values in canonical order, plus the context covering them.
    pub fn get(&self, key: &[u8]) -> (Vec<Vec<u8>>, VersionVector) {
        match self.store.get(key) {
            None => (Vec::new(), VersionVector::new()),
            Some(state) => {
                let values = state
                    .canonical()
                    .into_iter()
                    .map(|v| v.value.clone())
                    .collect();
                (values, dvv_context(state.clocks()))
            }
        }
    }

    pub fn put(&mut self, key: &[u8], value: Vec<u8>, ctx: &VersionVector) -> DottedVersionVector {
        self.write(key, value, ctx).clock
    }

    pub fn write(&mut self, key: &[u8], value: Vec<u8>, ctx: &VersionVector) -> WriteOutcome {
        self.write_inner(key, value, ctx, true)
    }

    /// PUT that keeps covered siblings. Only for mutation tests of the
    /// differential harness; it breaks the store's invariants on purpose.
    #[doc(hidden)]
    pub fn write_keeping_covered(
        &mut self,
        key: &[u8],
        value: Vec<u8>,
        ctx: &VersionVector,
    ) -> WriteOutcome {
        self.write_inner(key, value, ctx, false)
    }

    fn write_inner(
        &mut self,
        key: &[u8],
        value: Vec<u8>,
        ctx: &VersionVector,
        discard: bool,
    ) -> WriteOutcome {
        let state = self.store.entry(key.to_vec()).or_default();
        let clock = dvv_event(ctx, &self.id, state.clocks());
        let mut discarded = Vec::new();
        if discard {
            let covered: Vec<Dot> = state
                .siblings
                .values()
                .filter(|v| v.clock.covered_by(ctx))
                .map(|v| v.clock.dot().clone())
                .collect();
            for dot in covered {
                discarded.extend(state.siblings.remove(&dot));
            }
        }
        state.siblings.insert(
            clock.dot().clone(),
            VersionedValue {
                value,
                clock: clock.clone(),
            },
        );
        WriteOutcome { clock, discarded }
    }

    /// Replaces the state for `key` with the merge of this node's and `theirs`.
    pub fn merge_key(&mut self, key: &[u8], theirs: &KeyState) -> Result<(), Corruption> {
        let merged = match self.store.get(key) {
            Some(mine) => mine.sync(theirs)?,
            None => theirs.sync(&KeyState::new())?,
        };
        if merged.is_empty() {
            self.store.remove(key);
        } else {
            self.store.insert(key.to_vec(), merged);
        }
        Ok(())
    }

    /// One line per sibling:
    /// `node=a key=6b31 val=7631 clock=((a,1),{})`.
    pub fn dump(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for (key, state) in &self.store {
            for v in state.canonical() {
                lines.push(format!(
                    "node={} key={} val={} clock={}",
                    self.id,
                    hex(key),
                    hex(&v.value),
                    v.clock
                ));
            }
        }
        lines
    }
}

/// Symmetric full-state exchange between two nodes for `keys`, or for every
/// key either node holds when `keys` is `None`.
pub fn anti_entropy(
    a: &mut ReplicaNode,
    b: &mut ReplicaNode,
    keys: Option<&[Vec<u8>]>,
) -> Result<(), Corruption> {
    let keys: BTreeSet<Vec<u8>> = match keys {
        Some(ks) => ks.iter().cloned().collect(),
        None => a.keys().chain(b.keys()).map(<[u8]>::to_vec).collect(),
    };
    for key in keys {
        let empty = KeyState::new();
        let theirs = b.store.get(&key).unwrap_or(&empty).clone();
        a.merge_key(&key, &theirs)?;
        let merged = a.store.get(&key).cloned().unwrap_or_default();
        if merged.is_empty() {
            b.store.remove(&key);
        } else {
            b.store.insert(key, merged);
        }
    }
    Ok(())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
