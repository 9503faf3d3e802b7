//! Classic version-vector stores used for comparison.
//!
//! Both keep one plain [`VersionVector`] per version and discard any
//! sibling whose vector is `<=` the new one. They differ only in whose
//! entry a PUT increments:
//!
//! - per-server: the receiving server's entry, one counter per server per
//!   key. Two blind writes through one server get ordered vectors even
//!   though neither saw the other, so the first is silently dropped.
//! - per-client: the writing client's entry. Accurate, but the vector grows
//!   with the number of distinct writers.

use crate::clock::{ReplicaId, VersionVector};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VvVersion {
    pub value: Vec<u8>,
    pub clock: VersionVector,
}

/// Version tagged with a vector of server entries.
pub type ServerVvVersion = VvVersion;
/// Version tagged with a vector of client entries.
pub type ClientVvVersion = VvVersion;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VvWrite {
    pub clock: VersionVector,
    pub discarded: Vec<VvVersion>,
}

/// One replica of a version-vector store. The same type serves both
/// baselines; callers stick to one of the two put methods per store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VvReplica {
    id: ReplicaId,
    store: BTreeMap<Vec<u8>, Vec<VvVersion>>,
}

impl VvReplica {
    pub fn new(id: ReplicaId) -> Self {
        VvReplica {
            id,
            store: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> &ReplicaId {
        &self.id
    }

    pub fn siblings(&self, key: &[u8]) -> &[VvVersion] {
        self.store.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn keys(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.store.keys().map(Vec::as_slice)
    }

    /// Sibling values and the join of their vectors.
    pub fn get(&self, key: &[u8]) -> (Vec<Vec<u8>>, VersionVector) {
        let sibs = self.siblings(key);
        let mut ctx = VersionVector::new();
        for v in sibs {
            ctx.join_in_place(&v.clock);
        }
        (sibs.iter().map(|v| v.value.clone()).collect(), ctx)
    }

    pub fn server_vv_put(&mut self, key: &[u8], value: Vec<u8>, ctx: &VersionVector) -> VvWrite {
        let current = self
            .siblings(key)
            .iter()
            .map(|v| v.clock.get(&self.id))
            .max()
            .unwrap_or(0);
        let mut bump = VersionVector::new();
        bump.set(
            self.id.clone(),
            current.checked_add(1).expect("counter overflow"),
        );
        let clock = ctx.join(&bump);
        self.install(key, value, clock)
    }

    pub fn client_vv_put(
        &mut self,
        key: &[u8],
        value: Vec<u8>,
        ctx: &VersionVector,
        client: &ReplicaId,
    ) -> VvWrite {
        let mut bump = VersionVector::new();
        bump.set(
            client.clone(),
            ctx.get(client).checked_add(1).expect("counter overflow"),
        );
        let clock = ctx.join(&bump);
        self.install(key, value, clock)
    }

    fn install(&mut self, key: &[u8], value: Vec<u8>, clock: VersionVector) -> VvWrite {
        let sibs = self.store.entry(key.to_vec()).or_default();
        let (discarded, mut kept): (Vec<_>, Vec<_>) = std::mem::take(sibs)
            .into_iter()
            .partition(|v| v.clock.leq(&clock));
        kept.push(VvVersion {
            value,
            clock: clock.clone(),
        });
        kept.sort();
        *sibs = kept;
        VvWrite { clock, discarded }
    }
}

/// Merges two sibling lists: identical versions collapse, equal clocks keep
/// the smallest value, and strictly dominated vectors are dropped.
pub fn merge_siblings(a: &[VvVersion], b: &[VvVersion]) -> Vec<VvVersion> {
    let mut by_clock: BTreeMap<&VersionVector, &VvVersion> = BTreeMap::new();
    for v in a.iter().chain(b) {
        by_clock
            .entry(&v.clock)
            .and_modify(|cur| {
                if v.value < cur.value {
                    *cur = v;
                }
            })
            .or_insert(v);
    }
    let all: Vec<&VvVersion> = by_clock.into_values().collect();
    let mut out: Vec<VvVersion> = all
        .iter()
        .filter(|x| {
            !all.iter()
                .any(|y| x.clock != y.clock && x.clock.leq(&y.clock))
        })
        .map(|x| (*x).clone())
        .collect();
    out.sort();
    out
}

/// Full-state exchange. Returns, per node, the `(key, version)` pairs that
/// node lost.
pub fn vv_anti_entropy(a: &mut VvReplica, b: &mut VvReplica) -> Vec<(Vec<u8>, VvVersion)> {
    let keys: BTreeSet<Vec<u8>> = a.keys().chain(b.keys()).map(<[u8]>::to_vec).collect();
    let mut lost = Vec::new();
    for key in keys {
        let merged = merge_siblings(a.siblings(&key), b.siblings(&key));
        for node in [&*a, &*b] {
            lost.extend(
                node.siblings(&key)
                    .iter()
                    .filter(|v| !merged.contains(v))
                    .map(|v| (key.clone(), v.clone())),
            );
        }
        a.store.insert(key.clone(), merged.clone());
        b.store.insert(key, merged);
    }
    lost
}
