use super::{Dot, ReplicaId};
use std::collections::BTreeMap;
use std::fmt;

/// Mapping from replica to the highest contiguous event counter seen from it.
///
/// Zero entries are never stored, so two vectors denoting the same history
/// are always structurally equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VersionVector {
    entries: BTreeMap<ReplicaId, u64>,
}

impl VersionVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counter for `replica`, 0 when absent.
    pub fn get(&self, replica: &ReplicaId) -> u64 {
        self.entries.get(replica).copied().unwrap_or(0)
    }

    /// Sets the entry for `replica`; a zero counter removes it.
    pub fn set(&mut self, replica: ReplicaId, counter: u64) {
        if counter == 0 {
            self.entries.remove(&replica);
        } else {
            self.entries.insert(replica, counter);
        }
    }

    /// Raises the entry for `replica` to at least `counter`.
    pub fn raise(&mut self, replica: &ReplicaId, counter: u64) {
        if counter == 0 {
            return;
        }
        match self.entries.get_mut(replica) {
            Some(c) => *c = (*c).max(counter),
            None => {
                self.entries.insert(replica.clone(), counter);
            }
        }
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &VersionVector) -> VersionVector {
        let mut out = self.clone();
        out.join_in_place(other);
        out
    }

    pub fn join_in_place(&mut self, other: &VersionVector) {
        for (r, &c) in &other.entries {
            self.raise(r, c);
        }
    }

    /// `self[r] <= other[r]` for every replica.
    pub fn leq(&self, other: &VersionVector) -> bool {
        self.entries.len() <= other.entries.len()
            && self.entries.iter().all(|(r, &c)| c <= other.get(r))
    }

    /// Whether `dot` lies in the downward closure this vector denotes.
    pub fn contains(&self, dot: &Dot) -> bool {
        dot.counter <= self.get(&dot.replica)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in replica order.
    pub fn iter(&self) -> impl Iterator<Item = (&ReplicaId, u64)> + '_ {
        self.entries.iter().map(|(r, &c)| (r, c))
    }
}

impl FromIterator<(ReplicaId, u64)> for VersionVector {
    fn from_iter<I: IntoIterator<Item = (ReplicaId, u64)>>(iter: I) -> Self {
        let mut vv = VersionVector::new();
        for (r, c) in iter {
            vv.raise(&r, c);
        }
        vv
    }
}

impl fmt::Display for VersionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (r, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}:{c}")?;
        }
        f.write_str("}")
    }
}
