use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Characters that would make a replica id ambiguous inside a clock literal.
const RESERVED: &[char] = &['(', ')', '{', '}', ',', ':', '"', '\\'];

/// Opaque replica (or client) identifier, ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReplicaId(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvalidReplicaId {
    #[error("replica id must not be empty")]
    Empty,
    #[error("replica id {0:?} contains reserved character {1:?}")]
    Reserved(String, char),
}

impl ReplicaId {
    pub fn new(id: &str) -> Result<Self, InvalidReplicaId> {
        if id.is_empty() {
            return Err(InvalidReplicaId::Empty);
        }
        if let Some(c) = id
            .chars()
            .find(|c| RESERVED.contains(c) || c.is_whitespace() || c.is_control())
        {
            return Err(InvalidReplicaId::Reserved(id.to_owned(), c));
        }
        Ok(ReplicaId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether `c` may appear inside an id in a clock literal.
    pub(crate) fn is_id_char(c: char) -> bool {
        !(RESERVED.contains(&c) || c.is_whitespace() || c.is_control())
    }
}

impl FromStr for ReplicaId {
    type Err = InvalidReplicaId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReplicaId::new(s)
    }
}

impl Borrow<str> for ReplicaId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ReplicaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for ReplicaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for ReplicaId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ReplicaId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ReplicaId::new(&s).map_err(serde::de::Error::custom)
    }
}

/// A single update event: the `counter`-th event minted by `replica`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dot {
    pub replica: ReplicaId,
    pub counter: u64,
}

impl Dot {
    /// # Panics
    ///
    /// Panics if `counter` is zero; event counters start at 1.
    pub fn new(replica: ReplicaId, counter: u64) -> Self {
        assert!(counter >= 1, "dot counters start at 1");
        Dot { replica, counter }
    }
}

impl fmt::Display for Dot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.replica, self.counter)
    }
}
