use super::{ClockOrdering, Dot, ReplicaId, VersionVector};
use std::fmt;

/// A version vector plus one event beyond it.
///
/// Denotes the history `closure(vector) ∪ {dot}`. The dot's counter is
/// strictly above `vector[dot.replica]`, but it need not be the next one:
/// a gap means some events of that replica are concurrent with this clock.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DottedVersionVector {
    dot: Dot,
    vector: VersionVector,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dot {dot} is not beyond vector entry {entry} for its replica")]
pub struct InvalidDvv {
    pub dot: Dot,
    pub entry: u64,
}

impl DottedVersionVector {
    pub fn new(dot: Dot, vector: VersionVector) -> Result<Self, InvalidDvv> {
        let entry = vector.get(&dot.replica);
        if dot.counter <= entry {
            return Err(InvalidDvv { dot, entry });
        }
        Ok(DottedVersionVector { dot, vector })
    }

    pub fn dot(&self) -> &Dot {
        &self.dot
    }

    pub fn vector(&self) -> &VersionVector {
        &self.vector
    }

    /// Whether `dot` belongs to the history of this clock.
    pub fn contains(&self, dot: &Dot) -> bool {
        *dot == self.dot || self.vector.contains(dot)
    }

    /// Whether the downward closure of `vv` lies inside this clock's history.
    ///
    /// Per replica, `1..=vv[r]` must be covered by `1..=vector[r]` alone, or by
    /// that range extended with the dot when the dot sits right after it.
    pub fn includes_vector(&self, vv: &VersionVector) -> bool {
        vv.iter().all(|(r, c)| {
            let mine = self.vector.get(r);
            c <= mine || (*r == self.dot.replica && c == self.dot.counter && c == mine + 1)
        })
    }

    /// `history(self) ⊆ history(other)`.
    pub fn included_in(&self, other: &DottedVersionVector) -> bool {
        other.contains(&self.dot) && other.includes_vector(&self.vector)
    }

    /// `history(self) ⊆ closure(ctx)`; the sibling-discard test used by PUT.
    pub fn covered_by(&self, ctx: &VersionVector) -> bool {
        ctx.contains(&self.dot) && self.vector.leq(ctx)
    }

    pub fn compare(&self, other: &DottedVersionVector) -> ClockOrdering {
        if self == other {
            return ClockOrdering::Equal;
        }
        ClockOrdering::from_inclusions(self.included_in(other), other.included_in(self))
    }

    /// Number of vector entries; the dot is not counted.
    pub fn width(&self) -> usize {
        self.vector.len()
    }

    /// `vector ⊔ {dot.replica: dot.counter}`: the smallest version vector
    /// whose closure contains this clock's history.
    pub fn closure(&self) -> VersionVector {
        let mut vv = self.vector.clone();
        vv.raise(&self.dot.replica, self.dot.counter);
        vv
    }
}

impl fmt::Display for DottedVersionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dot, self.vector)
    }
}

/// Mints the clock for an update received by `server` with client context
/// `ctx`, given the clocks of the key's current siblings at that server.
///
/// The counter is one past anything `server` could have minted for this key
/// as far as the arguments show, so it is fresh without a separate durable
/// counter.
pub fn dvv_event<'a, I>(ctx: &VersionVector, server: &ReplicaId, existing: I) -> DottedVersionVector
where
    I: IntoIterator<Item = &'a DottedVersionVector>,
{
    let mut max = ctx.get(server);
    for clock in existing {
        max = max.max(clock.vector.get(server));
        if clock.dot.replica == *server {
            max = max.max(clock.dot.counter);
        }
    }
    let counter = max.checked_add(1).expect("event counter overflow");
    DottedVersionVector {
        dot: Dot::new(server.clone(), counter),
        vector: ctx.clone(),
    }
}

/// Context handed to a reader: the join of every sibling's closure.
pub fn dvv_context<'a, I>(clocks: I) -> VersionVector
where
    I: IntoIterator<Item = &'a DottedVersionVector>,
{
    let mut ctx = VersionVector::new();
    for clock in clocks {
        ctx.join_in_place(&clock.vector);
        ctx.raise(&clock.dot.replica, clock.dot.counter);
    }
    ctx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rid(s: &str) -> ReplicaId {
        ReplicaId::new(s).unwrap()
    }

    fn vv(entries: &[(&str, u64)]) -> VersionVector {
        entries.iter().map(|&(r, c)| (rid(r), c)).collect()
    }

    fn dvv(r: &str, n: u64, entries: &[(&str, u64)]) -> DottedVersionVector {
        DottedVersionVector::new(Dot::new(rid(r), n), vv(entries)).unwrap()
    }

    #[test]
    fn constructor_enforces_dot_beyond_vector() {
        let err = DottedVersionVector::new(Dot::new(rid("a"), 2), vv(&[("a", 2)])).unwrap_err();
        assert_eq!(err.entry, 2);
        assert!(DottedVersionVector::new(Dot::new(rid("a"), 3), vv(&[("a", 1)])).is_ok());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(
            dvv("a", 1, &[]).compare(&dvv("a", 1, &[])),
            ClockOrdering::Equal
        );
        assert_eq!(
            dvv("a", 1, &[]).compare(&dvv("b", 1, &[("a", 1)])),
            ClockOrdering::HappensBefore
        );
        assert_eq!(
            dvv("b", 1, &[("a", 1)]).compare(&dvv("a", 1, &[])),
            ClockOrdering::HappensAfter
        );
        assert_eq!(
            dvv("a", 2, &[]).compare(&dvv("b", 1, &[("a", 1)])),
            ClockOrdering::Concurrent
        );
    }

    #[test]
    fn dot_right_after_vector_fills_the_closure() {
        // {a1, a2} ⊆ {a1, a2, b1}
        assert_eq!(
            dvv("b", 1, &[("a", 1)]).compare(&dvv("a", 2, &[("a", 1), ("b", 1)])),
            ClockOrdering::HappensBefore
        );
        // ((b,1),{a:2}) = {a1,a2,b1} vs ((a,2),{a:1}) = {a1,a2}
        assert_eq!(
            dvv("b", 1, &[("a", 2)]).compare(&dvv("a", 2, &[("a", 1)])),
            ClockOrdering::HappensAfter
        );
        // a gap stops the dot from filling: {a1,a3} does not contain {a1,a2}
        assert_eq!(
            dvv("b", 1, &[("a", 2)]).compare(&dvv("a", 3, &[("a", 1)])),
            ClockOrdering::Concurrent
        );
    }

    #[test]
    fn covered_examples() {
        assert!(dvv("a", 1, &[]).covered_by(&vv(&[("a", 1)])));
        assert!(!dvv("a", 2, &[]).covered_by(&vv(&[("a", 1)])));
        assert!(dvv("b", 1, &[("a", 1)]).covered_by(&vv(&[("a", 2), ("b", 1)])));
    }

    #[test]
    fn event_examples() {
        assert_eq!(dvv_event(&vv(&[]), &rid("a"), []), dvv("a", 1, &[]));

        let old = dvv("a", 1, &[]);
        let next = dvv_event(&vv(&[("a", 1)]), &rid("a"), [&old]);
        assert_eq!(next, dvv("a", 2, &[("a", 1)]));
        assert_eq!(old.compare(&next), ClockOrdering::HappensBefore);

        let blind = dvv_event(&vv(&[]), &rid("a"), [&old]);
        assert_eq!(blind, dvv("a", 2, &[]));
        assert_eq!(old.compare(&blind), ClockOrdering::Concurrent);
    }

    #[test]
    fn event_looks_at_sibling_vectors_too() {
        let sib = dvv("b", 1, &[("a", 4)]);
        assert_eq!(dvv_event(&vv(&[]), &rid("a"), [&sib]), dvv("a", 5, &[]));
    }

    #[test]
    fn context_examples() {
        assert_eq!(dvv_context([]), vv(&[]));
        assert_eq!(dvv_context([&dvv("a", 1, &[])]), vv(&[("a", 1)]));
        assert_eq!(
            dvv_context([&dvv("a", 1, &[]), &dvv("a", 2, &[])]),
            vv(&[("a", 2)])
        );
    }

    #[test]
    fn display_matches_literal_grammar() {
        assert_eq!(
            dvv("a", 2, &[("b", 3), ("a", 1)]).to_string(),
            "((a,2),{a:1,b:3})"
        );
    }
}
