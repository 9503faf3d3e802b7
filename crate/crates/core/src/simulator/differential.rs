use super::report::{RunReport, StoreMetrics, Summary};
use super::trace::{Trace, TraceError, TraceEvent, TraceHeader};
use crate::baselines::{vv_anti_entropy, VvReplica, VvWrite};
use crate::clock::{ClockOrdering, Dot, DottedVersionVector, ReplicaId, VersionVector};
use crate::kvstore::{anti_entropy, ReplicaNode};
use crate::oracle::{
    history_of_dvv, history_of_vv, oracle_compare, CausalHistory, OracleError, OracleStep,
    OracleStore,
};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreKind {
    Dvv,
    Oracle,
    ServerVv,
    ClientVv,
}

impl StoreKind {
    pub const ALL: [StoreKind; 4] = [
        StoreKind::Dvv,
        StoreKind::Oracle,
        StoreKind::ServerVv,
        StoreKind::ClientVv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StoreKind::Dvv => "dvv",
            StoreKind::Oracle => "oracle",
            StoreKind::ServerVv => "server-vv",
            StoreKind::ClientVv => "client-vv",
        }
    }

    pub fn parse(s: &str) -> Option<StoreKind> {
        StoreKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Which stores a run drives. The oracle always runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreSet {
    pub dvv: bool,
    pub server_vv: bool,
    pub client_vv: bool,
}

impl Default for StoreSet {
    fn default() -> Self {
        StoreSet {
            dvv: true,
            server_vv: true,
            client_vv: true,
        }
    }
}

impl StoreSet {
    /// Parses a comma-separated list such as `dvv,oracle,server-vv`.
    pub fn parse_list(list: &str) -> Result<StoreSet, String> {
        let mut set = StoreSet {
            dvv: false,
            server_vv: false,
            client_vv: false,
        };
        let mut oracle = false;
        for name in list.split(',').map(str::trim) {
            match StoreKind::parse(name) {
                Some(StoreKind::Dvv) => set.dvv = true,
                Some(StoreKind::Oracle) => oracle = true,
                Some(StoreKind::ServerVv) => set.server_vv = true,
                Some(StoreKind::ClientVv) => set.client_vv = true,
                None => return Err(format!("unknown store '{name}'")),
            }
        }
        if !oracle {
            return Err("the oracle store cannot be disabled".into());
        }
        Ok(set)
    }

    pub fn contains(&self, kind: StoreKind) -> bool {
        match kind {
            StoreKind::Dvv => self.dvv,
            StoreKind::Oracle => true,
            StoreKind::ServerVv => self.server_vv,
            StoreKind::ClientVv => self.client_vv,
        }
    }
}

/// Deliberate bugs injected into the DVV store to test the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// PUT keeps siblings its context covers.
    SkipPutDiscard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Trace,
    Oracle,
    Corruption,
    ContextMismatch,
    HistoryMismatch,
    DuplicateDot,
    OrderingDisagreement,
    SiblingMismatch,
    SiblingsNotConcurrent,
    LostUpdate,
    WidthBound,
    DotGap,
}

/// First mismatch between the DVV store and the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialFailure {
    pub index: usize,
    pub kind: FailureKind,
    pub detail: String,
    /// Offending clocks, as literals, when the failure involves a pair.
    pub pair: Option<(String, String)>,
}

impl fmt::Display for DifferentialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: {:?}: {}", self.index, self.kind, self.detail)?;
        if let Some((a, b)) = &self.pair {
            write!(f, " [{a} vs {b}]")?;
        }
        Ok(())
    }
}

impl std::error::Error for DifferentialFailure {}

fn fail<T>(
    index: usize,
    kind: FailureKind,
    detail: impl Into<String>,
) -> Result<T, DifferentialFailure> {
    Err(DifferentialFailure {
        index,
        kind,
        detail: detail.into(),
        pair: None,
    })
}

/// Every version ever written, with its oracle history and the clock each
/// store assigned to it.
#[derive(Debug, Clone)]
struct Produced {
    key: String,
    history: CausalHistory,
    dvv: Option<DottedVersionVector>,
    server: Option<VersionVector>,
    client: Option<VersionVector>,
}

type SessionKey = (ReplicaId, String);

/// Step-by-step differential execution of one trace.
#[derive(Debug, Clone)]
pub struct Differential {
    header: TraceHeader,
    stores: StoreSet,
    fault: Option<Fault>,
    oracle: OracleStore,
    dvv: BTreeMap<ReplicaId, ReplicaNode>,
    server_vv: BTreeMap<ReplicaId, VvReplica>,
    client_vv: BTreeMap<ReplicaId, VvReplica>,
    dvv_ctx: HashMap<SessionKey, VersionVector>,
    server_ctx: HashMap<SessionKey, VersionVector>,
    client_ctx: HashMap<SessionKey, VersionVector>,
    produced: BTreeMap<usize, Produced>,
    /// Dots are unique per key, not across keys.
    origin_by_dot: HashMap<(Vec<u8>, Dot), usize>,
    origin_by_value: HashMap<Vec<u8>, usize>,
    minted: BTreeMap<(String, ReplicaId), Vec<u64>>,
    writers: BTreeMap<String, BTreeSet<ReplicaId>>,
    metrics: BTreeMap<StoreKind, StoreMetrics>,
}

impl Differential {
    pub fn new(header: TraceHeader, stores: StoreSet) -> Self {
        let nodes = |f: fn(ReplicaId) -> _| {
            header
                .servers
                .iter()
                .map(|s| (s.clone(), f(s.clone())))
                .collect()
        };
        let dvv: BTreeMap<_, _> = header
            .servers
            .iter()
            .map(|s| (s.clone(), ReplicaNode::new(s.clone())))
            .collect();
        let metrics = StoreKind::ALL
            .into_iter()
            .filter(|k| stores.contains(*k))
            .map(|k| (k, StoreMetrics::default()))
            .collect();
        Differential {
            oracle: OracleStore::new(header.clone()),
            dvv,
            server_vv: nodes(VvReplica::new),
            client_vv: nodes(VvReplica::new),
            header,
            stores,
            fault: None,
            dvv_ctx: HashMap::new(),
            server_ctx: HashMap::new(),
            client_ctx: HashMap::new(),
            produced: BTreeMap::new(),
            origin_by_dot: HashMap::new(),
            origin_by_value: HashMap::new(),
            minted: BTreeMap::new(),
            writers: BTreeMap::new(),
            metrics,
        }
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    /// Runs a whole trace and returns its report.
    pub fn run(
        trace: &Trace,
        stores: StoreSet,
        fault: Option<Fault>,
    ) -> Result<RunReport, DifferentialFailure> {
        if let Err(e) = trace.validate() {
            let index = match &e {
                TraceError::UnknownId { index, .. } | TraceError::DuplicateValue { index, .. } => {
                    *index
                }
                _ => 0,
            };
            return fail(index, FailureKind::Trace, e.to_string());
        }
        let mut diff = Differential::new(trace.header.clone(), stores);
        diff.fault = fault;
        for (i, e) in trace.events.iter().enumerate() {
            diff.apply(i, e)?;
        }
        diff.finish()
    }

    pub fn dvv_node(&self, id: &ReplicaId) -> Option<&ReplicaNode> {
        self.dvv.get(id)
    }

    pub fn dvv_nodes(&self) -> impl Iterator<Item = &ReplicaNode> + '_ {
        self.dvv.values()
    }

    pub fn server_vv_node(&self, id: &ReplicaId) -> Option<&VvReplica> {
        self.server_vv.get(id)
    }

    pub fn client_vv_node(&self, id: &ReplicaId) -> Option<&VvReplica> {
        self.client_vv.get(id)
    }

    pub fn oracle(&self) -> &OracleStore {
        &self.oracle
    }

    /// Counters of the dots minted so far, per (key, replica), in mint order.
    pub fn minted(&self) -> &BTreeMap<(String, ReplicaId), Vec<u64>> {
        &self.minted
    }

    pub fn metrics(&self, kind: StoreKind) -> Option<&StoreMetrics> {
        self.metrics.get(&kind)
    }

    /// Final checks that need the whole run, then the report.
    pub fn finish(self) -> Result<RunReport, DifferentialFailure> {
        let last = self.header.op_count.saturating_sub(1) as usize;
        for ((key, replica), counters) in &self.minted {
            let mut sorted = counters.clone();
            sorted.sort_unstable();
            if sorted.iter().enumerate().any(|(i, &c)| c != i as u64 + 1) {
                return fail(
                    last,
                    FailureKind::DotGap,
                    format!("dots minted by {replica} for key {key} are {sorted:?}"),
                );
            }
        }
        Ok(RunReport {
            seed: self.header.seed,
            servers: self.header.servers.len(),
            clients: self.header.clients.len(),
            keys: self.header.keys.len(),
            op_count: self.header.op_count,
            stores: self
                .metrics
                .into_iter()
                .map(|(k, m)| (k.name().to_owned(), m))
                .collect(),
        })
    }

    fn metric(&mut self, kind: StoreKind) -> &mut StoreMetrics {
        self.metrics.entry(kind).or_default()
    }

    fn history(&self, origin: usize) -> &CausalHistory {
        &self.produced[&origin].history
    }

    pub fn apply(&mut self, index: usize, event: &TraceEvent) -> Result<(), DifferentialFailure> {
        let step = self
            .oracle
            .step(index, event)
            .map_err(|e| DifferentialFailure {
                index,
                kind: match e {
                    OracleError::Trace(_) => FailureKind::Trace,
                    OracleError::LostUpdate { .. } => FailureKind::LostUpdate,
                    OracleError::Corruption { .. } => FailureKind::Corruption,
                },
                detail: e.to_string(),
                pair: None,
            })?;
        let touched = match (event, step) {
            (TraceEvent::Get { client, node, key }, OracleStep::Read { context, .. }) => {
                self.get(index, client, node, key, &context)?;
                vec![(node.clone(), key.as_bytes().to_vec())]
            }
            (
                TraceEvent::Put {
                    client,
                    node,
                    key,
                    value,
                },
                OracleStep::Wrote { version, .. },
            ) => {
                self.put(
                    index,
                    client,
                    node,
                    key,
                    value,
                    version.origin,
                    version.history,
                )?;
                vec![(node.clone(), key.as_bytes().to_vec())]
            }
            (TraceEvent::Sync { a, b }, OracleStep::Synced { .. }) => self.sync(index, a, b)?,
            _ => unreachable!("oracle step matches event"),
        };
        for (node, key) in touched {
            self.check_siblings(index, &node, &key)?;
        }
        Ok(())
    }

    fn get(
        &mut self,
        index: usize,
        client: &ReplicaId,
        node: &ReplicaId,
        key: &str,
        oracle_ctx: &CausalHistory,
    ) -> Result<(), DifferentialFailure> {
        let session = (client.clone(), key.to_owned());
        let k = key.as_bytes();
        if self.stores.dvv {
            let (_, ctx) = self.dvv[node].get(k);
            if history_of_vv(&ctx) != *oracle_ctx {
                return fail(
                    index,
                    FailureKind::ContextMismatch,
                    format!("context {ctx} does not denote the observed history {oracle_ctx:?}"),
                );
            }
            self.dvv_ctx.insert(session.clone(), ctx);
        }
        if self.stores.server_vv {
            let (_, ctx) = self.server_vv[node].get(k);
            self.server_ctx.insert(session.clone(), ctx);
        }
        if self.stores.client_vv {
            let (_, ctx) = self.client_vv[node].get(k);
            self.client_ctx.insert(session, ctx);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn put(
        &mut self,
        index: usize,
        client: &ReplicaId,
        node: &ReplicaId,
        key: &str,
        value: &str,
        origin: usize,
        history: CausalHistory,
    ) -> Result<(), DifferentialFailure> {
        let session = (client.clone(), key.to_owned());
        let k = key.as_bytes();
        let v = value.as_bytes().to_vec();
        self.origin_by_value.insert(v.clone(), origin);
        self.metric(StoreKind::Oracle).record_clock(history.len());
        let writers = self.writers.entry(key.to_owned()).or_default();
        writers.insert(node.clone());
        let writer_count = writers.len();

        let mut produced = Produced {
            key: key.to_owned(),
            history,
            dvv: None,
            server: None,
            client: None,
        };

        if self.stores.dvv {
            let ctx = self.dvv_ctx.get(&session).cloned().unwrap_or_default();
            let replica = self.dvv.get_mut(node).expect("known node");
            let outcome = match self.fault {
                Some(Fault::SkipPutDiscard) => replica.write_keeping_covered(k, v.clone(), &ctx),
                None => replica.write(k, v.clone(), &ctx),
            };
            let clock = outcome.clock;
            if history_of_dvv(&clock) != produced.history {
                return fail(
                    index,
                    FailureKind::HistoryMismatch,
                    format!(
                        "clock {clock} does not denote history {:?}",
                        produced.history
                    ),
                );
            }
            if self
                .origin_by_dot
                .insert((k.to_vec(), clock.dot().clone()), origin)
                .is_some()
            {
                return fail(
                    index,
                    FailureKind::DuplicateDot,
                    format!("dot {} minted twice", clock.dot()),
                );
            }
            if clock.width() > writer_count {
                return fail(
                    index,
                    FailureKind::WidthBound,
                    format!(
                        "clock {clock} is wider than the {writer_count} servers that wrote {key}"
                    ),
                );
            }
            self.minted
                .entry((key.to_owned(), node.clone()))
                .or_default()
                .push(clock.dot().counter);
            self.metric(StoreKind::Dvv).record_clock(clock.width());
            for d in &outcome.discarded {
                let old = self.origin_by_dot[&(k.to_vec(), d.clock.dot().clone())];
                if !self.history(old).is_subset(&produced.history) {
                    self.metric(StoreKind::Dvv).false_dominance_count += 1;
                    return Err(DifferentialFailure {
                        index,
                        kind: FailureKind::LostUpdate,
                        detail: format!(
                            "put discarded a version from event {old} it did not cover"
                        ),
                        pair: Some((d.clock.to_string(), clock.to_string())),
                    });
                }
            }
            produced.dvv = Some(clock);
        }

        if self.stores.server_vv {
            let ctx = self.server_ctx.get(&session).cloned().unwrap_or_default();
            let w = self
                .server_vv
                .get_mut(node)
                .expect("known node")
                .server_vv_put(k, v.clone(), &ctx);
            self.vv_write_incidents(StoreKind::ServerVv, node, k, &w, &produced.history);
            produced.server = Some(w.clock);
        }
        if self.stores.client_vv {
            let ctx = self.client_ctx.get(&session).cloned().unwrap_or_default();
            let w = self
                .client_vv
                .get_mut(node)
                .expect("known node")
                .client_vv_put(k, v, &ctx, client);
            self.vv_write_incidents(StoreKind::ClientVv, node, k, &w, &produced.history);
            produced.client = Some(w.clock);
        }

        self.compare_with_earlier(index, &produced)?;
        self.produced.insert(origin, produced);
        Ok(())
    }

    fn vv_write_incidents(
        &mut self,
        kind: StoreKind,
        node: &ReplicaId,
        key: &[u8],
        w: &VvWrite,
        history: &CausalHistory,
    ) {
        let mut dominance = 0;
        for d in &w.discarded {
            if !self
                .history(self.origin_by_value[&d.value])
                .is_subset(history)
            {
                dominance += 1;
            }
        }
        let replica = match kind {
            StoreKind::ServerVv => &self.server_vv[node],
            _ => &self.client_vv[node],
        };
        let mut concurrency = 0;
        for s in replica.siblings(key) {
            if s.clock != w.clock {
                let h = self.history(self.origin_by_value[&s.value]);
                if h.is_subset(history) {
                    concurrency += 1;
                }
            }
        }
        let m = self.metric(kind);
        m.record_clock(w.clock.len());
        m.false_dominance_count += dominance;
        m.false_concurrency_count += concurrency;
    }

    /// Compares the new version against every earlier version of the same
    /// key, in every store.
    fn compare_with_earlier(
        &mut self,
        index: usize,
        new: &Produced,
    ) -> Result<(), DifferentialFailure> {
        let vv_order = |a: &VersionVector, b: &VersionVector| {
            ClockOrdering::from_inclusions(a.leq(b), b.leq(a))
        };
        let mut server_bad = 0;
        let mut client_bad = 0;
        for prev in self.produced.values().filter(|p| p.key == new.key) {
            let truth = oracle_compare(&prev.history, &new.history);
            if let (Some(p), Some(n)) = (&prev.dvv, &new.dvv) {
                let got = p.compare(n);
                if got != truth {
                    self.metrics
                        .entry(StoreKind::Dvv)
                        .or_default()
                        .ordering_disagreements_vs_oracle += 1;
                    return Err(DifferentialFailure {
                        index,
                        kind: FailureKind::OrderingDisagreement,
                        detail: format!("dvv says {got:?}, histories say {truth:?}"),
                        pair: Some((p.to_string(), n.to_string())),
                    });
                }
            }
            if let (Some(p), Some(n)) = (&prev.server, &new.server) {
                server_bad += u64::from(vv_order(p, n) != truth);
            }
            if let (Some(p), Some(n)) = (&prev.client, &new.client) {
                client_bad += u64::from(vv_order(p, n) != truth);
            }
        }
        if self.stores.server_vv {
            self.metric(StoreKind::ServerVv)
                .ordering_disagreements_vs_oracle += server_bad;
        }
        if self.stores.client_vv {
            self.metric(StoreKind::ClientVv)
                .ordering_disagreements_vs_oracle += client_bad;
        }
        Ok(())
    }

    fn sync(
        &mut self,
        index: usize,
        a: &ReplicaId,
        b: &ReplicaId,
    ) -> Result<Vec<(ReplicaId, Vec<u8>)>, DifferentialFailure> {
        let mut keys: BTreeSet<Vec<u8>> = BTreeSet::new();
        keys.extend(self.oracle.keys(a).map(<[u8]>::to_vec));
        keys.extend(self.oracle.keys(b).map(<[u8]>::to_vec));

        if self.stores.dvv && a != b {
            let before: Vec<(Vec<u8>, DottedVersionVector)> = [a, b]
                .iter()
                .flat_map(|n| {
                    let node = &self.dvv[*n];
                    node.keys().flat_map(move |k| {
                        node.key_state(k)
                            .into_iter()
                            .flat_map(move |s| s.clocks().map(move |c| (k.to_vec(), c.clone())))
                    })
                })
                .collect();
            let mut na = self.dvv.remove(a).expect("known node");
            let mut nb = self.dvv.remove(b).expect("known node");
            let result = anti_entropy(&mut na, &mut nb, None);
            self.dvv.insert(a.clone(), na);
            self.dvv.insert(b.clone(), nb);
            if let Err(e) = result {
                return fail(index, FailureKind::Corruption, e.to_string());
            }
            for (key, clock) in before {
                let survivors = self.dvv[a].key_state(&key);
                let kept = survivors.is_some_and(|s| s.clocks().any(|c| c == &clock));
                if kept {
                    continue;
                }
                let origin_of =
                    |c: &DottedVersionVector| self.origin_by_dot[&(key.clone(), c.dot().clone())];
                let h = self.history(origin_of(&clock));
                let covered = survivors
                    .is_some_and(|s| s.clocks().any(|c| h.is_subset(self.history(origin_of(c)))));
                if !covered {
                    self.metric(StoreKind::Dvv).false_dominance_count += 1;
                    return Err(DifferentialFailure {
                        index,
                        kind: FailureKind::LostUpdate,
                        detail: "sync dropped a version no survivor covers".into(),
                        pair: Some((clock.to_string(), String::new())),
                    });
                }
            }
        }

        for kind in [StoreKind::ServerVv, StoreKind::ClientVv] {
            if !self.stores.contains(kind) || a == b {
                continue;
            }
            let map = match kind {
                StoreKind::ServerVv => &mut self.server_vv,
                _ => &mut self.client_vv,
            };
            let mut na = map.remove(a).expect("known node");
            let mut nb = map.remove(b).expect("known node");
            let lost = vv_anti_entropy(&mut na, &mut nb);
            map.insert(a.clone(), na);
            map.insert(b.clone(), nb);
            let replica = match kind {
                StoreKind::ServerVv => &self.server_vv[a],
                _ => &self.client_vv[a],
            };

            let mut dominance = 0;
            for (key, v) in &lost {
                let h = self.history(self.origin_by_value[&v.value]);
                let covered = replica
                    .siblings(key)
                    .iter()
                    .any(|s| h.is_subset(self.history(self.origin_by_value[&s.value])));
                dominance += u64::from(!covered);
            }
            let mut concurrency = 0;
            for key in &keys {
                let sibs = replica.siblings(key);
                for (i, x) in sibs.iter().enumerate() {
                    for y in &sibs[i + 1..] {
                        let hx = self.history(self.origin_by_value[&x.value]);
                        let hy = self.history(self.origin_by_value[&y.value]);
                        concurrency +=
                            u64::from(oracle_compare(hx, hy) != ClockOrdering::Concurrent);
                    }
                }
            }
            let m = self.metric(kind);
            m.false_dominance_count += dominance;
            m.false_concurrency_count += concurrency;
        }

        let mut touched = Vec::new();
        for key in keys {
            touched.push((a.clone(), key.clone()));
            if a != b {
                touched.push((b.clone(), key));
            }
        }
        Ok(touched)
    }

    /// The DVV store must hold exactly the oracle's versions, pairwise
    /// concurrent. Also samples sibling counts for every store.
    fn check_siblings(
        &mut self,
        index: usize,
        node: &ReplicaId,
        key: &[u8],
    ) -> Result<(), DifferentialFailure> {
        let expected: BTreeSet<usize> = self
            .oracle
            .siblings(node, key)
            .iter()
            .map(|v| v.origin)
            .collect();
        self.metric(StoreKind::Oracle)
            .record_siblings(expected.len());

        if self.stores.dvv {
            let state = self.dvv[node].key_state(key);
            let mut got = BTreeSet::new();
            if let Some(state) = state {
                for v in state.iter() {
                    let origin = self.origin_by_dot[&(key.to_vec(), v.clock.dot().clone())];
                    if self.origin_by_value.get(&v.value) != Some(&origin) {
                        return fail(
                            index,
                            FailureKind::Corruption,
                            format!("value of {} changed", v.clock),
                        );
                    }
                    got.insert(origin);
                }
                if let Some((x, y)) = state.ordered_pairs().first() {
                    return Err(DifferentialFailure {
                        index,
                        kind: FailureKind::SiblingsNotConcurrent,
                        detail: format!("node {node} holds ordered siblings"),
                        pair: Some((x.clock.to_string(), y.clock.to_string())),
                    });
                }
            }
            if got != expected {
                return fail(
                    index,
                    FailureKind::SiblingMismatch,
                    format!(
                        "node {node} key {} holds versions from puts {got:?}, oracle holds {expected:?}",
                        String::from_utf8_lossy(key)
                    ),
                );
            }
            self.metric(StoreKind::Dvv).record_siblings(got.len());
        }
        if self.stores.server_vv {
            let n = self.server_vv[node].siblings(key).len();
            self.metric(StoreKind::ServerVv).record_siblings(n);
        }
        if self.stores.client_vv {
            let n = self.client_vv[node].siblings(key).len();
            self.metric(StoreKind::ClientVv).record_siblings(n);
        }
        Ok(())
    }
}

pub fn run_differential(trace: &Trace, stores: StoreSet) -> Result<RunReport, DifferentialFailure> {
    Differential::run(trace, stores, None)
}

/// Runs independent traces on up to `threads` worker threads. On failure,
/// returns the position of the first failing trace (in input order) and
/// its failure.
pub fn run_many(
    traces: &[Trace],
    stores: StoreSet,
    threads: usize,
) -> Result<Summary, (usize, DifferentialFailure)> {
    let threads = threads.max(1).min(traces.len().max(1));
    let chunk = traces.len().div_ceil(threads).max(1);
    let results: Vec<Result<Summary, (usize, DifferentialFailure)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = traces
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                scope.spawn(move || {
                    let mut summary = Summary::default();
                    for (i, t) in part.iter().enumerate() {
                        let report = run_differential(t, stores).map_err(|f| (c * chunk + i, f))?;
                        summary.add(&report);
                    }
                    Ok(summary)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut total = Summary::default();
    for r in results {
        total.merge(&r?);
    }
    Ok(total)
}
