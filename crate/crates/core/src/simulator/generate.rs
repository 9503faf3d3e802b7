use super::rng::SplitMix64;
use super::trace::{Trace, TraceEvent, TraceHeader};
use crate::clock::ReplicaId;
use std::collections::{BTreeMap, BTreeSet};

/// Probabilities of drawing a GET, a PUT, or a SYNC for each operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpMix {
    pub get: f64,
    pub put: f64,
    pub sync: f64,
}

impl Default for OpMix {
    fn default() -> Self {
        OpMix {
            get: 0.45,
            put: 0.40,
            sync: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid operation mix {0:?}: probabilities must be non-negative and sum to 1")]
    Mix(OpMix),
    #[error(transparent)]
    Trace(#[from] super::TraceError),
}

impl OpMix {
    pub fn new(get: f64, put: f64, sync: f64) -> Result<Self, GenerateError> {
        let mix = OpMix { get, put, sync };
        mix.validate()?;
        Ok(mix)
    }

    /// Splits `1 - sync` between gets and puts in the default 45:40 ratio.
    pub fn with_sync(sync: f64) -> Result<Self, GenerateError> {
        let rest = 1.0 - sync;
        OpMix::new(rest * 45.0 / 85.0, rest * 40.0 / 85.0, sync)
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let parts = [self.get, self.put, self.sync];
        let ok = parts.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(GenerateError::Mix(*self))
        }
    }
}

/// How clients pick coordinators and when they may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SessionModel {
    /// Any client talks to any node; a client may write again with a stale
    /// context, including one that misses its own earlier write.
    #[default]
    Free,
    /// Each client always talks to the same node and writes at most once per
    /// read, so every write of a client follows its previous one causally.
    Sticky,
}

/// [`generate_trace_with`] using the free session model.
pub fn generate_trace(header: &TraceHeader, mix: &OpMix) -> Result<Trace, GenerateError> {
    generate_trace_with(header, mix, SessionModel::Free)
}

/// Draws `header.op_count` events from `SplitMix64(header.seed)`.
///
/// Per operation: `u = unit()`. If `u < sync`, emit a sync between two
/// distinct servers (`i = below(n)`, `j = below(n - 1)`, bumped past `i`).
/// Else if `u < sync + get`, emit a read by `clients[below(C)]` at
/// `servers[below(S)]` of `keys[below(K)]`, and remember it as pending.
/// Otherwise emit a write: if reads are pending, `below(pending)` picks one,
/// which is removed and written back by the same client, node and key;
/// with none pending the write is blind (client, node, key drawn in that
/// order). Values are `"<client>-<n>"` with a per-client sequence number.
///
/// Under [`SessionModel::Sticky`] a client's node is `servers[i % S]` for
/// client index `i` and no node draw happens; a blind write by a client that
/// already wrote the key becomes a read instead.
pub fn generate_trace_with(
    header: &TraceHeader,
    mix: &OpMix,
    session: SessionModel,
) -> Result<Trace, GenerateError> {
    mix.validate()?;
    header.validate()?;
    let mut rng = SplitMix64::new(header.seed);
    let servers = &header.servers;
    let clients = &header.clients;
    let keys = &header.keys;

    let mut pending: Vec<(usize, usize, usize)> = Vec::new();
    let mut seq: BTreeMap<usize, u64> = BTreeMap::new();
    let mut wrote: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut events = Vec::with_capacity(header.op_count as usize);

    let node_for = |rng: &mut SplitMix64, client: usize| match session {
        SessionModel::Free => rng.below(servers.len()),
        SessionModel::Sticky => client % servers.len(),
    };

    for _ in 0..header.op_count {
        let u = rng.unit();
        if u < mix.sync {
            let n = servers.len();
            let (i, j) = if n == 1 {
                (0, 0)
            } else {
                let i = rng.below(n);
                let mut j = rng.below(n - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            };
            events.push(TraceEvent::Sync {
                a: servers[i].clone(),
                b: servers[j].clone(),
            });
            continue;
        }

        let read = if u < mix.sync + mix.get {
            let c = rng.below(clients.len());
            let node = node_for(&mut rng, c);
            let k = rng.below(keys.len());
            Some((c, node, k))
        } else if !pending.is_empty() {
            let (c, node, k) = pending.remove(rng.below(pending.len()));
            events.push(put(
                clients, servers, keys, &mut seq, &mut wrote, c, node, k,
            ));
            None
        } else {
            let c = rng.below(clients.len());
            let node = node_for(&mut rng, c);
            let k = rng.below(keys.len());
            if session == SessionModel::Sticky && wrote.contains(&(c, k)) {
                Some((c, node, k))
            } else {
                events.push(put(
                    clients, servers, keys, &mut seq, &mut wrote, c, node, k,
                ));
                None
            }
        };

        if let Some((c, node, k)) = read {
            pending.retain(|&(pc, _, pk)| !(pc == c && pk == k));
            pending.push((c, node, k));
            events.push(TraceEvent::Get {
                client: clients[c].clone(),
                node: servers[node].clone(),
                key: keys[k].clone(),
            });
        }
    }

    Ok(Trace {
        header: header.clone(),
        events,
    })
}

#[allow(clippy::too_many_arguments)]
fn put(
    clients: &[ReplicaId],
    servers: &[ReplicaId],
    keys: &[String],
    seq: &mut BTreeMap<usize, u64>,
    wrote: &mut BTreeSet<(usize, usize)>,
    c: usize,
    node: usize,
    k: usize,
) -> TraceEvent {
    let n = seq.entry(c).or_insert(0);
    *n += 1;
    wrote.insert((c, k));
    TraceEvent::Put {
        client: clients[c].clone(),
        node: servers[node].clone(),
        key: keys[k].clone(),
        value: format!("{}-{}", clients[c], n),
    }
}

/// Appends `count` random syncs drawn from `SplitMix64(seed)`, then a
/// forward and a backward pass of neighbour syncs over the server list,
/// after which every server holds the same state.
pub fn append_syncs(trace: &Trace, count: usize, seed: u64) -> Trace {
    let servers = &trace.header.servers;
    let mut rng = SplitMix64::new(seed);
    let mut events = trace.events.clone();
    let n = servers.len();
    for _ in 0..count {
        let i = rng.below(n);
        let j = if n == 1 {
            0
        } else {
            let j = rng.below(n - 1);
            if j >= i {
                j + 1
            } else {
                j
            }
        };
        events.push(TraceEvent::Sync {
            a: servers[i].clone(),
            b: servers[j].clone(),
        });
    }
    let sweep = (0..n.saturating_sub(1)).chain((0..n.saturating_sub(1)).rev());
    for i in sweep {
        events.push(TraceEvent::Sync {
            a: servers[i].clone(),
            b: servers[i + 1].clone(),
        });
    }
    trace.with_events(events)
}

/// Two clients read an empty key through server `a`, both write blind, and
/// one of them reads the two siblings back and writes a reconciling value.
pub fn canonical_trace() -> Trace {
    let id = |s: &str| ReplicaId::new(s).expect("valid id");
    let get = |c: &str| TraceEvent::Get {
        client: id(c),
        node: id("a"),
        key: "k".into(),
    };
    let put = |c: &str, v: &str| TraceEvent::Put {
        client: id(c),
        node: id("a"),
        key: "k".into(),
        value: v.into(),
    };
    let events = vec![
        get("c1"),
        get("c2"),
        put("c1", "v1"),
        put("c2", "v2"),
        get("c1"),
        put("c1", "v3"),
    ];
    Trace {
        header: TraceHeader {
            seed: 0,
            servers: vec![id("a")],
            clients: vec![id("c1"), id("c2")],
            keys: vec!["k".into()],
            op_count: events.len() as u64,
        },
        events,
    }
}
