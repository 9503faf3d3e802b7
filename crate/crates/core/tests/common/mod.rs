#![allow(dead_code)]

use dvvkit::clock::{DottedVersionVector, VersionVector};
use dvvkit::kvstore::{anti_entropy, ReplicaNode};
use dvvkit::simulator::{Trace, TraceEvent, TraceHeader};
use dvvkit::ReplicaId;
use std::collections::{BTreeMap, HashMap};

pub fn id(s: &str) -> ReplicaId {
    ReplicaId::new(s).unwrap()
}

pub fn header(seed: u64, servers: usize, clients: usize, keys: usize, ops: u64) -> TraceHeader {
    TraceHeader {
        seed,
        servers: (0..servers)
            .map(|i| id(&((b'a' + i as u8) as char).to_string()))
            .collect(),
        clients: (1..=clients).map(|i| id(&format!("c{i}"))).collect(),
        keys: (1..=keys).map(|i| format!("k{i}")).collect(),
        op_count: ops,
    }
}

/// Replays a trace against bare DVV replicas and returns every clock minted,
/// grouped by key, together with the final replicas.
pub fn replay_dvv(
    trace: &Trace,
) -> (
    BTreeMap<String, Vec<DottedVersionVector>>,
    BTreeMap<ReplicaId, ReplicaNode>,
) {
    let mut nodes: BTreeMap<ReplicaId, ReplicaNode> = trace
        .header
        .servers
        .iter()
        .map(|s| (s.clone(), ReplicaNode::new(s.clone())))
        .collect();
    let mut ctx: HashMap<(ReplicaId, String), VersionVector> = HashMap::new();
    let mut clocks: BTreeMap<String, Vec<DottedVersionVector>> = BTreeMap::new();
    for e in &trace.events {
        match e {
            TraceEvent::Get { client, node, key } => {
                let (_, c) = nodes[node].get(key.as_bytes());
                ctx.insert((client.clone(), key.clone()), c);
            }
            TraceEvent::Put {
                client,
                node,
                key,
                value,
            } => {
                let c = ctx
                    .get(&(client.clone(), key.clone()))
                    .cloned()
                    .unwrap_or_default();
                let clock =
                    nodes
                        .get_mut(node)
                        .unwrap()
                        .put(key.as_bytes(), value.as_bytes().to_vec(), &c);
                clocks.entry(key.clone()).or_default().push(clock);
            }
            TraceEvent::Sync { a, b } => {
                if a != b {
                    let mut na = nodes.remove(a).unwrap();
                    let mut nb = nodes.remove(b).unwrap();
                    anti_entropy(&mut na, &mut nb, None).unwrap();
                    nodes.insert(a.clone(), na);
                    nodes.insert(b.clone(), nb);
                }
            }
        }
    }
    (clocks, nodes)
}
