mod common;

use common::{header, id};
use dvvkit::simulator::{
    canonical_trace, generate_trace, generate_trace_with, run_differential, run_many,
    shrink_failure, Differential, Fault, OpMix, SessionModel, StoreSet, Summary, Trace, TraceEvent,
};
use std::collections::{BTreeMap, BTreeSet};

const GOLDEN: &str = include_str!("data/golden_seed1.trace");
const CANONICAL: &str = include_str!("data/canonical.trace");

#[test]
fn golden_trace_is_reproduced_byte_for_byte() {
    let mut h = header(1, 2, 2, 1, 10);
    h.keys = vec!["k1".into()];
    let t = generate_trace(&h, &OpMix::default()).unwrap();
    assert_eq!(t.to_text(), GOLDEN);
    let parsed = Trace::from_text(GOLDEN).unwrap();
    assert_eq!(parsed, t);
    run_differential(&parsed, StoreSet::default()).unwrap();
}

#[test]
fn canonical_file_matches_built_in_scenario() {
    assert_eq!(canonical_trace().to_text(), CANONICAL);
    let report =
        run_differential(&Trace::from_text(CANONICAL).unwrap(), StoreSet::default()).unwrap();
    assert_eq!(report.store("server-vv").unwrap().false_dominance_count, 1);
    assert_eq!(report.store("dvv").unwrap().false_dominance_count, 0);
    assert_eq!(report.store("client-vv").unwrap().false_dominance_count, 0);
}

#[test]
fn widths_with_a_thousand_clients() {
    let t = generate_trace(&header(3, 3, 1000, 1, 500), &OpMix::default()).unwrap();
    let writers: BTreeSet<_> = t
        .events
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Put { client, .. } => Some(client.clone()),
            _ => None,
        })
        .collect();
    let puts = t
        .events
        .iter()
        .filter(|e| matches!(e, TraceEvent::Put { .. }))
        .count();
    assert!(puts >= 150, "{puts} puts");
    let r = run_differential(&t, StoreSet::default()).unwrap();
    assert!(r.store("dvv").unwrap().max_clock_entries <= 3);
    let client_max = r.store("client-vv").unwrap().max_clock_entries;
    assert!(client_max as usize <= writers.len());
    assert!(client_max > 3);
}

#[test]
fn per_client_vectors_are_exact_on_sticky_sessions() {
    for seed in 1..=50 {
        let t = generate_trace_with(
            &header(seed, 3, 8, 3, 200),
            &OpMix::default(),
            SessionModel::Sticky,
        )
        .unwrap();
        let r = run_differential(&t, StoreSet::default()).unwrap();
        let c = r.store("client-vv").unwrap();
        assert_eq!(c.false_dominance_count, 0, "seed {seed}");
        assert_eq!(c.ordering_disagreements_vs_oracle, 0, "seed {seed}");
        assert_eq!(r.store("dvv").unwrap().false_dominance_count, 0);
    }
}

#[test]
fn per_server_vectors_are_fine_when_contexts_cover_the_state() {
    let mut events = Vec::new();
    for i in 0..30 {
        let c = id(&format!("c{}", i % 3 + 1));
        events.push(TraceEvent::Get {
            client: c.clone(),
            node: id("a"),
            key: "k1".into(),
        });
        events.push(TraceEvent::Put {
            client: c,
            node: id("a"),
            key: "k1".into(),
            value: format!("v{i}"),
        });
    }
    let mut h = header(0, 1, 3, 1, events.len() as u64);
    h.keys = vec!["k1".into()];
    let r = run_differential(&Trace { header: h, events }, StoreSet::default()).unwrap();
    assert_eq!(r.store("server-vv").unwrap().false_dominance_count, 0);
    assert_eq!(
        r.store("server-vv")
            .unwrap()
            .ordering_disagreements_vs_oracle,
        0
    );
    assert_eq!(r.store("dvv").unwrap().max_siblings, 1);
}

#[test]
fn stores_can_be_left_out() {
    let t = generate_trace(&header(2, 3, 5, 2, 100), &OpMix::default()).unwrap();
    let r = run_differential(&t, StoreSet::parse_list("oracle,client-vv").unwrap()).unwrap();
    let names: Vec<_> = r.stores.keys().map(String::as_str).collect();
    assert_eq!(names, ["client-vv", "oracle"]);
}

#[test]
fn injected_bug_shrinks_to_a_small_counterexample() {
    let stores = StoreSet::default();
    let mut caught = 0;
    for seed in 1..=30 {
        let t = generate_trace(&header(seed, 3, 5, 2, 120), &OpMix::default()).unwrap();
        let Err(failure) = Differential::run(&t, stores, Some(Fault::SkipPutDiscard)) else {
            continue;
        };
        caught += 1;
        let small = shrink_failure(&t, failure.index, stores, Some(Fault::SkipPutDiscard));
        assert!(small.events.len() <= 4, "seed {seed}: {}", small.to_text());
        assert!(Differential::run(&small, stores, Some(Fault::SkipPutDiscard)).is_err());
        assert!(run_differential(&small, stores).is_ok());
    }
    assert!(caught >= 25, "fault caught on only {caught} traces");
}

#[test]
fn parallel_runs_merge_to_the_sequential_summary() {
    let traces: Vec<Trace> = (1..=12)
        .map(|s| generate_trace(&header(s, 3, 6, 2, 80), &OpMix::default()).unwrap())
        .collect();
    let parallel = run_many(&traces, StoreSet::default(), 4).unwrap();
    let mut sequential = Summary::default();
    for t in &traces {
        sequential.add(&run_differential(t, StoreSet::default()).unwrap());
    }
    assert_eq!(parallel, sequential);
    assert_eq!(parallel.runs, 12);
}

#[test]
fn minted_dots_have_no_gaps() {
    let t = generate_trace(&header(9, 3, 10, 4, 300), &OpMix::default()).unwrap();
    let mut d = Differential::new(t.header.clone(), StoreSet::default());
    for (i, e) in t.events.iter().enumerate() {
        d.apply(i, e).unwrap();
    }
    let per: &BTreeMap<_, Vec<u64>> = d.minted();
    assert!(!per.is_empty());
    for counters in per.values() {
        let expected: Vec<u64> = (1..=counters.len() as u64).collect();
        assert_eq!(counters, &expected);
    }
}
