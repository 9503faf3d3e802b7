//! Exit criteria. Each criterion prints one PASS/FAIL line and the process
//! exits non-zero if any fails.

mod common;

use common::{header, id, replay_dvv};
use dvvkit::clock::{parse_clock, Clock, Dot, DottedVersionVector, VersionVector};
use dvvkit::kvstore::{KeyState, VersionedValue};
use dvvkit::simulator::{
    append_syncs, canonical_trace, generate_trace, run_many, Differential, OpMix, SplitMix64,
    StoreKind, StoreSet, Trace,
};
use dvvkit::ReplicaId;
use std::time::{Duration, Instant};

const TRACES: u64 = 500;
const RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const LATTICE_CASES: usize = 10_000;
const FUZZ_CLOCKS: usize = 10_000;
const EXTRA_SYNCS: usize = 50;

type Outcome = Result<String, String>;

fn acceptance_traces() -> Vec<Trace> {
    (1..=TRACES)
        .map(|seed| generate_trace(&header(seed, 3, 20, 5, 200), &OpMix::default()).unwrap())
        .collect()
}

fn threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn oracle_equivalence(traces: &[Trace]) -> Outcome {
    let start = Instant::now();
    let summary = run_many(traces, StoreSet::default(), threads())
        .map_err(|(i, f)| format!("trace seed {}: {f}", i + 1))?;
    let elapsed = start.elapsed();
    let dvv = &summary.stores["dvv"];
    let detail = format!(
        "{} traces, {} dvv clocks, {} disagreements, {} lost updates, {:.1}s",
        summary.runs,
        dvv.clocks,
        dvv.ordering_disagreements_vs_oracle,
        dvv.false_dominance_count,
        elapsed.as_secs_f64()
    );
    if dvv.ordering_disagreements_vs_oracle == 0
        && dvv.false_dominance_count == 0
        && elapsed <= RUNTIME_LIMIT
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn size_bound() -> Outcome {
    let t = generate_trace(&header(7, 3, 1000, 5, 2000), &OpMix::default()).unwrap();
    let r = Differential::run(&t, StoreSet::default(), None).map_err(|f| f.to_string())?;
    let dvv = r.store("dvv").unwrap().max_clock_entries;
    let client = r.store("client-vv").unwrap().max_clock_entries;
    let detail = format!("dvv max width {dvv} (<= 3), client-vv max width {client} (>= 100)");
    if dvv <= 3 && client >= 100 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn canonical_scenario() -> Outcome {
    let t = canonical_trace();
    let a = id("a");
    let mut d = Differential::new(t.header.clone(), StoreSet::default());
    let apply = |d: &mut Differential, range: std::ops::Range<usize>| -> Result<(), String> {
        for i in range {
            d.apply(i, &t.events[i]).map_err(|f| f.to_string())?;
        }
        Ok(())
    };
    apply(&mut d, 0..4)?;
    let dvv_sibs = d
        .dvv_node(&a)
        .unwrap()
        .key_state(b"k")
        .map_or(0, KeyState::len);
    let server_sibs = d.server_vv_node(&a).unwrap().siblings(b"k").len();
    let server_fd = d
        .metrics(StoreKind::ServerVv)
        .unwrap()
        .false_dominance_count;
    apply(&mut d, 4..6)?;
    let dvv_final = d
        .dvv_node(&a)
        .unwrap()
        .key_state(b"k")
        .map_or(0, KeyState::len);
    let detail = format!(
        "after blind puts: dvv {dvv_sibs} siblings, server-vv {server_sibs} sibling / {server_fd} false dominance; after reconcile: dvv {dvv_final}"
    );
    if (dvv_sibs, server_sibs, server_fd, dvv_final) == (2, 1, 1, 1) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_vv(rng: &mut SplitMix64, ids: &[ReplicaId]) -> VersionVector {
    ids.iter()
        .filter_map(|r| {
            let n = rng.below(4) as u64;
            (n > 0).then(|| (r.clone(), n))
        })
        .collect()
}

fn lattice_laws() -> Outcome {
    let mut rng = SplitMix64::new(2024);
    let mut failures = 0;
    let mut cases = 0;
    let mut seed = 1000;
    while cases < LATTICE_CASES {
        seed += 1;
        let trace = generate_trace(&header(seed, 3, 6, 1, 120), &OpMix::default()).unwrap();
        let (clocks, _) = replay_dvv(&trace);
        let universe: Vec<VersionedValue> = clocks
            .values()
            .flatten()
            .map(|c| VersionedValue {
                value: c.to_string().into_bytes(),
                clock: c.clone(),
            })
            .collect();
        if universe.is_empty() {
            continue;
        }
        for _ in 0..100 {
            let mut pick = || {
                let n = rng.below(6);
                KeyState::from_versions((0..n).map(|_| universe[rng.below(universe.len())].clone()))
                    .unwrap()
            };
            let (a, b, c) = (pick(), pick(), pick());
            let canon = |s: &KeyState| {
                s.canonical()
                    .iter()
                    .map(|v| format!("{}={}", String::from_utf8_lossy(&v.value), v.clock))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let ab = a.sync(&b).unwrap();
            let ok = canon(&ab) == canon(&b.sync(&a).unwrap())
                && canon(&ab.sync(&c).unwrap()) == canon(&a.sync(&b.sync(&c).unwrap()).unwrap())
                && canon(&a.sync(&a).unwrap()) == canon(&a)
                && ab.ordered_pairs().is_empty();
            failures += usize::from(!ok);
            cases += 1;
        }
    }
    let ids: Vec<ReplicaId> = ["a", "b", "c", "d"].iter().map(|s| id(s)).collect();
    for _ in 0..LATTICE_CASES {
        let (a, b, c) = (
            random_vv(&mut rng, &ids),
            random_vv(&mut rng, &ids),
            random_vv(&mut rng, &ids),
        );
        let ok = a.join(&b) == b.join(&a)
            && a.join(&b).join(&c) == a.join(&b.join(&c))
            && a.join(&a) == a
            && a.leq(&b) == (a.join(&b) == b);
        failures += usize::from(!ok);
    }
    let detail = format!(
        "{cases} sibling-set triples and {LATTICE_CASES} vector triples, {failures} failures"
    );
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs every acceptance trace extended with random syncs and a final sweep;
/// checks dot contiguity and byte-identical replica dumps.
fn dots_and_convergence(traces: &[Trace]) -> (Outcome, Outcome) {
    let mut gaps = Vec::new();
    let mut diverged = Vec::new();
    let mut series = 0usize;
    for t in traces {
        let ext = append_syncs(t, EXTRA_SYNCS, t.header.seed ^ 0x5eed);
        let mut d = Differential::new(ext.header.clone(), StoreSet::default());
        for (i, e) in ext.events.iter().enumerate() {
            if let Err(f) = d.apply(i, e) {
                let msg = format!("seed {}: {f}", t.header.seed);
                return (Err(msg.clone()), Err(msg));
            }
        }
        for ((key, replica), counters) in d.minted() {
            series += 1;
            let mut sorted = counters.clone();
            sorted.sort_unstable();
            if sorted != (1..=sorted.len() as u64).collect::<Vec<_>>() {
                gaps.push(format!(
                    "seed {} key {key} replica {replica}",
                    t.header.seed
                ));
            }
        }
        let dumps: Vec<String> = d
            .dvv_nodes()
            .map(|n| {
                n.dump()
                    .iter()
                    .map(|l| l.split_once(' ').map_or("", |(_, rest)| rest).to_owned() + "\n")
                    .collect()
            })
            .collect();
        if dumps.windows(2).any(|w| w[0] != w[1]) {
            diverged.push(t.header.seed);
        }
    }
    let dots = if gaps.is_empty() {
        Ok(format!("{series} (key, replica) dot series contiguous"))
    } else {
        Err(format!("gaps in {:?}", gaps))
    };
    let conv = if diverged.is_empty() {
        Ok(format!(
            "{} traces converged to identical dumps",
            traces.len()
        ))
    } else {
        Err(format!("diverged seeds {diverged:?}"))
    };
    (dots, conv)
}

fn random_clock(rng: &mut SplitMix64) -> Clock {
    let pool = ["a", "b", "c", "n1", "n10", "srv-2", "x.y", "Z_9"];
    let mut vv = VersionVector::new();
    for name in pool {
        if rng.below(3) == 0 {
            let n = match rng.below(4) {
                0 => u64::MAX - rng.below(3) as u64,
                _ => 1 + rng.below(1000) as u64,
            };
            vv.set(id(name), n);
        }
    }
    if rng.below(2) == 0 {
        return Clock::Vector(vv);
    }
    let r = id(pool[rng.below(pool.len())]);
    let base = vv.get(&r);
    if base == u64::MAX {
        vv.set(r.clone(), base - 1);
    }
    let n = vv.get(&r) + 1 + rng.below(3) as u64 % (u64::MAX - vv.get(&r)).max(1);
    Clock::Dotted(DottedVersionVector::new(Dot::new(r, n), vv).unwrap())
}

fn round_trip(traces: &[Trace]) -> Outcome {
    let mut rng = SplitMix64::new(77);
    let mut bad = 0;
    for _ in 0..FUZZ_CLOCKS {
        let clock = random_clock(&mut rng);
        let text = clock.to_string();
        match parse_clock(&text) {
            Ok(back) if back == clock && back.to_string() == text => {}
            _ => bad += 1,
        }
    }
    let mut bad_traces = 0;
    for t in traces {
        let text = t.to_text();
        match Trace::from_text(&text) {
            Ok(back) if back == *t && back.to_text() == text => {}
            _ => bad_traces += 1,
        }
    }
    let detail = format!(
        "{FUZZ_CLOCKS} clocks ({bad} mismatches), {} trace files ({bad_traces} mismatches)",
        traces.len()
    );
    if bad == 0 && bad_traces == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let traces = acceptance_traces();
    let (dots, convergence) = dots_and_convergence(&traces);
    let results = [
        ("oracle equivalence", oracle_equivalence(&traces)),
        ("size bound", size_bound()),
        ("canonical scenario", canonical_scenario()),
        ("lattice laws", lattice_laws()),
        ("consecutive dots", dots),
        ("convergence", convergence),
        ("round-trip", round_trip(&traces)),
    ];
    let mut failed = Vec::new();
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                println!("[FAIL] {name}: {detail}");
                failed.push(*name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
