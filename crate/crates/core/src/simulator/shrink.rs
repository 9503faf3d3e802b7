use super::differential::{Differential, Fault, StoreSet};
use super::trace::{Trace, TraceEvent};

/// Shrinks a trace on which the differential run fails (with `fault`
/// injected, if any) to a subsequence that still fails and from which no
/// single event can be removed.
pub fn shrink_failure(
    trace: &Trace,
    failing_index: usize,
    stores: StoreSet,
    fault: Option<Fault>,
) -> Trace {
    shrink_with(trace, failing_index, |t| {
        Differential::run(t, stores, fault).is_err()
    })
}

/// Delta debugging over event subsequences: drop everything after the
/// failing event, remove chunks of halving size while `fails` holds, then
/// repeat single-event removal until nothing more can go.
///
/// Returns the input unchanged if the truncated trace does not fail.
pub fn shrink_with<F>(trace: &Trace, failing_index: usize, mut fails: F) -> Trace
where
    F: FnMut(&Trace) -> bool,
{
    let end = (failing_index + 1).min(trace.events.len());
    let mut events: Vec<TraceEvent> = trace.events[..end].to_vec();
    if !fails(&trace.with_events(events.clone())) {
        return trace.clone();
    }

    let mut chunk = events.len() / 2;
    while chunk > 1 {
        let mut start = 0;
        while start < events.len() {
            let stop = (start + chunk).min(events.len());
            let candidate: Vec<TraceEvent> = events[..start]
                .iter()
                .chain(&events[stop..])
                .cloned()
                .collect();
            if !candidate.is_empty() && fails(&trace.with_events(candidate.clone())) {
                events = candidate;
            } else {
                start = stop;
            }
        }
        chunk /= 2;
    }

    loop {
        let mut removed = false;
        let mut i = 0;
        while i < events.len() {
            let mut candidate = events.clone();
            candidate.remove(i);
            if fails(&trace.with_events(candidate.clone())) {
                events = candidate;
                removed = true;
            } else {
                i += 1;
            }
        }
        if !removed {
            break;
        }
    }
    trace.with_events(events)
}
