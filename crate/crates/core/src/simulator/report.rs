use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Counters for one store over one or more runs. Sums are kept next to the
/// means so that merging reports stays associative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreMetrics {
    pub clocks: u64,
    pub clock_entries_sum: u64,
    pub max_clock_entries: u64,
    pub mean_clock_entries: f64,
    pub sibling_samples: u64,
    pub sibling_sum: u64,
    pub max_siblings: u64,
    pub mean_siblings: f64,
    pub false_dominance_count: u64,
    pub false_concurrency_count: u64,
    pub ordering_disagreements_vs_oracle: u64,
}

impl StoreMetrics {
    pub(crate) fn record_clock(&mut self, entries: usize) {
        self.clocks += 1;
        self.clock_entries_sum += entries as u64;
        self.max_clock_entries = self.max_clock_entries.max(entries as u64);
        self.refresh();
    }

    pub(crate) fn record_siblings(&mut self, count: usize) {
        self.sibling_samples += 1;
        self.sibling_sum += count as u64;
        self.max_siblings = self.max_siblings.max(count as u64);
        self.refresh();
    }

    pub fn merge(&mut self, other: &StoreMetrics) {
        self.clocks += other.clocks;
        self.clock_entries_sum += other.clock_entries_sum;
        self.max_clock_entries = self.max_clock_entries.max(other.max_clock_entries);
        self.sibling_samples += other.sibling_samples;
        self.sibling_sum += other.sibling_sum;
        self.max_siblings = self.max_siblings.max(other.max_siblings);
        self.false_dominance_count += other.false_dominance_count;
        self.false_concurrency_count += other.false_concurrency_count;
        self.ordering_disagreements_vs_oracle += other.ordering_disagreements_vs_oracle;
        self.refresh();
    }

    fn refresh(&mut self) {
        self.mean_clock_entries = ratio(self.clock_entries_sum, self.clocks);
        self.mean_siblings = ratio(self.sibling_sum, self.sibling_samples);
    }
}

fn ratio(sum: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Result of one differential run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub servers: usize,
    pub clients: usize,
    pub keys: usize,
    pub op_count: u64,
    pub stores: BTreeMap<String, StoreMetrics>,
}

impl RunReport {
    pub fn store(&self, name: &str) -> Option<&StoreMetrics> {
        self.stores.get(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table, one row per store.
    pub fn table(&self) -> String {
        let mut out = format!(
            "seed={} servers={} clients={} keys={} ops={}\n",
            self.seed, self.servers, self.clients, self.keys, self.op_count
        );
        out.push_str(&table_rows(&self.stores));
        out
    }
}

/// Aggregate over many runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: u64,
    pub stores: BTreeMap<String, StoreMetrics>,
}

impl Summary {
    pub fn add(&mut self, report: &RunReport) {
        self.runs += 1;
        for (name, m) in &report.stores {
            self.stores.entry(name.clone()).or_default().merge(m);
        }
    }

    pub fn merge(&mut self, other: &Summary) {
        self.runs += other.runs;
        for (name, m) in &other.stores {
            self.stores.entry(name.clone()).or_default().merge(m);
        }
    }

    pub fn table(&self) -> String {
        format!("runs={}\n{}", self.runs, table_rows(&self.stores))
    }
}

fn table_rows(stores: &BTreeMap<String, StoreMetrics>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>7} {:>9} {:>8} {:>9} {:>9} {:>9} {:>12}",
        "store",
        "clocks",
        "max-width",
        "mean-w",
        "max-sibs",
        "mean-sibs",
        "false-dom",
        "disagreements"
    );
    for (name, m) in stores {
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>9} {:>8.2} {:>9} {:>9.2} {:>9} {:>12}",
            name,
            m.clocks,
            m.max_clock_entries,
            m.mean_clock_entries,
            m.max_siblings,
            m.mean_siblings,
            m.false_dominance_count,
            m.ordering_disagreements_vs_oracle
        );
    }
    out
}
