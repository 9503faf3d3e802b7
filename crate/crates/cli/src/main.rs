use clap::{Parser, Subcommand, ValueEnum};
use dvvkit::clock::parse_clock;
use dvvkit::simulator::{
    generate_trace_with, run_differential, shrink_failure, OpMix, RunReport, SessionModel,
    StoreSet, Trace, TraceHeader,
};
use dvvkit::ReplicaId;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod demo;

#[derive(Debug, Parser)]
#[command(
    name = "dvvkit",
    version,
    about = "Dotted version vector simulator and tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Session {
    Free,
    Sticky,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a trace and run it through every store.
    Simulate {
        #[arg(long, default_value_t = 3)]
        servers: usize,
        #[arg(long, default_value_t = 20)]
        clients: usize,
        #[arg(long, default_value_t = 5)]
        keys: usize,
        #[arg(long, default_value_t = 200)]
        ops: u64,
        #[arg(long, env = "DVVKIT_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.15)]
        sync_prob: f64,
        #[arg(long, value_enum, default_value_t = Session::Free)]
        session: Session,
        #[arg(long, default_value = "dvv,oracle,server-vv,client-vv")]
        stores: String,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Replay a trace file through every store.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "dvv,oracle,server-vv,client-vv")]
        stores: String,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Walk through two clients writing concurrently through one server.
    Demo,
    /// Compare two clock literals.
    Compare { a: String, b: String },
}

const USAGE: u8 = 2;
const FAILED: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            servers,
            clients,
            keys,
            ops,
            seed,
            sync_prob,
            session,
            stores,
            trace_out,
            report_out,
        } => {
            if servers == 0 || clients == 0 || keys == 0 {
                eprintln!("error: --servers, --clients and --keys must be at least 1");
                return ExitCode::from(USAGE);
            }
            let stores = match StoreSet::parse_list(&stores) {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            let mix = match OpMix::with_sync(sync_prob) {
                Ok(m) => m,
                Err(e) => return usage(e),
            };
            let header = TraceHeader {
                seed,
                servers: (0..servers).map(server_id).collect(),
                clients: (1..=clients).map(|i| id(&format!("c{i}"))).collect(),
                keys: (1..=keys).map(|i| format!("k{i}")).collect(),
                op_count: ops,
            };
            let session = match session {
                Session::Free => SessionModel::Free,
                Session::Sticky => SessionModel::Sticky,
            };
            let trace = match generate_trace_with(&header, &mix, session) {
                Ok(t) => t,
                Err(e) => return usage(e),
            };
            if let Some(path) = &trace_out {
                if let Err(code) = write(path, &trace.to_text()) {
                    return code;
                }
            }
            execute(&trace, stores, report_out.as_deref())
        }
        Command::Check {
            trace,
            stores,
            report_out,
        } => {
            let stores = match StoreSet::parse_list(&stores) {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            let text = match std::fs::read_to_string(&trace) {
                Ok(t) => t,
                Err(e) => return usage(format!("{}: {e}", trace.display())),
            };
            let parsed = match Trace::from_text(&text) {
                Ok(t) => t,
                Err(e) => {
                    let line = e.line().map(|l| format!("line {l}: ")).unwrap_or_default();
                    return usage(format!("{}: {line}{e}", trace.display()));
                }
            };
            execute(&parsed, stores, report_out.as_deref())
        }
        Command::Demo => {
            print!("{}", demo::walkthrough());
            ExitCode::SUCCESS
        }
        Command::Compare { a, b } => {
            let ca = match parse_clock(&a) {
                Ok(c) => c,
                Err(e) => return usage(format!("first clock: {e}")),
            };
            let cb = match parse_clock(&b) {
                Ok(c) => c,
                Err(e) => return usage(format!("second clock: {e}")),
            };
            println!("{}", ca.compare(&cb));
            ExitCode::SUCCESS
        }
    }
}

fn execute(trace: &Trace, stores: StoreSet, report_out: Option<&Path>) -> ExitCode {
    match run_differential(trace, stores) {
        Ok(report) => {
            print!("{}", report.table());
            if let Some(path) = report_out {
                if let Err(code) = write(path, &report_json(&report)) {
                    return code;
                }
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("differential failure: {failure}");
            let minimal = shrink_failure(trace, failure.index, stores, None);
            eprintln!(
                "minimized counterexample ({} events):",
                minimal.events.len()
            );
            eprint!("{}", minimal.to_text());
            ExitCode::from(FAILED)
        }
    }
}

fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<(), ExitCode> {
    std::fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn id(s: &str) -> ReplicaId {
    ReplicaId::new(s).expect("generated ids are valid")
}

/// `a`..`z`, then `aa`, `ab`, ...
fn server_id(mut i: usize) -> ReplicaId {
    let mut name = Vec::new();
    loop {
        name.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    name.reverse();
    id(std::str::from_utf8(&name).expect("ascii"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn server_ids_are_spreadsheet_style() {
        let names: Vec<String> = [0, 1, 25, 26, 27, 51, 52, 701, 702]
            .iter()
            .map(|&i| server_id(i).to_string())
            .collect();
        assert_eq!(names, ["a", "b", "z", "aa", "ab", "az", "ba", "zz", "aaa"]);
    }
}
