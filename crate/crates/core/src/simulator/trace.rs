use crate::clock::ReplicaId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub seed: u64,
    pub servers: Vec<ReplicaId>,
    pub clients: Vec<ReplicaId>,
    pub keys: Vec<String>,
    pub op_count: u64,
}

/// One event line. A put uses the client's last read context for the key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum TraceEvent {
    Get {
        client: ReplicaId,
        node: ReplicaId,
        key: String,
    },
    Put {
        client: ReplicaId,
        node: ReplicaId,
        key: String,
        value: String,
    },
    Sync {
        a: ReplicaId,
        b: ReplicaId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid header: {0}")]
    Header(String),
    #[error("event {index}: unknown {role} '{id}'")]
    UnknownId {
        index: usize,
        role: &'static str,
        id: String,
    },
    #[error("event {index}: put value '{value}' already used by event {first}")]
    DuplicateValue {
        index: usize,
        first: usize,
        value: String,
    },
}

impl TraceError {
    /// 1-based line in the trace file the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            TraceError::Malformed { line, .. } => Some(*line),
            TraceError::Header(_) => Some(1),
            TraceError::UnknownId { index, .. } | TraceError::DuplicateValue { index, .. } => {
                Some(index + 2)
            }
        }
    }
}

impl TraceHeader {
    pub fn validate(&self) -> Result<(), TraceError> {
        let err = |m: &str| Err(TraceError::Header(m.to_owned()));
        if self.servers.is_empty() || self.clients.is_empty() || self.keys.is_empty() {
            return err("servers, clients and keys must be non-empty");
        }
        let servers: BTreeSet<_> = self.servers.iter().collect();
        let clients: BTreeSet<_> = self.clients.iter().collect();
        let keys: BTreeSet<_> = self.keys.iter().collect();
        if servers.len() != self.servers.len()
            || clients.len() != self.clients.len()
            || keys.len() != self.keys.len()
        {
            return err("duplicate id");
        }
        if servers.iter().any(|s| clients.contains(s)) {
            return err("servers and clients must be disjoint");
        }
        Ok(())
    }

    pub fn check_event(&self, index: usize, event: &TraceEvent) -> Result<(), TraceError> {
        let unknown = |role, id: &dyn ToString| TraceError::UnknownId {
            index,
            role,
            id: id.to_string(),
        };
        let server = |n: &ReplicaId| {
            if self.servers.contains(n) {
                Ok(())
            } else {
                Err(unknown("node", n))
            }
        };
        let client = |c: &ReplicaId| {
            if self.clients.contains(c) {
                Ok(())
            } else {
                Err(unknown("client", c))
            }
        };
        let key = |k: &String| {
            if self.keys.contains(k) {
                Ok(())
            } else {
                Err(unknown("key", k))
            }
        };
        match event {
            TraceEvent::Get {
                client: c,
                node,
                key: k,
            }
            | TraceEvent::Put {
                client: c,
                node,
                key: k,
                ..
            } => {
                client(c)?;
                server(node)?;
                key(k)
            }
            TraceEvent::Sync { a, b } => {
                server(a)?;
                server(b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Header checks, membership of every event, and unique put values
    /// (values identify versions across stores).
    pub fn validate(&self) -> Result<(), TraceError> {
        self.header.validate()?;
        let mut seen = std::collections::HashMap::new();
        for (i, e) in self.events.iter().enumerate() {
            self.header.check_event(i, e)?;
            if let TraceEvent::Put { value, .. } = e {
                if let Some(&first) = seen.get(value.as_str()) {
                    return Err(TraceError::DuplicateValue {
                        index: i,
                        first,
                        value: value.clone(),
                    });
                }
                seen.insert(value.as_str(), i);
            }
        }
        Ok(())
    }

    /// Same header with `op_count` set to match a new event list.
    pub fn with_events(&self, events: Vec<TraceEvent>) -> Trace {
        let mut header = self.header.clone();
        header.op_count = events.len() as u64;
        Trace { header, events }
    }

    /// One JSON object per line, header first, each line newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Trace, TraceError> {
        let mut lines = text.lines().enumerate();
        let header: TraceHeader = match lines.next() {
            None => {
                return Err(TraceError::Malformed {
                    line: 1,
                    message: "missing header".into(),
                })
            }
            Some((_, l)) => serde_json::from_str(l).map_err(|e| TraceError::Malformed {
                line: 1,
                message: e.to_string(),
            })?,
        };
        header.validate()?;
        let mut events = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                return Err(TraceError::Malformed {
                    line: i + 1,
                    message: "blank line".into(),
                });
            }
            let e: TraceEvent = serde_json::from_str(line).map_err(|e| TraceError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(e);
        }
        if header.op_count != events.len() as u64 {
            return Err(TraceError::Malformed {
                line: 1,
                message: format!(
                    "op_count is {} but the trace has {} events",
                    header.op_count,
                    events.len()
                ),
            });
        }
        let trace = Trace { header, events };
        trace.validate()?;
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = concat!(
        r#"{"seed":3,"servers":["a","b"],"clients":["c1"],"keys":["k1"],"op_count":3}"#,
        "\n",
        r#"{"op":"get","client":"c1","node":"a","key":"k1"}"#,
        "\n",
        r#"{"op":"put","client":"c1","node":"a","key":"k1","value":"c1-1"}"#,
        "\n",
        r#"{"op":"sync","a":"a","b":"b"}"#,
        "\n"
    );

    #[test]
    fn parses_and_prints_bit_exactly() {
        let t = Trace::from_text(SAMPLE).unwrap();
        assert_eq!(t.events.len(), 3);
        assert_eq!(t.to_text(), SAMPLE);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = SAMPLE.replace(r#""op":"sync""#, r#""op":"merge""#);
        let err = Trace::from_text(&bad).unwrap_err();
        assert_eq!(err.line(), Some(4));

        let unknown = SAMPLE.replace(
            r#""node":"a","key":"k1","value""#,
            r#""node":"z","key":"k1","value""#,
        );
        let err = Trace::from_text(&unknown).unwrap_err();
        assert!(matches!(
            err,
            TraceError::UnknownId {
                index: 1,
                role: "node",
                ..
            }
        ));
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn rejects_bad_headers() {
        let overlap = SAMPLE.replace(r#""clients":["c1"]"#, r#""clients":["a"]"#);
        assert!(matches!(
            Trace::from_text(&overlap),
            Err(TraceError::Header(_))
        ));
        let count = SAMPLE.replace(r#""op_count":3"#, r#""op_count":4"#);
        assert!(matches!(
            Trace::from_text(&count),
            Err(TraceError::Malformed { line: 1, .. })
        ));
        let extra = SAMPLE.replace(r#""seed":3,"#, r#""seed":3,"x":1,"#);
        assert!(Trace::from_text(&extra).is_err());
    }

    #[test]
    fn rejects_duplicate_values() {
        let mut t = Trace::from_text(SAMPLE).unwrap();
        t.events.push(t.events[1].clone());
        assert!(matches!(
            t.validate(),
            Err(TraceError::DuplicateValue {
                index: 3,
                first: 1,
                ..
            })
        ));
    }
}
