//! Text form of clocks.
//!
//! ```text
//! VersionVector := "{" [ id ":" counter { "," id ":" counter } ] "}"
//! DVV           := "((" id "," counter ")," VersionVector ")"
//! ```
//!
//! Only canonical literals are accepted (ids strictly ascending, no zero
//! counters, no leading zeros, no whitespace), so parsing followed by
//! printing reproduces the input byte for byte.

use super::{ClockOrdering, Dot, DottedVersionVector, ReplicaId, VersionVector};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based character position of the offending input.
    pub column: usize,
    pub message: String,
}

/// Either kind of clock literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clock {
    Vector(VersionVector),
    Dotted(DottedVersionVector),
}

impl Clock {
    /// Compares the histories the two clocks denote; a plain vector stands
    /// for its downward closure.
    pub fn compare(&self, other: &Clock) -> ClockOrdering {
        match (self, other) {
            (Clock::Vector(a), Clock::Vector(b)) => {
                ClockOrdering::from_inclusions(a.leq(b), b.leq(a))
            }
            (Clock::Dotted(a), Clock::Dotted(b)) => a.compare(b),
            (Clock::Dotted(a), Clock::Vector(b)) => {
                ClockOrdering::from_inclusions(a.covered_by(b), a.includes_vector(b))
            }
            (Clock::Vector(_), Clock::Dotted(_)) => other.compare(self).reverse(),
        }
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clock::Vector(vv) => vv.fmt(f),
            Clock::Dotted(dvv) => dvv.fmt(f),
        }
    }
}

pub fn parse_clock(input: &str) -> Result<Clock, ParseError> {
    let mut p = Parser::new(input);
    let clock = if p.peek() == Some('(') {
        Clock::Dotted(p.dvv()?)
    } else {
        Clock::Vector(p.vv()?)
    };
    p.end()?;
    Ok(clock)
}

pub fn parse_vv(input: &str) -> Result<VersionVector, ParseError> {
    let mut p = Parser::new(input);
    let vv = p.vv()?;
    p.end()?;
    Ok(vv)
}

pub fn parse_dvv(input: &str) -> Result<DottedVersionVector, ParseError> {
    let mut p = Parser::new(input);
    let dvv = p.dvv()?;
    p.end()?;
    Ok(dvv)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(input: &str) -> Self {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: at + 1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => self.err(self.pos, format!("expected '{c}', found '{got}'")),
            None => self.err(self.pos, format!("expected '{c}', found end of input")),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(self.pos, format!("unexpected trailing '{c}'")),
        }
    }

    fn id(&mut self) -> Result<ReplicaId, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if ReplicaId::is_id_char(c)) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected replica id");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        ReplicaId::new(&s).or_else(|e| self.err(start, e.to_string()))
    }

    fn counter(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected counter");
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        if digits.len() > 1 && digits.starts_with('0') {
            return self.err(start, "counter has a leading zero");
        }
        match digits.parse::<u64>() {
            Ok(0) => self.err(start, "counter must be at least 1"),
            Ok(n) => Ok(n),
            Err(_) => self.err(start, "counter does not fit in 64 bits"),
        }
    }

    fn vv(&mut self) -> Result<VersionVector, ParseError> {
        self.expect('{')?;
        let mut vv = VersionVector::new();
        let mut last: Option<ReplicaId> = None;
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(vv);
        }
        loop {
            let at = self.pos;
            let id = self.id()?;
            if let Some(prev) = &last {
                if id <= *prev {
                    return self.err(at, format!("id '{id}' is not in ascending order"));
                }
            }
            self.expect(':')?;
            let n = self.counter()?;
            vv.set(id.clone(), n);
            last = Some(id);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(vv);
                }
                Some(c) => return self.err(self.pos, format!("expected ',' or '}}', found '{c}'")),
                None => return self.err(self.pos, "expected ',' or '}', found end of input"),
            }
        }
    }

    fn dvv(&mut self) -> Result<DottedVersionVector, ParseError> {
        let start = self.pos;
        self.expect('(')?;
        self.expect('(')?;
        let id = self.id()?;
        self.expect(',')?;
        let n = self.counter()?;
        self.expect(')')?;
        self.expect(',')?;
        let vv = self.vv()?;
        self.expect(')')?;
        DottedVersionVector::new(Dot::new(id, n), vv).or_else(|e| self.err(start, e.to_string()))
    }
}
