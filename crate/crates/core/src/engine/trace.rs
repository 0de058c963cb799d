//! Run records: envelopes, final statuses, and trace-level checks.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::token::{bit_size, ceil_log2, Token};
use crate::topology::{NodeId, Port};

/// Final per-node outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Undecided,
    Elected,
    NonElected,
}

impl Status {
    fn as_char(self) -> char {
        match self {
            Status::Undecided => 'U',
            Status::Elected => 'E',
            Status::NonElected => 'N',
        }
    }
}

/// One sent message, as recorded by the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    /// Round in which the message was sent (1-based).
    pub round: u64,
    pub src: NodeId,
    /// Out-port at the sender.
    pub out_port: Port,
    pub payload: Token,
    /// Canonical encoding length of the payload in bits.
    pub bit_size: u64,
}

/// Complete record of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub envelopes: Vec<Envelope>,
    /// Message rounds executed (the final decision step is not a round).
    pub rounds: u64,
    pub statuses: Vec<Status>,
    /// Nodes that finished `Elected`, ascending.
    pub leader_ids: Vec<NodeId>,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.statuses.len()
    }

    /// One line per envelope: `round src port type rank count`.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "trace v1").unwrap();
        writeln!(out, "n {} rounds {}", self.n(), self.rounds).unwrap();
        writeln!(out, "envelopes {}", self.envelopes.len()).unwrap();
        for e in &self.envelopes {
            let rank = e.payload.rank().map_or("-".into(), |r| r.to_string());
            let count = e.payload.count().map_or("-".into(), |c| c.to_string());
            writeln!(
                out,
                "{} {} {} {} {} {}",
                e.round,
                e.src,
                e.out_port,
                e.payload.type_name(),
                rank,
                count
            )
            .unwrap();
        }
        let statuses: String = self.statuses.iter().map(|s| s.as_char()).collect();
        writeln!(out, "statuses {statuses}").unwrap();
        out
    }
}

/// Number of messages sent during a run.
pub fn message_count(trace: &Trace) -> u64 {
    trace.envelopes.len() as u64
}

/// Number of message rounds a run executed.
pub fn round_count(trace: &Trace) -> u64 {
    trace.rounds
}

/// CONGEST compliance of a finished trace: every payload fits the
/// `c * ceil(log2 n)` budget and no directed edge carries two messages in
/// one round.
pub fn check_congest(trace: &Trace, n: usize, c: u64) -> bool {
    let budget = c * ceil_log2(n as u64) as u64;
    let mut seen: HashSet<(u64, NodeId, Port)> = HashSet::with_capacity(trace.envelopes.len());
    for e in &trace.envelopes {
        if e.bit_size > budget || bit_size(&e.payload, n) > budget {
            return false;
        }
        if !seen.insert((e.round, e.src, e.out_port)) {
            return false;
        }
    }
    true
}
