//! Synchronous round-based execution over a topology.
//!
//! Messages sent in round `r` are delivered at the start of round `r + 1`,
//! in ascending in-port order. Nodes see only `(n, own degree)` and their
//! ports - never neighbor identities. A protocol declares a fixed number
//! of message rounds; after the last one, a decision step consumes the
//! final deliveries and fixes every node's status. The decision step sends
//! nothing and is not counted in [`Trace::rounds`].

pub mod token;
pub mod trace;

use thiserror::Error;

pub use token::{bit_size, ceil_log2, quorum, rank_bits, Token};
pub use trace::{check_congest, message_count, round_count, Envelope, Status, Trace};

use crate::rng::NodeRng;
use crate::topology::{Port, Topology};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("model violation in round {round}: {detail}")]
    ModelViolation { round: u64, detail: String },
    #[error("protocol schedule of {scheduled} rounds exceeds max_rounds = {max_rounds}")]
    Runaway { scheduled: u64, max_rounds: u64 },
    #[error("protocol invariant violated at node {node} in round {round}: {detail}")]
    ProtocolViolation { node: usize, round: u64, detail: String },
    #[error("node {node} left undecided at termination")]
    Undecided { node: usize },
    #[error("protocol precondition failed: {0}")]
    Precondition(String),
}

/// Communication model for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Per-edge-per-round budget of `c * ceil(log2 n)` bits.
    Congest,
    /// No bit restriction.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub model: Model,
    /// Bit-budget factor `c`; the per-edge budget is `c * ceil(log2 n)`.
    pub bit_budget_factor: u64,
    /// Safety cap on scheduled rounds.
    pub max_rounds: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { model: Model::Congest, bit_budget_factor: 8, max_rounds: 1 << 20 }
    }
}

/// What a node knows about the world: the network size and its own degree.
#[derive(Debug, Clone, Copy)]
pub struct NodeCtx {
    pub n: usize,
    pub degree: usize,
}

/// A message delivered to a node this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub in_port: Port,
    pub token: Token,
}

/// Invariant violation raised inside a node transition; the engine wraps
/// it with the node index and round.
#[derive(Debug)]
pub struct StepError(pub String);

impl StepError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// A per-node state machine advanced one synchronous round at a time.
///
/// Implementations must be pure: state transitions may depend only on the
/// node's own state, the inbox, the context, and draws from the supplied
/// per-(node, round) stream.
pub trait Protocol {
    type Node: Send;

    fn name(&self) -> &'static str;

    /// Number of rounds in which nodes may send. The decision step runs
    /// after the last one.
    fn message_rounds(&self) -> u64;

    /// Structural precondition on the topology (e.g. completeness).
    fn validate_topology(&self, _topology: &Topology) -> Result<(), EngineError> {
        Ok(())
    }

    fn init(&self, ctx: &NodeCtx) -> Self::Node;

    /// Advance one round; returns the messages to send as `(port, token)`
    /// pairs.
    fn round(
        &self,
        node: &mut Self::Node,
        ctx: &NodeCtx,
        round: u64,
        inbox: &[Delivery],
        rng: &mut NodeRng,
    ) -> Result<Vec<(Port, Token)>, StepError>;

    /// Consume the final deliveries and decide.
    fn finalize(
        &self,
        node: &mut Self::Node,
        ctx: &NodeCtx,
        inbox: &[Delivery],
    ) -> Result<Status, StepError>;
}

/// Execute `protocol` over `topology` and record a complete [`Trace`].
///
/// Deterministic per `(topology, protocol, config, seed)`: every node's
/// coins come from a stream derived from `(seed, node, round)`.
pub fn run<P: Protocol>(
    topology: &Topology,
    protocol: &P,
    config: &ModelConfig,
    seed: u64,
) -> Result<Trace, EngineError> {
    protocol.validate_topology(topology)?;
    let rounds = protocol.message_rounds();
    if rounds > config.max_rounds {
        return Err(EngineError::Runaway { scheduled: rounds, max_rounds: config.max_rounds });
    }

    let n = topology.n();
    let budget = config.bit_budget_factor * ceil_log2(n as u64) as u64;
    let ctxs: Vec<NodeCtx> =
        (0..n).map(|v| NodeCtx { n, degree: topology.degree(v) }).collect();
    let mut nodes: Vec<P::Node> = (0..n).map(|v| protocol.init(&ctxs[v])).collect();
    let mut inboxes: Vec<Vec<Delivery>> = vec![Vec::new(); n];
    let mut envelopes: Vec<Envelope> = Vec::new();

    for round in 1..=rounds {
        let mut next_inboxes: Vec<Vec<Delivery>> = vec![Vec::new(); n];
        for v in 0..n {
            let mut rng = NodeRng::new(seed, v, round);
            let outbox = protocol
                .round(&mut nodes[v], &ctxs[v], round, &inboxes[v], &mut rng)
                .map_err(|e| EngineError::ProtocolViolation { node: v, round, detail: e.0 })?;
            let mut used_ports: Vec<Port> = Vec::with_capacity(outbox.len());
            for (port, payload) in outbox {
                if (port as usize) >= topology.degree(v) {
                    return Err(EngineError::ProtocolViolation {
                        node: v,
                        round,
                        detail: format!("out-port {port} exceeds degree {}", topology.degree(v)),
                    });
                }
                let bits = bit_size(&payload, n);
                if config.model == Model::Congest {
                    if used_ports.contains(&port) {
                        return Err(EngineError::ModelViolation {
                            round,
                            detail: format!("two messages on edge ({v}, port {port})"),
                        });
                    }
                    if bits > budget {
                        return Err(EngineError::ModelViolation {
                            round,
                            detail: format!(
                                "payload of {bits} bits exceeds budget {budget} on edge ({v}, port {port})"
                            ),
                        });
                    }
                }
                used_ports.push(port);
                let dst = topology.peer(v, port) as usize;
                let in_port = topology.port_to(dst, v as u32);
                next_inboxes[dst].push(Delivery { in_port, token: payload });
                envelopes.push(Envelope { round, src: v as u32, out_port: port, payload, bit_size: bits });
            }
        }
        for inbox in next_inboxes.iter_mut() {
            inbox.sort_by_key(|d| d.in_port);
        }
        inboxes = next_inboxes;
    }

    let mut statuses = Vec::with_capacity(n);
    let mut leader_ids = Vec::new();
    for v in 0..n {
        let status = protocol
            .finalize(&mut nodes[v], &ctxs[v], &inboxes[v])
            .map_err(|e| EngineError::ProtocolViolation { node: v, round: rounds + 1, detail: e.0 })?;
        if status == Status::Undecided {
            return Err(EngineError::Undecided { node: v });
        }
        if status == Status::Elected {
            leader_ids.push(v as u32);
        }
        statuses.push(status);
    }

    Ok(Trace { envelopes, rounds, statuses, leader_ids })
}
