//! Two-round quorum election for complete networks.
//!
//! Round 1: every node flips the candidacy coin. Non-candidates settle on
//! `NonElected` immediately but keep serving as referees. Each candidate
//! draws a rank from `{1..n^4}` and announces it to `min(quorum, degree)`
//! referees sampled without replacement over its ports.
//!
//! Round 2: every node that received announcements replies with a single
//! notification on the port that delivered the maximum rank (ties: lowest
//! in-port, so no referee ever notifies twice).
//!
//! Decision: a candidate notified by all of its referees wins.

use super::{draw_candidacy, unexpected, Params, ProtocolError};
use crate::engine::{Delivery, NodeCtx, Protocol, Status, StepError, Token};
use crate::rng::NodeRng;
use crate::topology::{sample_distinct_ports, Port, Topology};

pub struct Alg1 {
    params: Params,
}

impl Alg1 {
    pub fn new(params: Params) -> Result<Self, ProtocolError> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Standard parameters for a complete network of `n` nodes.
    pub fn for_network(n: usize) -> Result<Self, ProtocolError> {
        Self::new(Params::for_network(n)?)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }
}

#[derive(Debug, Clone)]
pub struct Alg1Node {
    candidacy: Option<Candidacy>,
    status: Status,
}

#[derive(Debug, Clone)]
struct Candidacy {
    rank: u64,
    referees: u64,
}

impl Protocol for Alg1 {
    type Node = Alg1Node;

    fn name(&self) -> &'static str {
        "alg1"
    }

    fn message_rounds(&self) -> u64 {
        2
    }

    fn validate_topology(&self, topology: &Topology) -> Result<(), crate::engine::EngineError> {
        if !topology.is_complete() {
            return Err(crate::engine::EngineError::Precondition(
                "complete-network election requires a complete topology".into(),
            ));
        }
        if topology.n() != self.params.n {
            return Err(crate::engine::EngineError::Precondition(format!(
                "parameters were built for n = {}, topology has n = {}",
                self.params.n,
                topology.n()
            )));
        }
        Ok(())
    }

    fn init(&self, _ctx: &NodeCtx) -> Self::Node {
        Alg1Node { candidacy: None, status: Status::Undecided }
    }

    fn round(
        &self,
        node: &mut Self::Node,
        ctx: &NodeCtx,
        round: u64,
        inbox: &[Delivery],
        rng: &mut NodeRng,
    ) -> Result<Vec<(Port, Token)>, StepError> {
        match round {
            1 => {
                let Some(rank) = draw_candidacy(&self.params, rng.rng()) else {
                    node.status = Status::NonElected;
                    return Ok(Vec::new());
                };
                let referees = (self.params.quorum as usize).min(ctx.degree);
                node.candidacy = Some(Candidacy { rank, referees: referees as u64 });
                let ports = sample_distinct_ports(ctx.degree, referees, rng.rng());
                Ok(ports.into_iter().map(|p| (p, Token::Candidate { rank })).collect())
            }
            2 => {
                // Referee step: one notification to the maximum received
                // rank; sorted inbox makes "lowest in-port" the first max.
                let mut best: Option<(u64, Port)> = None;
                for d in inbox {
                    let Token::Candidate { rank } = d.token else {
                        return Err(unexpected(&d.token, "the referee round"));
                    };
                    if best.is_none_or(|(r, _)| rank > r) {
                        best = Some((rank, d.in_port));
                    }
                }
                Ok(best.map(|(_, port)| (port, Token::Notify)).into_iter().collect())
            }
            _ => Err(StepError::new(format!("unexpected round {round}"))),
        }
    }

    fn finalize(
        &self,
        node: &mut Self::Node,
        _ctx: &NodeCtx,
        inbox: &[Delivery],
    ) -> Result<Status, StepError> {
        let mut tally = 0u64;
        for d in inbox {
            if !matches!(d.token, Token::Notify) {
                return Err(unexpected(&d.token, "the decision step"));
            }
            tally += 1;
        }
        match &node.candidacy {
            Some(c) => {
                if tally > c.referees {
                    return Err(StepError::new(format!(
                        "candidate of rank {} received {tally} notifications from {} referees",
                        c.rank, c.referees
                    )));
                }
                node.status = if tally == c.referees { Status::Elected } else { Status::NonElected };
            }
            None => {
                if tally > 0 {
                    return Err(StepError::new("non-candidate received a notification"));
                }
                node.status = Status::NonElected;
            }
        }
        Ok(node.status)
    }
}
