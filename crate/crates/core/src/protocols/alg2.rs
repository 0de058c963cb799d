//! Random-walk election for general connected graphs.
//!
//! The schedule is fixed and known to all nodes. With walk length `tau`:
//!
//! * Rounds `1..=tau` (walk phase): candidates inject `quorum` walk units
//!   carrying their rank; every node merges same-rank arrivals, discards
//!   ranks below the best it has seen, remembers the port that first
//!   delivered the current best (`origin`), and forwards its held units by
//!   sampling ports uniformly with replacement, batched per port.
//! * Round `tau + 1`: the final walk arrivals stay put; every holder sends
//!   a winner notification carrying its held count back through `origin`.
//! * Rounds `tau + 2..=2 * tau + 1`: notification counts are accumulated
//!   and forwarded one hop per round along `origin` pointers, so they
//!   retrace the walks back to the originating candidate.
//! * Decision: a candidate whose tally reaches exactly `quorum` wins.
//!
//! A candidate treats its own rank as received in round 0: arrivals of the
//! same rank merge without touching `origin`, and a superseded candidate
//! keeps relaying for the stronger rank.

use rand::Rng;

use super::{draw_candidacy, unexpected, Params, ProtocolError};
use crate::engine::{Delivery, NodeCtx, Protocol, Status, StepError, Token};
use crate::rng::NodeRng;
use crate::topology::Port;

pub struct Alg2 {
    params: Params,
    tau: u64,
}

impl Alg2 {
    /// `params` must carry a mixing time (see [`Params::with_tau`]).
    pub fn new(params: Params) -> Result<Self, ProtocolError> {
        params.validate()?;
        let tau = params.effective_tau().ok_or_else(|| {
            ProtocolError::InvalidParams("general-graph election requires tau".into())
        })?;
        Ok(Self { params, tau })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }
}

#[derive(Debug, Clone)]
pub struct Alg2Node {
    /// Own candidacy: rank and accumulated winner-notification tally.
    own: Option<(u64, u64)>,
    /// Highest rank ever seen here (own rank counts, as of round 0).
    winner: Option<u64>,
    /// Port that first delivered `winner`; `None` while `winner` is the
    /// node's own rank.
    origin: Option<Port>,
    /// Walk units of rank `winner` currently held.
    resident: u64,
}

impl Alg2Node {
    fn absorb_walk(&mut self, d: &Delivery) -> Result<(), StepError> {
        let Token::Walk { rank, count } = d.token else {
            return Err(unexpected(&d.token, "the walk phase"));
        };
        match self.winner {
            Some(w) if rank == w => self.resident += count,
            Some(w) if rank < w => {} // dominated: discard
            _ => {
                self.winner = Some(rank);
                self.origin = Some(d.in_port);
                self.resident = count;
            }
        }
        Ok(())
    }

    /// Sum the notification counts addressed to the current winner rank.
    fn absorb_wins(&mut self, inbox: &[Delivery]) -> Result<u64, StepError> {
        let mut acc = 0u64;
        for d in inbox {
            let Token::Win { rank, count } = d.token else {
                return Err(unexpected(&d.token, "the notification phase"));
            };
            match self.winner {
                Some(w) if rank == w => acc += count,
                // A superseded rank was seen here earlier (this node
                // forwarded it), but its retrace route is gone; the count
                // is dropped and that candidate loses a competition.
                Some(w) if rank < w => {}
                _ => {
                    return Err(StepError::new(format!(
                        "winner notification for rank {rank} never seen at this node"
                    )))
                }
            }
        }
        Ok(acc)
    }

    /// Credit accumulated counts to the local candidacy or pass them on.
    fn route_wins(&mut self, acc: u64) -> Result<Vec<(Port, Token)>, StepError> {
        if acc == 0 {
            return Ok(Vec::new());
        }
        match self.origin {
            None => {
                let (rank, tally) = self
                    .own
                    .as_mut()
                    .ok_or_else(|| StepError::new("origin-less node holds no candidacy"))?;
                debug_assert_eq!(Some(*rank), self.winner);
                *tally += acc;
                Ok(Vec::new())
            }
            Some(port) => Ok(vec![(port, Token::Win { rank: self.winner.unwrap(), count: acc })]),
        }
    }
}

impl Protocol for Alg2 {
    type Node = Alg2Node;

    fn name(&self) -> &'static str {
        "alg2"
    }

    fn message_rounds(&self) -> u64 {
        2 * self.tau + 1
    }

    fn init(&self, _ctx: &NodeCtx) -> Self::Node {
        Alg2Node { own: None, winner: None, origin: None, resident: 0 }
    }

    fn round(
        &self,
        node: &mut Self::Node,
        ctx: &NodeCtx,
        round: u64,
        inbox: &[Delivery],
        rng: &mut NodeRng,
    ) -> Result<Vec<(Port, Token)>, StepError> {
        let tau = self.tau;
        if round <= tau {
            if round == 1 {
                if let Some(rank) = draw_candidacy(&self.params, rng.rng()) {
                    node.own = Some((rank, 0));
                    node.winner = Some(rank);
                    node.origin = None;
                    node.resident = self.params.quorum;
                }
            }
            for d in inbox {
                node.absorb_walk(d)?;
            }
            if node.resident == 0 {
                return Ok(Vec::new());
            }
            // Forward every held unit one uniform step, batched per port.
            let rank = node.winner.expect("resident units imply a winner");
            let mut per_port = vec![0u64; ctx.degree];
            for _ in 0..node.resident {
                per_port[rng.rng().random_range(0..ctx.degree)] += 1;
            }
            node.resident = 0;
            Ok(per_port
                .into_iter()
                .enumerate()
                .filter(|&(_, k)| k > 0)
                .map(|(p, k)| (p as Port, Token::Walk { rank, count: k }))
                .collect())
        } else if round == tau + 1 {
            // Final walk arrivals stay put and turn into notifications.
            for d in inbox {
                node.absorb_walk(d)?;
            }
            let held = node.resident;
            node.resident = 0;
            node.route_wins(held)
        } else {
            let acc = node.absorb_wins(inbox)?;
            node.route_wins(acc)
        }
    }

    fn finalize(
        &self,
        node: &mut Self::Node,
        _ctx: &NodeCtx,
        inbox: &[Delivery],
    ) -> Result<Status, StepError> {
        let acc = node.absorb_wins(inbox)?;
        if acc > 0 && node.origin.is_some() {
            return Err(StepError::new(
                "notification counts stranded at a relay after the final round",
            ));
        }
        node.route_wins(acc)?;
        Ok(match node.own {
            Some((_, tally)) if tally == self.params.quorum => Status::Elected,
            _ => Status::NonElected,
        })
    }
}
