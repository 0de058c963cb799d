//! Message-free baseline: self-elect with probability `1/n`.

use rand::Rng;

use crate::engine::{Delivery, NodeCtx, Protocol, Status, StepError, Token};
use crate::rng::NodeRng;
use crate::topology::Port;

pub struct Naive {
    n: usize,
}

impl Naive {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "naive baseline needs n >= 1");
        Self { n }
    }
}

impl Protocol for Naive {
    type Node = Status;

    fn name(&self) -> &'static str {
        "naive"
    }

    fn message_rounds(&self) -> u64 {
        1
    }

    fn init(&self, _ctx: &NodeCtx) -> Self::Node {
        Status::Undecided
    }

    fn round(
        &self,
        node: &mut Self::Node,
        _ctx: &NodeCtx,
        _round: u64,
        _inbox: &[Delivery],
        rng: &mut NodeRng,
    ) -> Result<Vec<(Port, Token)>, StepError> {
        *node = if rng.rng().random_bool(1.0 / self.n as f64) {
            Status::Elected
        } else {
            Status::NonElected
        };
        Ok(Vec::new())
    }

    fn finalize(
        &self,
        node: &mut Self::Node,
        _ctx: &NodeCtx,
        inbox: &[Delivery],
    ) -> Result<Status, StepError> {
        if !inbox.is_empty() {
            return Err(StepError::new("baseline received a message"));
        }
        Ok(*node)
    }
}
