//! The bundled node state machines.
//!
//! * [`Alg1`] - two-round quorum election for complete networks: candidates
//!   announce random ranks to sampled referees, referees notify the
//!   highest rank they saw, a candidate notified by every referee wins.
//! * [`Alg2`] - the general-graph variant: candidates launch batched random
//!   walks that carry their rank for `tau` rounds, intermediate nodes
//!   discard dominated ranks, and winner notifications retrace the walk
//!   origins for another `tau + 1` rounds.
//! * [`Naive`] - the silent baseline: every node elects itself with
//!   probability `1/n` and terminates without sending anything.
//! * [`explicit_broadcast`] - post-election flood spreading the leader's
//!   identity.

mod alg1;
mod alg2;
mod broadcast;
mod naive;

pub use alg1::Alg1;
pub use alg2::Alg2;
pub use broadcast::{explicit_broadcast, BroadcastReport};
pub use naive::Naive;

use thiserror::Error;

use crate::engine::{quorum, Token};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("explicit broadcast requires exactly one elected leader, found {found}")]
    LeaderCount { found: usize },
}

/// Election parameters, all derived from the known network size `n` with
/// base-2 logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n: usize,
    /// Candidacy probability `2 * log2(n) / n`, clamped to 1.
    pub candidate_prob: f64,
    /// Ranks are drawn uniformly from `{1..n^4}`.
    pub rank_domain_max: u64,
    /// Quorum size `2 * ceil(sqrt(n * log2 n))`: referees per candidate
    /// (capped at the degree when sampling without replacement) and walk
    /// tokens per candidate.
    pub quorum: u64,
    /// Mixing time of the walk, in rounds (general-graph election only).
    pub tau: Option<u64>,
    /// Slack factor applied to `tau`.
    pub tau_multiplier: f64,
}

impl Params {
    pub fn for_network(n: usize) -> Result<Self, ProtocolError> {
        if n < 2 {
            return Err(ProtocolError::InvalidParams(format!(
                "election parameters need n >= 2, got {n}"
            )));
        }
        let rank_domain_max = (n as u64).checked_pow(4).ok_or_else(|| {
            ProtocolError::InvalidParams(format!("rank domain n^4 overflows u64 for n = {n}"))
        })?;
        let nf = n as f64;
        Ok(Self {
            n,
            candidate_prob: (2.0 * nf.log2() / nf).min(1.0),
            rank_domain_max,
            quorum: quorum(n),
            tau: None,
            tau_multiplier: 1.0,
        })
    }

    pub fn with_tau(mut self, tau: u64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_tau_multiplier(mut self, multiplier: f64) -> Self {
        self.tau_multiplier = multiplier;
        self
    }

    /// Override the candidacy probability (used by reduced-traffic variants).
    pub fn with_candidate_prob(mut self, p: f64) -> Self {
        self.candidate_prob = p;
        self
    }

    /// Override the quorum size (used by reduced-traffic variants).
    pub fn with_quorum(mut self, quorum: u64) -> Self {
        self.quorum = quorum;
        self
    }

    /// The walk length the schedule is built on: `max(1, ceil(tau * mult))`.
    pub fn effective_tau(&self) -> Option<u64> {
        self.tau
            .map(|t| ((t as f64 * self.tau_multiplier).ceil() as u64).max(1))
    }

    fn validate(&self) -> Result<(), ProtocolError> {
        if !(self.candidate_prob > 0.0 && self.candidate_prob <= 1.0) {
            return Err(ProtocolError::InvalidParams(format!(
                "candidate_prob must be in (0, 1], got {}",
                self.candidate_prob
            )));
        }
        if self.quorum == 0 {
            return Err(ProtocolError::InvalidParams("quorum must be >= 1".into()));
        }
        if self.tau_multiplier <= 0.0 {
            return Err(ProtocolError::InvalidParams(format!(
                "tau_multiplier must be positive, got {}",
                self.tau_multiplier
            )));
        }
        Ok(())
    }
}

/// Candidacy coin plus rank draw, shared by both elections.
fn draw_candidacy<R: rand::Rng>(params: &Params, rng: &mut R) -> Option<u64> {
    if rng.random_bool(params.candidate_prob) {
        Some(rng.random_range(1..=params.rank_domain_max))
    } else {
        None
    }
}

fn unexpected(token: &Token, phase: &str) -> crate::engine::StepError {
    crate::engine::StepError::new(format!("unexpected {} token during {phase}", token.type_name()))
}
