//! Deterministic simulator and analysis toolkit for randomized leader
//! election in synchronous message-passing networks.
//!
//! The crate is organised in layers:
//!
//! * [`topology`] - graph families (complete, hypercube, cycle, random
//!   regular), randomized port numberings, and random-walk quantities
//!   (stationary distribution, mixing time).
//! * [`engine`] - a synchronous round executor: messages sent in round `r`
//!   are delivered at the start of round `r + 1`, CONGEST bit budgets are
//!   enforced, and every run produces a complete [`engine::Trace`].
//! * [`protocols`] - the node state machines: a two-round quorum election
//!   for complete networks, a random-walk election for general graphs, the
//!   silent coin-flip baseline, and a leader-identity broadcast extension.
//! * [`analysis`] - multi-trial experiment reports, influence-cloud
//!   instrumentation, and exact/Monte-Carlo collision oracles.
//!
//! Everything is a pure function of its inputs and a `u64` seed: the same
//! seed always reproduces the same trace, report, and serialized bytes.
//! Numeric walk routines are generic over the floating-point scalar (see
//! [`scalar::Scalar`]); `f64` is the default everywhere a default applies.

pub mod analysis;
pub mod engine;
pub mod protocols;
pub mod rng;
pub mod scalar;
pub mod topology;

pub use analysis::{
    check_walk_conservation, collision_mc, estimate_success, influence_clouds,
    no_common_referee_exact, no_common_referee_f64, run_trials, run_trials_inspect, sum_squares,
    trials_to_csv, AnalysisError, ConservationReport, ExperimentReport, InfluenceCloud,
    InfluenceCloudSet, TrialRecord,
};
pub use engine::{
    check_congest, message_count, round_count, run, EngineError, Envelope, Model, ModelConfig,
    Protocol, Status, Token, Trace,
};
pub use protocols::{explicit_broadcast, Alg1, Alg2, BroadcastReport, Naive, Params, ProtocolError};
pub use scalar::Scalar;
pub use topology::walk::{mixing_time, stationary_distribution, verify_mixing, WalkError, WalkProfile};
pub use topology::{Topology, TopologyError};
