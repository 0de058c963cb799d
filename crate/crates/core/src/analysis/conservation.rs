//! Trace-replay checks for the random-walk election.
//!
//! Everything here re-derives protocol-internal quantities from the wire
//! record alone (plus the topology for destination lookup), independently
//! of the node state machines:
//!
//! * Walk-count conservation - per rank, the units in flight never grow
//!   round over round, and the globally maximal rank keeps exactly its
//!   initial `quorum` units through the whole walk phase when unique.
//! * Origin in-trees - replaying the first-arrival rule yields origin
//!   pointers that form an acyclic forest rooted at the originators of the
//!   final winning rank.
//! * Notification completeness - for a unique maximal rank, the counts
//!   delivered back to its candidate plus its self-held final units equal
//!   the quorum exactly.

use std::collections::BTreeMap;

use crate::engine::{Token, Trace};
use crate::topology::Topology;

/// Outcome of the replay checks; empty `violations` means all invariants
/// held.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    /// Candidate ranks with their initiators, ascending by rank.
    pub candidates: Vec<(u64, Vec<u32>)>,
    /// Maximal candidate rank, if any candidate exists.
    pub max_rank: Option<u64>,
    /// Whether exactly one candidate drew the maximal rank.
    pub unique_max: bool,
    pub violations: Vec<String>,
}

impl ConservationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Arrival {
    round: u64,
    dst: usize,
    in_port: u32,
    src: usize,
    token: Token,
}

/// Replay a finished run of the walk election and check its conservation
/// invariants. `tau` and `quorum` must match the parameters the run used.
pub fn check_walk_conservation(
    trace: &Trace,
    topology: &Topology,
    tau: u64,
    quorum: u64,
) -> ConservationReport {
    let mut violations = Vec::new();

    // Resolve arrivals; a message sent in round r is processed in r + 1.
    let mut arrivals: Vec<Arrival> = trace
        .envelopes
        .iter()
        .map(|e| {
            let src = e.src as usize;
            let dst = topology.peer(src, e.out_port) as usize;
            Arrival { round: e.round + 1, dst, in_port: topology.port_to(dst, e.src), src, token: e.payload }
        })
        .collect();
    arrivals.sort_by_key(|a| (a.round, a.dst, a.in_port));

    // Candidates announce themselves through their round-1 walk batches.
    let mut by_rank: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for e in trace.envelopes.iter().filter(|e| e.round == 1) {
        if let Token::Walk { rank, .. } = e.payload {
            let owners = by_rank.entry(rank).or_default();
            if !owners.contains(&e.src) {
                owners.push(e.src);
            }
        }
    }
    let candidates: Vec<(u64, Vec<u32>)> = by_rank.into_iter().collect();
    let max_rank = candidates.last().map(|&(r, _)| r);
    let unique_max = candidates.last().is_some_and(|(_, owners)| owners.len() == 1);

    // Walk-count conservation: in-flight units per rank and round.
    let mut in_flight: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for e in &trace.envelopes {
        if let Token::Walk { rank, count } = e.payload {
            if e.round > tau {
                violations.push(format!("walk token of rank {rank} sent after round tau = {tau}"));
                continue;
            }
            in_flight.entry(rank).or_insert_with(|| vec![0; tau as usize + 1])[e.round as usize] +=
                count;
        }
    }
    for (rank, per_round) in &in_flight {
        let owners = candidates.iter().find(|&&(r, _)| r == *rank).map_or(0, |(_, o)| o.len());
        let expected_initial = quorum * owners as u64;
        if per_round[1] != expected_initial {
            violations.push(format!(
                "rank {rank} launched {} units, expected {expected_initial}",
                per_round[1]
            ));
        }
        for k in 2..=tau as usize {
            if per_round[k] > per_round[k - 1] {
                violations.push(format!(
                    "rank {rank} in-flight units grew from {} to {} at round {k}",
                    per_round[k - 1],
                    per_round[k]
                ));
            }
        }
        if unique_max && Some(*rank) == max_rank {
            for (k, &units) in per_round.iter().enumerate().skip(1) {
                if units != quorum {
                    violations.push(format!(
                        "maximal rank {rank} carried {units} units in round {k}, expected {quorum}"
                    ));
                }
            }
        }
    }

    // Origin replay: first arrival of each node's best rank so far, ports
    // ascending within a round, mirroring the discard rule.
    let n = topology.n();
    let mut winner: Vec<Option<u64>> = vec![None; n];
    let mut origin: Vec<Option<usize>> = vec![None; n];
    if let Some((top_rank, owners)) = candidates.last() {
        for (rank, owners) in &candidates {
            for &owner in owners {
                winner[owner as usize] = Some(*rank);
            }
        }
        for a in arrivals.iter().filter(|a| a.round <= tau + 1) {
            if let Token::Walk { rank, .. } = a.token {
                if winner[a.dst].is_none_or(|w| rank > w) {
                    winner[a.dst] = Some(rank);
                    origin[a.dst] = Some(a.src);
                }
            }
        }
        // Follow origin chains of the final winning rank; they must reach
        // an originator without revisiting a node.
        for v in 0..n {
            if winner[v] != Some(*top_rank) {
                continue;
            }
            let mut current = v;
            let mut steps = 0usize;
            loop {
                match origin[current] {
                    None => {
                        if !owners.contains(&(current as u32)) {
                            violations.push(format!(
                                "origin chain from node {v} ends at {current}, not an originator of rank {top_rank}"
                            ));
                        }
                        break;
                    }
                    Some(next) => {
                        if winner[next] != Some(*top_rank) {
                            violations.push(format!(
                                "origin chain from node {v} leaves the winning rank at node {next}"
                            ));
                            break;
                        }
                        current = next;
                        steps += 1;
                        if steps > n {
                            violations.push(format!("origin chain from node {v} cycles"));
                            break;
                        }
                    }
                }
            }
        }

        // Notification completeness for a unique maximal rank.
        if unique_max {
            let originator = owners[0] as usize;
            let delivered: u64 = arrivals
                .iter()
                .filter(|a| a.dst == originator)
                .filter_map(|a| match a.token {
                    Token::Win { rank, count } if rank == *top_rank => Some(count),
                    _ => None,
                })
                .sum();
            let self_held: u64 = arrivals
                .iter()
                .filter(|a| a.round == tau + 1 && a.dst == originator)
                .filter_map(|a| match a.token {
                    Token::Walk { rank, count } if rank == *top_rank => Some(count),
                    _ => None,
                })
                .sum();
            if delivered + self_held != quorum {
                violations.push(format!(
                    "winner tally {} + self-held {} != quorum {quorum}",
                    delivered, self_held
                ));
            }
            // Per-round notification flow: counts sent in one round either
            // reach the originator next round or are re-sent.
            let win_sent: Vec<u64> = (0..=2 * tau + 2)
                .map(|k| {
                    trace
                        .envelopes
                        .iter()
                        .filter(|e| e.round == k)
                        .filter_map(|e| match e.payload {
                            Token::Win { rank, count } if rank == *top_rank => Some(count),
                            _ => None,
                        })
                        .sum()
                })
                .collect();
            for k in (tau + 1)..=(2 * tau) {
                let delivered_k: u64 = arrivals
                    .iter()
                    .filter(|a| a.round == k + 1 && a.dst == originator)
                    .filter_map(|a| match a.token {
                        Token::Win { rank, count } if rank == *top_rank => Some(count),
                        _ => None,
                    })
                    .sum();
                let sent_k = win_sent[k as usize];
                let resent = win_sent[k as usize + 1];
                if sent_k != delivered_k + resent {
                    violations.push(format!(
                        "notification flow broke at round {k}: sent {sent_k}, delivered {delivered_k}, re-sent {resent}"
                    ));
                }
            }
        }
    }

    ConservationReport { candidates, max_rank, unique_max, violations }
}
