//! Post-election broadcast of the leader's identity.
//!
//! On a complete network the leader reaches everyone in one round with
//! `n - 1` messages. On general graphs the identity floods outward: each
//! node forwards once, on first receipt, to every port except those it
//! received on. Counted separately from the election itself.

use super::ProtocolError;
use crate::engine::Trace;
use crate::topology::{Port, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BroadcastReport {
    pub messages: u64,
    pub rounds: u64,
    /// Nodes holding the leader's identity afterwards (always `n`).
    pub reached: usize,
}

/// Spread the elected leader's identity to every node.
///
/// Requires the trace to contain exactly one elected node.
pub fn explicit_broadcast(trace: &Trace, topology: &Topology) -> Result<BroadcastReport, ProtocolError> {
    if trace.leader_ids.len() != 1 {
        return Err(ProtocolError::LeaderCount { found: trace.leader_ids.len() });
    }
    let leader = trace.leader_ids[0] as usize;
    let n = topology.n();
    if n == 1 {
        return Ok(BroadcastReport { messages: 0, rounds: 0, reached: 1 });
    }
    if topology.is_complete() {
        return Ok(BroadcastReport { messages: (n - 1) as u64, rounds: 1, reached: n });
    }

    let mut informed = vec![false; n];
    informed[leader] = true;
    let mut reached = 1usize;
    let mut messages = 0u64;
    let mut rounds = 0u64;
    // (node, ports the identity arrived on - not forwarded back)
    let mut frontier: Vec<(usize, Vec<Port>)> = vec![(leader, Vec::new())];
    while !frontier.is_empty() {
        let sent_before = messages;
        let mut arrivals: Vec<Vec<Port>> = vec![Vec::new(); n];
        for (v, exclude) in frontier.drain(..) {
            for p in 0..topology.degree(v) as Port {
                if exclude.contains(&p) {
                    continue;
                }
                messages += 1;
                let dst = topology.peer(v, p) as usize;
                arrivals[dst].push(topology.port_to(dst, v as u32));
            }
        }
        if messages > sent_before {
            rounds += 1;
        }
        for (dst, ports) in arrivals.into_iter().enumerate() {
            if !ports.is_empty() && !informed[dst] {
                informed[dst] = true;
                reached += 1;
                frontier.push((dst, ports));
            }
        }
    }
    debug_assert_eq!(reached, n, "flood on a connected graph reaches everyone");
    Ok(BroadcastReport { messages, rounds, reached })
}
