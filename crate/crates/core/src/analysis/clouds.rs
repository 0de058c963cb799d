//! Influence-cloud instrumentation.
//!
//! The communication graph after round `r` has a directed edge `u -> v`
//! whenever `u` sent `v` a message in some round `r' <= r`. A node is an
//! initiator if it sends its first message while still untouched - no
//! incoming edge existed before that round. An initiator's influence cloud
//! at round `r` is everything reachable from it in the communication
//! graph, tagged with the round each member joined.

use crate::engine::Trace;
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceCloud {
    pub initiator: NodeId,
    /// `(member, join_round)` ordered by join round (ties: node id); the
    /// initiator itself is the first entry with join round 0.
    pub members: Vec<(NodeId, u64)>,
}

impl InfluenceCloud {
    /// Members that had joined by the end of round `r`.
    pub fn members_at_round(&self, r: u64) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().filter(move |&&(_, jr)| jr <= r).map(|&(v, _)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceCloudSet {
    pub clouds: Vec<InfluenceCloud>,
    /// True iff the final member sets are pairwise disjoint.
    pub disjoint: bool,
    pub rounds: u64,
}

/// Reconstruct initiators and their influence clouds from a finished trace.
///
/// The topology resolves each envelope's destination; nodes themselves
/// never see identities, but the post-hoc observer does.
pub fn influence_clouds(trace: &Trace, topology: &Topology) -> InfluenceCloudSet {
    let n = trace.n();
    assert_eq!(n, topology.n(), "trace and topology disagree on n");

    let mut edges_by_round: Vec<Vec<(usize, usize)>> = vec![Vec::new(); trace.rounds as usize + 1];
    let mut first_send: Vec<Option<u64>> = vec![None; n];
    let mut first_recv: Vec<Option<u64>> = vec![None; n];
    for e in &trace.envelopes {
        let src = e.src as usize;
        let dst = topology.peer(src, e.out_port) as usize;
        edges_by_round[e.round as usize].push((src, dst));
        if first_send[src].is_none_or(|r| e.round < r) {
            first_send[src] = Some(e.round);
        }
        if first_recv[dst].is_none_or(|r| e.round < r) {
            first_recv[dst] = Some(e.round);
        }
    }

    let initiators: Vec<usize> = (0..n)
        .filter(|&v| match (first_send[v], first_recv[v]) {
            (Some(s), Some(r)) => r >= s,
            (Some(_), None) => true,
            _ => false,
        })
        .collect();

    // Grow every cloud round by round over the accumulating digraph.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut join: Vec<Vec<Option<u64>>> = initiators
        .iter()
        .map(|&u| {
            let mut j = vec![None; n];
            j[u] = Some(0);
            j
        })
        .collect();
    for round in 1..=trace.rounds {
        for &(src, dst) in &edges_by_round[round as usize] {
            adj[src].push(dst);
        }
        for cloud_join in join.iter_mut() {
            let mut queue: Vec<usize> = Vec::new();
            for &(src, dst) in &edges_by_round[round as usize] {
                if cloud_join[src].is_some() && cloud_join[dst].is_none() {
                    cloud_join[dst] = Some(round);
                    queue.push(dst);
                }
            }
            while let Some(x) = queue.pop() {
                for &y in &adj[x] {
                    if cloud_join[y].is_none() {
                        cloud_join[y] = Some(round);
                        queue.push(y);
                    }
                }
            }
        }
    }

    let mut membership_count = vec![0u32; n];
    let clouds: Vec<InfluenceCloud> = initiators
        .iter()
        .zip(&join)
        .map(|(&u, cloud_join)| {
            let mut members: Vec<(NodeId, u64)> = cloud_join
                .iter()
                .enumerate()
                .filter_map(|(v, j)| j.map(|jr| (v as NodeId, jr)))
                .collect();
            members.sort_by_key(|&(v, jr)| (jr, v));
            for &(v, _) in &members {
                membership_count[v as usize] += 1;
            }
            InfluenceCloud { initiator: u as NodeId, members }
        })
        .collect();
    let disjoint = membership_count.iter().all(|&c| c <= 1);

    InfluenceCloudSet { clouds, disjoint, rounds: trace.rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{bit_size, Envelope, Status, Token, Trace};
    use crate::topology::Topology;

    fn envelope(round: u64, src: u32, out_port: u32, n: usize) -> Envelope {
        let payload = Token::Candidate { rank: 1 };
        Envelope { round, src, out_port, payload, bit_size: bit_size(&payload, n) }
    }

    #[test]
    fn silent_trace_has_no_initiators_and_is_vacuously_disjoint() {
        let t = Topology::complete(4).unwrap();
        let trace = Trace {
            envelopes: vec![],
            rounds: 1,
            statuses: vec![Status::NonElected; 4],
            leader_ids: vec![],
        };
        let set = influence_clouds(&trace, &t);
        assert!(set.clouds.is_empty());
        assert!(set.disjoint);
    }

    #[test]
    fn shared_receiver_breaks_disjointness() {
        // Path 0 - 1 - 2; nodes 0 and 2 both message node 1 in round 1.
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let trace = Trace {
            envelopes: vec![envelope(1, 0, 0, 3), envelope(1, 2, 0, 3)],
            rounds: 1,
            statuses: vec![Status::NonElected; 3],
            leader_ids: vec![],
        };
        let set = influence_clouds(&trace, &t);
        assert_eq!(set.clouds.len(), 2);
        assert!(!set.disjoint);
        for cloud in &set.clouds {
            assert!(cloud.members.iter().any(|&(v, _)| v == 1));
        }
    }

    #[test]
    fn replier_is_not_an_initiator() {
        // 0 messages 1 in round 1; 1 replies in round 2. Only 0 initiates.
        let t = Topology::from_edges(2, &[(0, 1)]).unwrap();
        let trace = Trace {
            envelopes: vec![envelope(1, 0, 0, 2), envelope(2, 1, 0, 2)],
            rounds: 2,
            statuses: vec![Status::NonElected; 2],
            leader_ids: vec![],
        };
        let set = influence_clouds(&trace, &t);
        assert_eq!(set.clouds.len(), 1);
        assert_eq!(set.clouds[0].initiator, 0);
        assert!(set.disjoint);
        assert_eq!(set.clouds[0].members, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn reachability_extends_through_earlier_edges() {
        // Round 1: 1 -> 2. Round 2: 0 -> 1. Node 0's cloud picks up 2
        // through the pre-existing edge; both 0 and 1 initiated in their
        // first-send rounds.
        let t = Topology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let trace = Trace {
            envelopes: vec![envelope(1, 1, 1, 3), envelope(2, 0, 0, 3)],
            rounds: 2,
            statuses: vec![Status::NonElected; 3],
            leader_ids: vec![],
        };
        // port 1 of node 1 leads to 2 (neighbors sorted: [0, 2]).
        let set = influence_clouds(&trace, &t);
        let zero_cloud = set.clouds.iter().find(|c| c.initiator == 0).unwrap();
        assert_eq!(zero_cloud.members, vec![(0, 0), (1, 2), (2, 2)]);
        assert!(!set.disjoint); // node 2 sits in both clouds
    }

    #[test]
    fn alg1_disjoint_clouds_are_candidate_plus_referees() {
        use crate::engine::{run, ModelConfig};
        use crate::protocols::{Alg1, Params};
        let n = 64;
        let t = Topology::complete(n).unwrap().assign_random_ports(8);
        // Few candidates, small quorums: disjoint clouds are common.
        let params = Params::for_network(n)
            .unwrap()
            .with_candidate_prob(2.0 / n as f64)
            .with_quorum(4);
        let alg = Alg1::new(params).unwrap();
        let mut checked = 0;
        for seed in 0..40 {
            let trace = run(&t, &alg, &ModelConfig::default(), seed).unwrap();
            let set = influence_clouds(&trace, &t);
            if !set.disjoint || set.clouds.is_empty() {
                continue;
            }
            checked += 1;
            for cloud in &set.clouds {
                let mut expected: Vec<u32> = trace
                    .envelopes
                    .iter()
                    .filter(|e| e.round == 1 && e.src == cloud.initiator)
                    .map(|e| t.peer(e.src as usize, e.out_port))
                    .collect();
                expected.push(cloud.initiator);
                expected.sort_unstable();
                let mut got: Vec<u32> = cloud.members.iter().map(|&(v, _)| v).collect();
                got.sort_unstable();
                assert_eq!(got, expected);
            }
        }
        assert!(checked > 5, "expected several disjoint-cloud runs, got {checked}");
    }
}
