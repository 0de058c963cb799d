//! Graph construction and the anonymous port model.
//!
//! A [`Topology`] is an undirected, connected graph where every node labels
//! its incident edges with local port numbers `0..degree`. Protocols only
//! ever see ports, never neighbor identities. Construction validates the
//! structural invariants (symmetry, port bijectivity, connectivity) and
//! detects bipartiteness eagerly; bipartite graphs get the `lazy` walk flag
//! forced on so that random-walk quantities stay well-defined.

pub mod walk;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::rng;

/// Node index. `u32` keeps the adjacency of a 4096-node complete graph
/// comfortably in memory.
pub type NodeId = u32;
/// Local port index at a node, `0..degree`.
pub type Port = u32;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("graph generation failed: no simple connected graph after {attempts} pairing attempts")]
    GenerationFailure { attempts: u32 },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge list is not symmetric or contains self-loops/duplicates")]
    MalformedEdges,
    #[error("topology parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected graph with per-node randomized port labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    /// Sorted neighbor lists.
    adjacency: Vec<Vec<NodeId>>,
    /// `ports[v][p]` = neighbor reached through port `p` of `v`.
    ports: Vec<Vec<NodeId>>,
    /// `inv_ports[v][k]` = port of `v` leading to `adjacency[v][k]`.
    inv_ports: Vec<Vec<Port>>,
    bipartite: bool,
    lazy: bool,
}

impl Topology {
    /// Build a topology from an explicit edge list.
    ///
    /// Edges may be listed in either orientation; duplicates and self-loops
    /// are rejected. Ports start out in adjacency order (identity labeling);
    /// use [`Topology::assign_random_ports`] to randomize them.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::InvalidSize("node count must be positive".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n || u == v {
                return Err(TopologyError::MalformedEdges);
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(TopologyError::MalformedEdges);
            }
        }
        Self::from_adjacency(adjacency)
    }

    fn from_adjacency(adjacency: Vec<Vec<NodeId>>) -> Result<Self, TopologyError> {
        let n = adjacency.len();
        let bipartite = match two_color(&adjacency) {
            Coloring::Disconnected => return Err(TopologyError::Disconnected),
            Coloring::Bipartite => true,
            Coloring::OddCycle => false,
        };
        let ports: Vec<Vec<NodeId>> = adjacency.to_vec();
        let inv_ports = adjacency
            .iter()
            .map(|l| (0..l.len() as Port).collect())
            .collect();
        Ok(Self {
            n,
            adjacency,
            ports,
            inv_ports,
            bipartite,
            lazy: bipartite,
        })
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self, TopologyError> {
        if n < 2 {
            return Err(TopologyError::InvalidSize(format!(
                "complete graph needs n >= 2, got {n}"
            )));
        }
        let adjacency = (0..n)
            .map(|v| (0..n as NodeId).filter(|&u| u as usize != v).collect())
            .collect();
        Self::from_adjacency(adjacency)
    }

    /// Hypercube on `2^dim` nodes; adjacent iff indices differ in one bit.
    pub fn hypercube(dim: u32) -> Result<Self, TopologyError> {
        if dim == 0 {
            return Err(TopologyError::InvalidSize("hypercube needs dim >= 1".into()));
        }
        if dim >= 32 {
            return Err(TopologyError::InvalidSize(format!(
                "hypercube dim {dim} overflows the node-count type"
            )));
        }
        let n = 1usize << dim;
        let adjacency = (0..n)
            .map(|v| (0..dim).map(|b| (v ^ (1 << b)) as NodeId).collect::<Vec<_>>())
            .map(|mut l: Vec<NodeId>| {
                l.sort_unstable();
                l
            })
            .collect();
        Self::from_adjacency(adjacency)
    }

    /// Cycle `C_n`.
    pub fn cycle(n: usize) -> Result<Self, TopologyError> {
        if n < 3 {
            return Err(TopologyError::InvalidSize(format!("cycle needs n >= 3, got {n}")));
        }
        let edges: Vec<(NodeId, NodeId)> = (0..n)
            .map(|v| (v as NodeId, ((v + 1) % n) as NodeId))
            .collect();
        Self::from_edges(n, &edges)
    }

    /// Simple connected `d`-regular graph via pairing-model sampling.
    ///
    /// Stubs are paired off a shuffled pool; pairs that would create a
    /// self-loop or multi-edge go back into the pool for the next pass.
    /// An attempt that stops making progress, or pairs up into a
    /// disconnected graph, is thrown away; gives up after 100 attempts.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Self, TopologyError> {
        if d < 3 || d >= n {
            return Err(TopologyError::InvalidSize(format!(
                "random regular graph needs 3 <= d < n, got d={d}, n={n}"
            )));
        }
        if !(n * d).is_multiple_of(2) {
            return Err(TopologyError::InvalidSize(format!(
                "random regular graph needs n*d even, got n={n}, d={d}"
            )));
        }
        let mut gen = rng::stream(rng::derive(seed, rng::STREAM_GRAPH, 0));
        const MAX_ATTEMPTS: u32 = 100;
        'attempt: for _ in 0..MAX_ATTEMPTS {
            let mut stubs: Vec<NodeId> =
                (0..n as NodeId).flat_map(|v| std::iter::repeat_n(v, d)).collect();
            let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::with_capacity(d); n];
            while !stubs.is_empty() {
                stubs.shuffle(&mut gen);
                let mut leftover = Vec::new();
                for pair in stubs.chunks_exact(2) {
                    let (u, v) = (pair[0], pair[1]);
                    if u == v || adjacency[u as usize].contains(&v) {
                        leftover.push(u);
                        leftover.push(v);
                    } else {
                        adjacency[u as usize].push(v);
                        adjacency[v as usize].push(u);
                    }
                }
                if leftover.len() == stubs.len() {
                    continue 'attempt; // stuck: only illegal pairings remain
                }
                stubs = leftover;
            }
            for list in &mut adjacency {
                list.sort_unstable();
            }
            match Self::from_adjacency(adjacency) {
                Ok(t) => return Ok(t),
                Err(TopologyError::Disconnected) => continue 'attempt,
                Err(e) => return Err(e),
            }
        }
        Err(TopologyError::GenerationFailure { attempts: MAX_ATTEMPTS })
    }

    /// Replace every node's port map with an independent uniformly random
    /// permutation of its neighbors, deterministically per seed.
    pub fn assign_random_ports(mut self, seed: u64) -> Self {
        for v in 0..self.n {
            let mut gen = rng::stream(rng::derive(seed, rng::STREAM_PORTS, v as u64));
            self.ports[v] = self.adjacency[v].clone();
            self.ports[v].shuffle(&mut gen);
        }
        self.rebuild_inverse();
        self
    }

    fn rebuild_inverse(&mut self) {
        for v in 0..self.n {
            let mut inv = vec![0 as Port; self.degree(v)];
            for (p, &u) in self.ports[v].iter().enumerate() {
                let k = self.adjacency[v].binary_search(&u).expect("port maps to a neighbor");
                inv[k] = p as Port;
            }
            self.inv_ports[v] = inv;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Neighbor reached through `port` of `v`.
    pub fn peer(&self, v: usize, port: Port) -> NodeId {
        self.ports[v][port as usize]
    }

    /// Port of `v` that leads to neighbor `u`.
    pub fn port_to(&self, v: usize, u: NodeId) -> Port {
        let k = self.adjacency[v].binary_search(&u).expect("u is a neighbor of v");
        self.inv_ports[v][k]
    }

    pub fn ports(&self, v: usize) -> &[NodeId] {
        &self.ports[v]
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    /// Whether walks on this topology use the lazy transform. Forced on for
    /// bipartite graphs at construction.
    pub fn lazy(&self) -> bool {
        self.lazy
    }

    /// Override the lazy-walk flag. Turning it off on a bipartite graph makes
    /// mixing-time computation report a no-convergence error.
    pub fn set_lazy(&mut self, lazy: bool) {
        self.lazy = lazy;
    }

    pub fn is_complete(&self) -> bool {
        self.adjacency.iter().all(|l| l.len() == self.n - 1)
    }

    /// Canonical text serialization: byte-identical for equal topologies.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "topology v1").unwrap();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "lazy {}", if self.lazy { 1 } else { 0 }).unwrap();
        writeln!(out, "edges {}", self.edge_count()).unwrap();
        for v in 0..self.n {
            for &u in &self.adjacency[v] {
                if (v as NodeId) < u {
                    writeln!(out, "{v} {u}").unwrap();
                }
            }
        }
        writeln!(out, "ports").unwrap();
        for v in 0..self.n {
            let line: Vec<String> = self.ports[v].iter().map(|u| u.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    /// Parse the canonical text format, re-validating all invariants.
    pub fn from_canonical_text(text: &str) -> Result<Self, TopologyError> {
        let err = |line: usize, msg: &str| TopologyError::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String), TopologyError> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.to_string()))
                .ok_or_else(|| err(0, &format!("unexpected end of input, expected {expect}")))
        };
        let (ln, header) = next("header")?;
        if header != "topology v1" {
            return Err(err(ln, "expected header 'topology v1'"));
        }
        let (ln, nline) = next("n")?;
        let n: usize = nline
            .strip_prefix("n ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(ln, "expected 'n <count>'"))?;
        let (ln, lazyline) = next("lazy")?;
        let lazy = match lazyline.as_str() {
            "lazy 0" => false,
            "lazy 1" => true,
            _ => return Err(err(ln, "expected 'lazy 0|1'")),
        };
        let (ln, eline) = next("edges")?;
        let m: usize = eline
            .strip_prefix("edges ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(ln, "expected 'edges <count>'"))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, edge) = next("edge")?;
            let mut it = edge.split_whitespace();
            let u: NodeId = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(ln, "bad edge endpoint"))?;
            let v: NodeId = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(ln, "bad edge endpoint"))?;
            edges.push((u, v));
        }
        let (ln, pheader) = next("ports")?;
        if pheader != "ports" {
            return Err(err(ln, "expected 'ports'"));
        }
        let mut topo = Self::from_edges(n, &edges)?;
        for v in 0..n {
            let (ln, pline) = next("port permutation")?;
            let perm: Vec<NodeId> = pline
                .split_whitespace()
                .map(|s| s.parse::<NodeId>().map_err(|_| err(ln, "bad port entry")))
                .collect::<Result<_, _>>()?;
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != topo.adjacency[v] {
                return Err(err(ln, "port permutation is not a bijection onto the neighbor set"));
            }
            topo.ports[v] = perm;
        }
        topo.rebuild_inverse();
        topo.lazy = lazy;
        Ok(topo)
    }
}

enum Coloring {
    Bipartite,
    OddCycle,
    Disconnected,
}

/// BFS 2-coloring; also serves as the connectivity check.
fn two_color(adjacency: &[Vec<NodeId>]) -> Coloring {
    let n = adjacency.len();
    if n == 1 {
        return Coloring::Bipartite;
    }
    let mut color = vec![u8::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    color[0] = 0;
    queue.push_back(0usize);
    let mut visited = 1usize;
    let mut bipartite = true;
    while let Some(v) = queue.pop_front() {
        for &u in &adjacency[v] {
            let u = u as usize;
            if color[u] == u8::MAX {
                color[u] = 1 - color[v];
                visited += 1;
                queue.push_back(u);
            } else if color[u] == color[v] {
                bipartite = false;
            }
        }
    }
    if visited < n {
        Coloring::Disconnected
    } else if bipartite {
        Coloring::Bipartite
    } else {
        Coloring::OddCycle
    }
}

/// Sample `k` distinct ports of a degree-`deg` node, uniformly without
/// replacement (partial Fisher-Yates).
pub fn sample_distinct_ports<R: Rng>(deg: usize, k: usize, gen: &mut R) -> Vec<Port> {
    debug_assert!(k <= deg);
    let mut pool: Vec<Port> = (0..deg as Port).collect();
    for i in 0..k {
        let j = gen.random_range(i..deg);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
