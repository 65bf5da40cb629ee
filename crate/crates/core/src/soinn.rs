//! Streaming topology-learning clusterer.
//!
//! Nodes are prototype vectors connected by aging edges. An input either
//! lands inside the similarity thresholds of its two nearest nodes (a win:
//! the winner and its neighbors move toward the input) or spawns a new node.
//! Edges not refreshed by wins age out, and a periodic cleanup removes
//! isolated nodes, which is what prunes noise. The win cap `n` bounds how
//! often a node may absorb wins before deferring to the second winner,
//! which controls how fine the compressed representation stays.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node identifier, unique within one network for its whole lifetime.
pub type NodeId = u64;

#[derive(Debug, Error)]
pub enum SoinnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input component {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("network has {0} nodes; operation needs at least 2")]
    TooFewNodes(usize),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

/// Tunable parameters. `win_cap` = 0 disables the cap rule entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoinnParams {
    /// Maximum wins a node absorbs before deferring to the second winner
    /// (0 disables the rule).
    pub win_cap: u64,
    /// Edges older than this are deleted.
    pub age_max: u32,
    /// Cleanup period, counted in processed inputs.
    pub lambda: u64,
    /// Neighbor weights move at 1/(divisor * wins) of the winner rate.
    pub neighbor_rate_divisor: f64,
}

impl Default for SoinnParams {
    fn default() -> Self {
        SoinnParams {
            win_cap: 0,
            age_max: 100,
            lambda: 100,
            neighbor_rate_divisor: 100.0,
        }
    }
}

impl SoinnParams {
    pub fn with_win_cap(mut self, win_cap: u64) -> Self {
        self.win_cap = win_cap;
        self
    }

    fn validate(&self) {
        assert!(self.age_max >= 1, "age_max must be >= 1");
        assert!(self.lambda >= 1, "lambda must be >= 1");
        assert!(
            self.neighbor_rate_divisor > 0.0,
            "neighbor_rate_divisor must be positive"
        );
    }
}

/// A prototype node: weight vector plus its win count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoinnNode {
    pub weight: Vec<f64>,
    pub wins: u64,
}

/// Outcome of processing one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessEvent {
    /// The input became a new node.
    NodeCreated(NodeId),
    /// The input was absorbed; carries the node that received the win.
    WinnerUpdated(NodeId),
}

/// The node/edge graph with its processing state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoinnNetwork {
    params: SoinnParams,
    dimension: usize,
    nodes: BTreeMap<NodeId, SoinnNode>,
    /// Edge ages keyed by normalized (low, high) id pairs.
    #[serde(with = "edge_map_serde")]
    edges: BTreeMap<(NodeId, NodeId), u32>,
    inputs_seen: u64,
    next_id: NodeId,
}

/// Serializes the edge map as a list of (low, high, age) triples; tuple map
/// keys have no JSON representation.
mod edge_map_serde {
    use super::NodeId;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(NodeId, NodeId), u32>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<(NodeId, NodeId, u32)> =
            map.iter().map(|((a, b), age)| (*a, *b, *age)).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(NodeId, NodeId), u32>, D::Error> {
        let entries = Vec::<(NodeId, NodeId, u32)>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|(a, b, age)| ((a, b), age))
            .collect())
    }
}

fn edge_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Σ(aᵢ − bᵢ)². Errors on dimension mismatch.
pub fn squared_distance(a: &[f64], b: &[f64]) -> Result<f64, SoinnError> {
    if a.len() != b.len() {
        return Err(SoinnError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum())
}

impl SoinnNetwork {
    pub fn new(dimension: usize, params: SoinnParams) -> Self {
        params.validate();
        SoinnNetwork {
            params,
            dimension,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            inputs_seen: 0,
            next_id: 0,
        }
    }

    pub fn params(&self) -> &SoinnParams {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn inputs_seen(&self) -> u64 {
        self.inputs_seen
    }

    pub fn node(&self, id: NodeId) -> Option<&SoinnNode> {
        self.nodes.get(&id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &SoinnNode)> {
        self.nodes.iter().map(|(id, n)| (*id, n))
    }

    /// Edges as (low id, high id, age), in key order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        self.edges.iter().map(|((a, b), age)| (*a, *b, *age))
    }

    fn neighbors_of(&self, id: NodeId) -> Vec<NodeId> {
        self.edges
            .keys()
            .filter_map(|(a, b)| {
                if *a == id {
                    Some(*b)
                } else if *b == id {
                    Some(*a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn create_node(&mut self, weight: Vec<f64>) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        self.nodes.insert(id, SoinnNode { weight, wins: 0 });
        id
    }

    fn check_input(&self, x: &[f64]) -> Result<(), SoinnError> {
        if x.len() != self.dimension {
            return Err(SoinnError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(SoinnError::NonFiniteInput { index });
        }
        Ok(())
    }

    /// Nearest and second-nearest nodes to `x` by squared distance; ties go
    /// to the smaller node id.
    pub fn find_winners(&self, x: &[f64]) -> Result<(NodeId, NodeId), SoinnError> {
        if self.nodes.len() < 2 {
            return Err(SoinnError::TooFewNodes(self.nodes.len()));
        }
        let mut best: Option<(NodeId, f64)> = None;
        let mut second: Option<(NodeId, f64)> = None;
        for (id, node) in &self.nodes {
            let dist = squared_distance(x, &node.weight)?;
            match best {
                Some((_, best_dist)) if dist >= best_dist => match second {
                    Some((_, second_dist)) if dist >= second_dist => {}
                    _ => second = Some((*id, dist)),
                },
                _ => {
                    second = best;
                    best = Some((*id, dist));
                }
            }
        }
        Ok((best.unwrap().0, second.unwrap().0))
    }

    /// Per-node similarity radius: the largest squared distance to a
    /// neighbor when the node has edges, otherwise the smallest squared
    /// distance to any other node.
    pub fn similarity_threshold(&self, id: NodeId) -> Result<f64, SoinnError> {
        let node = self.nodes.get(&id).ok_or(SoinnError::UnknownNode(id))?;
        if self.nodes.len() < 2 {
            return Err(SoinnError::TooFewNodes(self.nodes.len()));
        }
        let neighbors = self.neighbors_of(id);
        if neighbors.is_empty() {
            let mut min = f64::INFINITY;
            for (other_id, other) in &self.nodes {
                if *other_id == id {
                    continue;
                }
                min = min.min(squared_distance(&node.weight, &other.weight)?);
            }
            Ok(min)
        } else {
            let mut max = 0.0f64;
            for n in neighbors {
                max = max.max(squared_distance(&node.weight, &self.nodes[&n].weight)?);
            }
            Ok(max)
        }
    }

    /// Feeds one input through the network.
    pub fn process_input(&mut self, x: &[f64]) -> Result<ProcessEvent, SoinnError> {
        self.check_input(x)?;
        self.inputs_seen += 1;

        if self.nodes.len() < 2 {
            let id = self.create_node(x.to_vec());
            return Ok(ProcessEvent::NodeCreated(id));
        }

        let (s1, s2) = self.find_winners(x)?;
        let d1 = squared_distance(x, &self.nodes[&s1].weight)?;
        let d2 = squared_distance(x, &self.nodes[&s2].weight)?;
        if d1 > self.similarity_threshold(s1)? || d2 > self.similarity_threshold(s2)? {
            let id = self.create_node(x.to_vec());
            return Ok(ProcessEvent::NodeCreated(id));
        }

        // Win-cap rule: a saturated first winner defers to the second; when
        // both are saturated the input becomes a node instead.
        let cap = self.params.win_cap;
        let receiver = if cap == 0 {
            s1
        } else if self.nodes[&s1].wins <= cap {
            s1
        } else if self.nodes[&s2].wins <= cap {
            s2
        } else {
            let id = self.create_node(x.to_vec());
            return Ok(ProcessEvent::NodeCreated(id));
        };

        // Refresh the winner pair's edge, age the receiver's other edges,
        // drop the expired ones.
        self.edges.insert(edge_key(s1, s2), 0);
        let pair_key = edge_key(s1, s2);
        let incident: Vec<(NodeId, NodeId)> = self
            .edges
            .keys()
            .filter(|key| (key.0 == receiver || key.1 == receiver) && **key != pair_key)
            .cloned()
            .collect();
        for key in incident {
            let age = self.edges.get_mut(&key).unwrap();
            *age += 1;
            if *age > self.params.age_max {
                self.edges.remove(&key);
            }
        }

        // Move the receiver and, more slowly, its current neighbors.
        let node = self.nodes.get_mut(&receiver).unwrap();
        node.wins += 1;
        let wins = node.wins;
        let rate = 1.0 / wins as f64;
        for (w, xi) in node.weight.iter_mut().zip(x) {
            *w += rate * (xi - *w);
        }
        let neighbor_rate = 1.0 / (self.params.neighbor_rate_divisor * wins as f64);
        for n in self.neighbors_of(receiver) {
            let node = self.nodes.get_mut(&n).unwrap();
            for (w, xi) in node.weight.iter_mut().zip(x) {
                *w += neighbor_rate * (xi - *w);
            }
        }

        if self.inputs_seen % self.params.lambda == 0 {
            self.cleanup();
        }
        Ok(ProcessEvent::WinnerUpdated(receiver))
    }

    /// Drops expired edges, then removes isolated nodes. A floor of two
    /// nodes is kept (highest win counts first, then lower ids).
    pub fn cleanup(&mut self) -> usize {
        self.edges.retain(|_, age| *age <= self.params.age_max);
        let connected: BTreeSet<NodeId> = self
            .edges
            .keys()
            .flat_map(|(a, b)| [*a, *b])
            .collect();
        let isolated: Vec<NodeId> = self
            .nodes
            .keys()
            .filter(|id| !connected.contains(id))
            .cloned()
            .collect();
        let keep = 2usize.saturating_sub(connected.len());
        let mut removable = isolated;
        if keep > 0 && !removable.is_empty() {
            // Keep the strongest isolated nodes to preserve the floor.
            let mut ranked = removable.clone();
            ranked.sort_by_key(|id| (std::cmp::Reverse(self.nodes[id].wins), *id));
            let kept: BTreeSet<NodeId> = ranked.into_iter().take(keep).collect();
            removable.retain(|id| !kept.contains(id));
        }
        for id in &removable {
            self.nodes.remove(id);
        }
        removable.len()
    }

    /// Snapshot of node weights in id order.
    pub fn export_nodes(&self) -> Vec<Vec<f64>> {
        self.nodes.values().map(|n| n.weight.clone()).collect()
    }

    /// Number of connected components of the node/edge graph.
    pub fn connected_components(&self) -> usize {
        let mut unvisited: BTreeSet<NodeId> = self.nodes.keys().cloned().collect();
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (a, b) in self.edges.keys() {
            adjacency.entry(*a).or_default().push(*b);
            adjacency.entry(*b).or_default().push(*a);
        }
        let mut components = 0;
        while let Some(start) = unvisited.iter().next().cloned() {
            components += 1;
            let mut stack = vec![start];
            unvisited.remove(&start);
            while let Some(id) = stack.pop() {
                if let Some(neigh) = adjacency.get(&id) {
                    for n in neigh {
                        if unvisited.remove(n) {
                            stack.push(*n);
                        }
                    }
                }
            }
        }
        components
    }

    /// Total wins absorbed across all nodes.
    pub fn total_wins(&self) -> u64 {
        self.nodes.values().map(|n| n.wins).sum()
    }

    /// Checks the structural invariants; used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        for ((a, b), age) in &self.edges {
            if a == b {
                return Err(format!("self edge on node {a}"));
            }
            if a > b {
                return Err(format!("unnormalized edge key ({a}, {b})"));
            }
            if !self.nodes.contains_key(a) || !self.nodes.contains_key(b) {
                return Err(format!("edge ({a}, {b}) references a removed node"));
            }
            if *age > self.params.age_max {
                return Err(format!("edge ({a}, {b}) age {age} exceeds age_max"));
            }
        }
        for (id, node) in &self.nodes {
            if node.weight.len() != self.dimension {
                return Err(format!("node {id} has wrong dimension"));
            }
            if node.weight.iter().any(|w| !w.is_finite()) {
                return Err(format!("node {id} has a non-finite weight"));
            }
        }
        if self.total_wins() > self.inputs_seen {
            return Err("total wins exceed inputs seen".to_string());
        }
        Ok(())
    }
}
