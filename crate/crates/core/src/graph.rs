//! Undirected, integer-weighted graph shared by the co-citation, Pathfinder
//! and centrality code.

use serde::{Deserialize, Serialize};

use crate::unionfind::UnionFind;

/// Aggregation level of a co-citation network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Work,
    Journal,
    Field,
    MainField,
    Area,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Work => "work",
            Level::Journal => "journal",
            Level::Field => "field",
            Level::MainField => "main_field",
            Level::Area => "area",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "work" => Level::Work,
            "journal" => Level::Journal,
            "field" => Level::Field,
            "main_field" => Level::MainField,
            "area" => Level::Area,
            other => return Err(format!("unknown level {other:?}")),
        })
    }
}

/// How co-citations are counted above the work level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingMode {
    /// Each citing entry adds 1 to each pair of distinct units it cites.
    #[default]
    Set,
    /// Each co-cited pair of works adds 1 to each pair of their distinct units.
    PairSum,
}

impl CountingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CountingMode::Set => "set",
            CountingMode::PairSum => "pair_sum",
        }
    }
}

impl std::str::FromStr for CountingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set" => Ok(CountingMode::Set),
            "pair_sum" => Ok(CountingMode::PairSum),
            other => Err(format!("unknown counting mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    /// References in the corpus that reach this unit.
    pub citations: u64,
    pub area_label: Option<String>,
    pub areas: Vec<String>,
    pub main_fields: Vec<String>,
    pub open_access: Option<bool>,
}

impl Node {
    pub fn bare(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
            citations: 0,
            area_label: None,
            areas: Vec::new(),
            main_fields: Vec::new(),
            open_access: None,
        }
    }
}

/// An undirected edge with `source < target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub source: u32,
    pub target: u32,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("edge ({0}, {1}) references a missing node")]
    MissingNode(u32, u32),
    #[error("edge ({0}, {1}) has zero weight")]
    ZeroWeight(u32, u32),
    #[error("edge ({0}, {1}) appears twice")]
    DuplicateEdge(u32, u32),
    #[error("node ids must be unique and sorted; offending id {0:?}")]
    NodeOrder(String),
}

/// Nodes are kept sorted by id and edges sorted by canonical pair, so every
/// traversal and export is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoCitationGraph {
    pub level: Level,
    pub mode: CountingMode,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    #[serde(skip)]
    offsets: Vec<usize>,
    /// `(neighbor, edge index)` sorted by neighbor within each node's slice.
    #[serde(skip)]
    adjacency: Vec<(u32, u32)>,
}

impl CoCitationGraph {
    /// Builds a graph from nodes sorted by id and canonical edges in any order.
    pub fn new(level: Level, mode: CountingMode, nodes: Vec<Node>, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        for w in nodes.windows(2) {
            if w[0].id >= w[1].id {
                return Err(GraphError::NodeOrder(w[1].id.clone()));
            }
        }
        let n = nodes.len() as u32;
        for e in edges.iter_mut() {
            if e.source > e.target {
                std::mem::swap(&mut e.source, &mut e.target);
            }
            if e.source == e.target {
                return Err(GraphError::SelfLoop(e.source));
            }
            if e.target >= n {
                return Err(GraphError::MissingNode(e.source, e.target));
            }
            if e.weight == 0 {
                return Err(GraphError::ZeroWeight(e.source, e.target));
            }
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if (w[0].source, w[0].target) == (w[1].source, w[1].target) {
                return Err(GraphError::DuplicateEdge(w[0].source, w[0].target));
            }
        }
        Ok(Self::assemble(level, mode, nodes, edges))
    }

    /// Builds a graph from an edge list over nodes `0..n` named by index
    /// (zero-padded so that id order matches index order).
    pub fn from_edges(n: usize, edges: &[(u32, u32, u64)]) -> Result<Self, GraphError> {
        let width = n.to_string().len();
        let nodes = (0..n).map(|i| Node::bare(format!("{i:0width$}"))).collect();
        let edges = edges
            .iter()
            .map(|&(source, target, weight)| Edge { source, target, weight })
            .collect();
        Self::new(Level::Work, CountingMode::Set, nodes, edges)
    }

    fn assemble(level: Level, mode: CountingMode, nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        let n = nodes.len();
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.source as usize] += 1;
            degree[e.target as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0u32, 0u32); offsets[n]];
        for (idx, e) in edges.iter().enumerate() {
            adjacency[fill[e.source as usize]] = (e.target, idx as u32);
            fill[e.source as usize] += 1;
            adjacency[fill[e.target as usize]] = (e.source, idx as u32);
            fill[e.target as usize] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            level,
            mode,
            nodes,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: u32) -> &Node {
        &self.nodes[idx as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.nodes
            .binary_search_by(|n| n.id.as_str().cmp(id))
            .ok()
            .map(|i| i as u32)
    }

    /// `(neighbor, edge index)` pairs of `node`, sorted by neighbor.
    pub fn neighbors(&self, node: u32) -> &[(u32, u32)] {
        let i = node as usize;
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.neighbors(node).len()
    }

    /// Co-citation weight between two nodes, in either order.
    pub fn weight(&self, a: u32, b: u32) -> Option<u64> {
        let nbrs = self.neighbors(a);
        nbrs.binary_search_by_key(&b, |&(v, _)| v)
            .ok()
            .map(|k| self.edges[nbrs[k].1 as usize].weight)
    }

    pub fn weight_by_id(&self, a: &str, b: &str) -> Option<u64> {
        self.weight(self.node_index(a)?, self.node_index(b)?)
    }

    /// Sum of incident edge weights per node.
    pub fn weighted_degree(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.nodes.len()];
        for e in &self.edges {
            out[e.source as usize] += e.weight;
            out[e.target as usize] += e.weight;
        }
        out
    }

    /// Connected-component label per node; labels are numbered in order of
    /// each component's smallest node index.
    pub fn component_labels(&self) -> Vec<u32> {
        let mut uf = UnionFind::new(self.nodes.len());
        for e in &self.edges {
            uf.union(e.source, e.target);
        }
        uf.labels()
    }

    /// Keeps the flagged nodes and the flagged edges whose endpoints both survive.
    pub fn subgraph(&self, keep_node: &[bool], keep_edge: &[bool]) -> Self {
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if keep_node[i] {
                remap[i] = nodes.len() as u32;
                nodes.push(node.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .zip(keep_edge)
            .filter(|(e, &k)| k && keep_node[e.source as usize] && keep_node[e.target as usize])
            .map(|(e, _)| Edge {
                source: remap[e.source as usize],
                target: remap[e.target as usize],
                weight: e.weight,
            })
            .collect();
        Self::assemble(self.level, self.mode, nodes, edges)
    }

    /// Same nodes, only the flagged edges.
    pub fn with_edges(&self, keep_edge: &[bool]) -> Self {
        self.subgraph(&vec![true; self.nodes.len()], keep_edge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_validates() {
        assert!(matches!(CoCitationGraph::from_edges(2, &[(1, 1, 1)]), Err(GraphError::SelfLoop(1))));
        assert!(matches!(CoCitationGraph::from_edges(2, &[(0, 2, 1)]), Err(GraphError::MissingNode(..))));
        assert!(matches!(CoCitationGraph::from_edges(2, &[(0, 1, 0)]), Err(GraphError::ZeroWeight(..))));
        assert!(matches!(
            CoCitationGraph::from_edges(2, &[(0, 1, 1), (1, 0, 2)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        let unsorted = vec![Node::bare("b"), Node::bare("a")];
        assert!(CoCitationGraph::new(Level::Journal, CountingMode::Set, unsorted, vec![]).is_err());
    }

    #[test]
    fn symmetric_lookup_and_degrees() {
        let g = CoCitationGraph::from_edges(4, &[(2, 0, 3), (0, 1, 2), (1, 2, 2)]).unwrap();
        assert_eq!(g.weight(0, 2), Some(3));
        assert_eq!(g.weight(2, 0), Some(3));
        assert_eq!(g.weight(0, 3), None);
        assert_eq!(g.weighted_degree(), vec![5, 4, 5, 0]);
        assert_eq!(g.edges()[0], Edge { source: 0, target: 1, weight: 2 });
        assert_eq!(g.component_labels(), vec![0, 0, 0, 1]);
        assert_eq!(g.neighbors(0), &[(1, 0), (2, 1)]);
    }

    #[test]
    fn zero_padded_ids_follow_index_order() {
        let g = CoCitationGraph::from_edges(12, &[]).unwrap();
        assert_eq!(g.node(2).id, "02");
        assert_eq!(g.node_index("11"), Some(11));
    }
}
