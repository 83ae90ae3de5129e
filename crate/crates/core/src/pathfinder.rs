//! Pathfinder network scaling at r = ∞, q = n − 1 over inverse co-citation
//! distances.

use std::cmp::Ordering;

use serde::Serialize;

use crate::graph::CoCitationGraph;
use crate::unionfind::UnionFind;

/// Default node limit for [`pfnet_oracle`].
pub const ORACLE_MAX_NODES: usize = 200;

/// A positive rational distance `num / den`, compared exactly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Distance {
    pub num: u64,
    pub den: u64,
}

impl Distance {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num > 0 && den > 0, "distances must be positive");
        Self { num, den }
    }

    /// `1 / weight`.
    pub fn inverse(weight: u64) -> Self {
        Self::new(1, weight)
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Distance {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DistanceEdge {
    pub source: u32,
    pub target: u32,
    pub distance: Distance,
}

/// Edges in the same order as the source graph's edge list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceGraph {
    pub node_count: usize,
    pub edges: Vec<DistanceEdge>,
}

impl DistanceGraph {
    pub fn new(node_count: usize, edges: Vec<DistanceEdge>) -> Self {
        for e in &edges {
            assert!(e.source != e.target && (e.source as usize) < node_count && (e.target as usize) < node_count);
        }
        Self { node_count, edges }
    }

    /// Multiplies every distance by `num / den`.
    pub fn scaled(&self, num: u64, den: u64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| DistanceEdge {
                distance: Distance::new(e.distance.num * num, e.distance.den * den),
                ..*e
            })
            .collect();
        Self {
            node_count: self.node_count,
            edges,
        }
    }
}

/// `d_ij = 1 / w_ij` for every edge.
pub fn to_distance(graph: &CoCitationGraph) -> DistanceGraph {
    DistanceGraph {
        node_count: graph.node_count(),
        edges: graph
            .edges()
            .iter()
            .map(|e| DistanceEdge {
                source: e.source,
                target: e.target,
                distance: Distance::inverse(e.weight),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfNetwork {
    /// Minkowski exponent; always infinite here.
    pub r: &'static str,
    /// Maximum path length considered.
    pub q: usize,
    /// One flag per source edge.
    pub retained: Vec<bool>,
}

impl PfNetwork {
    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&k| k).count()
    }

    /// The source graph restricted to retained edges; all nodes are kept.
    pub fn to_graph(&self, source: &CoCitationGraph) -> CoCitationGraph {
        assert_eq!(self.retained.len(), source.edge_count());
        source.with_edges(&self.retained)
    }

    fn new(node_count: usize, retained: Vec<bool>) -> Self {
        Self {
            r: "inf",
            q: node_count.saturating_sub(1),
            retained,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PathfinderError {
    #[error("oracle limited to {limit} nodes, graph has {nodes}")]
    OracleTooLarge { nodes: usize, limit: usize },
}

/// Keeps an edge iff no path between its endpoints has a strictly smaller
/// maximum edge distance. Edges are processed in tiers of equal distance; a
/// tier edge survives when its endpoints are still in different components
/// before any edge of its tier is merged.
pub fn pfnet_sparsify(dgraph: &DistanceGraph) -> PfNetwork {
    let mut order: Vec<u32> = (0..dgraph.edges.len() as u32).collect();
    order.sort_by(|&a, &b| dgraph.edges[a as usize].distance.cmp(&dgraph.edges[b as usize].distance));
    let mut uf = UnionFind::new(dgraph.node_count);
    let mut retained = vec![false; dgraph.edges.len()];
    for tier in order.chunk_by(|&a, &b| dgraph.edges[a as usize].distance == dgraph.edges[b as usize].distance) {
        for &i in tier {
            let e = &dgraph.edges[i as usize];
            retained[i as usize] = uf.find(e.source) != uf.find(e.target);
        }
        for &i in tier {
            let e = &dgraph.edges[i as usize];
            uf.union(e.source, e.target);
        }
    }
    PfNetwork::new(dgraph.node_count, retained)
}

/// Reference implementation: all-pairs minimax distances by dynamic closure,
/// keeping an edge iff its distance equals the minimax distance of its ends.
pub fn pfnet_oracle(dgraph: &DistanceGraph, limit: usize) -> Result<PfNetwork, PathfinderError> {
    let n = dgraph.node_count;
    if n > limit {
        return Err(PathfinderError::OracleTooLarge { nodes: n, limit });
    }
    let mut m: Vec<Option<Distance>> = vec![None; n * n];
    for e in &dgraph.edges {
        let (i, j) = (e.source as usize, e.target as usize);
        m[i * n + j] = Some(e.distance);
        m[j * n + i] = Some(e.distance);
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = m[i * n + k] else { continue };
            for j in 0..n {
                if i == j {
                    continue;
                }
                let Some(kj) = m[k * n + j] else { continue };
                let via = ik.max(kj);
                match m[i * n + j] {
                    Some(cur) if cur <= via => {}
                    _ => m[i * n + j] = Some(via),
                }
            }
        }
    }
    let retained = dgraph
        .edges
        .iter()
        .map(|e| m[e.source as usize * n + e.target as usize] == Some(e.distance))
        .collect();
    Ok(PfNetwork::new(n, retained))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dgraph(n: usize, edges: &[(u32, u32, u64)]) -> DistanceGraph {
        to_distance(&CoCitationGraph::from_edges(n, edges).unwrap())
    }

    fn kept(g: &DistanceGraph, pf: &PfNetwork) -> Vec<(u32, u32)> {
        g.edges
            .iter()
            .zip(&pf.retained)
            .filter(|(_, &k)| k)
            .map(|(e, _)| (e.source, e.target))
            .collect()
    }

    #[test]
    fn inverse_distances() {
        assert_eq!(Distance::inverse(1).value(), 1.0);
        assert_eq!(Distance::inverse(4).value(), 0.25);
        assert!(Distance::inverse(2) < Distance::inverse(1));
        assert_eq!(Distance::new(2, 4), Distance::new(1, 2));
    }

    #[test]
    fn triangle_drops_weak_edge() {
        let g = dgraph(3, &[(0, 1, 5), (1, 2, 5), (0, 2, 2)]);
        let pf = pfnet_sparsify(&g);
        assert_eq!(kept(&g, &pf), vec![(0, 1), (1, 2)]);
        assert_eq!(pf, pfnet_oracle(&g, ORACLE_MAX_NODES).unwrap());
        assert_eq!((pf.r, pf.q), ("inf", 2));
    }

    #[test]
    fn equal_triangle_keeps_all() {
        let g = dgraph(3, &[(0, 1, 3), (1, 2, 3), (0, 2, 3)]);
        assert_eq!(pfnet_sparsify(&g).retained_count(), 3);
        assert_eq!(pfnet_oracle(&g, ORACLE_MAX_NODES).unwrap().retained_count(), 3);
    }

    #[test]
    fn four_cycle_prunes_long_edge() {
        let g = DistanceGraph::new(
            4,
            [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 3)]
                .iter()
                .map(|&(s, t, d)| DistanceEdge {
                    source: s,
                    target: t,
                    distance: Distance::new(d, 1),
                })
                .collect(),
        );
        let pf = pfnet_sparsify(&g);
        assert_eq!(kept(&g, &pf), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(pf, pfnet_oracle(&g, ORACLE_MAX_NODES).unwrap());
    }

    #[test]
    fn single_edge_and_oracle_limit() {
        let g = dgraph(2, &[(0, 1, 7)]);
        assert_eq!(pfnet_oracle(&g, 10).unwrap().retained, vec![true]);
        assert!(matches!(pfnet_oracle(&g, 1), Err(PathfinderError::OracleTooLarge { .. })));
    }

    #[test]
    fn disconnected_input_passes_through() {
        let src = CoCitationGraph::from_edges(5, &[(0, 1, 2), (2, 3, 1), (3, 4, 1), (2, 4, 1)]).unwrap();
        let pf = pfnet_sparsify(&to_distance(&src));
        let out = pf.to_graph(&src);
        assert_eq!(out.node_count(), 5);
        assert_eq!(out.edge_count(), 4);
        assert_eq!(out.component_labels(), src.component_labels());
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(u32, u32, u64)>)> {
        (2usize..14).prop_flat_map(|n| {
            let pairs: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|i| (i + 1..n as u32).map(move |j| (i, j)))
                .collect();
            let m = pairs.len();
            (
                Just(n),
                prop::collection::vec((any::<bool>(), 1u64..5), m).prop_map(move |picks| {
                    pairs
                        .iter()
                        .zip(picks)
                        .filter(|(_, (keep, _))| *keep)
                        .map(|(&(i, j), (_, w))| (i, j, w))
                        .collect()
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn sparsify_matches_oracle((n, edges) in random_graph()) {
            let g = dgraph(n, &edges);
            prop_assert_eq!(pfnet_sparsify(&g), pfnet_oracle(&g, ORACLE_MAX_NODES).unwrap());
        }

        #[test]
        fn connectivity_and_scale_invariance((n, edges) in random_graph(), c_num in 1u64..50, c_den in 1u64..50) {
            let src = CoCitationGraph::from_edges(n, &edges).unwrap();
            let g = to_distance(&src);
            let pf = pfnet_sparsify(&g);
            prop_assert_eq!(pf.to_graph(&src).component_labels(), src.component_labels());
            prop_assert_eq!(pfnet_sparsify(&g.scaled(c_num, c_den)), pf);
        }

        #[test]
        fn trees_are_fixed_points(parents in prop::collection::vec((any::<prop::sample::Index>(), 1u64..9), 1..20)) {
            let edges: Vec<(u32, u32, u64)> = parents
                .iter()
                .enumerate()
                .map(|(i, (p, w))| (p.index(i + 1) as u32, i as u32 + 1, *w))
                .collect();
            let g = dgraph(parents.len() + 1, &edges);
            prop_assert!(pfnet_sparsify(&g).retained.iter().all(|&k| k));
        }
    }
}
