//! Betweenness, closeness and eigenvector centrality.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::CoCitationGraph;

/// Path costs closer than this are treated as equal.
const COST_TOLERANCE: f64 = 1e-12;
/// Sources handled per parallel task; fixed so that partial sums are always
/// reduced in the same order.
const SOURCE_CHUNK: usize = 64;

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosenessVariant {
    /// `(n_component - 1) / sum of distances`, computed inside each component.
    #[default]
    Component,
    /// `sum of 1 / distance` over reachable nodes, divided by `n - 1`.
    Harmonic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CentralityOptions {
    /// Edge length `1 / w` instead of one hop per edge.
    pub use_distances: bool,
    pub closeness: ClosenessVariant,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentralityError {
    #[error("eigenvector iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCentrality {
    pub node_id: String,
    pub label: String,
    pub citations: u64,
    pub weighted_degree: u64,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityReport {
    pub weighted: bool,
    pub betweenness_normalization: &'static str,
    pub component_handling: &'static str,
    pub closeness: ClosenessVariant,
    pub nodes: Vec<NodeCentrality>,
}

#[derive(Clone, Copy, PartialEq)]
struct Queued(f64, u32);

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Sssp {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<u32>>,
    settled: Vec<bool>,
    /// Reached nodes in non-decreasing distance order.
    order: Vec<u32>,
}

impl Sssp {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            preds: vec![Vec::new(); n],
            settled: vec![false; n],
            order: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.dist[v as usize] = f64::INFINITY;
            self.sigma[v as usize] = 0.0;
            self.preds[v as usize].clear();
            self.settled[v as usize] = false;
        }
        self.order.clear();
    }

    fn run(&mut self, g: &CoCitationGraph, s: u32, lengths: Option<&[f64]>) {
        self.reset();
        self.dist[s as usize] = 0.0;
        self.sigma[s as usize] = 1.0;
        match lengths {
            None => {
                self.order.push(s);
                let mut head = 0;
                while head < self.order.len() {
                    let v = self.order[head];
                    head += 1;
                    let dv = self.dist[v as usize];
                    for &(w, _) in g.neighbors(v) {
                        let wi = w as usize;
                        if self.dist[wi].is_infinite() {
                            self.dist[wi] = dv + 1.0;
                            self.order.push(w);
                        }
                        if self.dist[wi] == dv + 1.0 {
                            self.sigma[wi] += self.sigma[v as usize];
                            self.preds[wi].push(v);
                        }
                    }
                }
            }
            Some(len) => {
                // Every node given a distance is eventually settled, so `order`
                // covers all state that `reset` has to clear.
                let settled = &mut self.settled;
                let mut heap = BinaryHeap::new();
                heap.push(Queued(0.0, s));
                while let Some(Queued(d, v)) = heap.pop() {
                    let vi = v as usize;
                    if settled[vi] || d > self.dist[vi] {
                        continue;
                    }
                    settled[vi] = true;
                    self.order.push(v);
                    for &(w, e) in g.neighbors(v) {
                        let wi = w as usize;
                        if settled[wi] {
                            continue;
                        }
                        let alt = d + len[e as usize];
                        let cur = self.dist[wi];
                        if cur.is_infinite() || alt < cur - COST_TOLERANCE * cur.max(1.0) {
                            self.dist[wi] = alt;
                            self.sigma[wi] = self.sigma[vi];
                            self.preds[wi].clear();
                            self.preds[wi].push(v);
                            heap.push(Queued(alt, w));
                        } else if (alt - cur).abs() <= COST_TOLERANCE * cur.max(1.0) {
                            self.sigma[wi] += self.sigma[vi];
                            self.preds[wi].push(v);
                        }
                    }
                }
            }
        }
    }
}

/// Per-source distance sum, reachable count and harmonic sum.
type DistanceSums = (f64, usize, f64);

/// Unnormalized betweenness (each unordered pair counted once) and the
/// per-source distance sums used for closeness.
fn betweenness_and_distances(
    g: &CoCitationGraph,
    lengths: Option<&[f64]>,
) -> (Vec<f64>, Vec<DistanceSums>) {
    let n = g.node_count();
    let sources: Vec<u32> = (0..n as u32).collect();
    let partials: Vec<(Vec<f64>, Vec<DistanceSums>)> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut bc = vec![0.0; n];
            let mut sums = Vec::with_capacity(chunk.len());
            let mut sp = Sssp::new(n);
            let mut delta = vec![0.0; n];
            for &s in chunk {
                sp.run(g, s, lengths);
                let mut total = 0.0;
                let mut harmonic = 0.0;
                for &v in &sp.order[1..] {
                    let d = sp.dist[v as usize];
                    total += d;
                    harmonic += 1.0 / d;
                }
                sums.push((total, sp.order.len(), harmonic));
                for &v in sp.order.iter() {
                    delta[v as usize] = 0.0;
                }
                for &w in sp.order.iter().rev() {
                    let wi = w as usize;
                    let coeff = (1.0 + delta[wi]) / sp.sigma[wi];
                    for &v in &sp.preds[wi] {
                        delta[v as usize] += sp.sigma[v as usize] * coeff;
                    }
                    if w != s {
                        bc[wi] += delta[wi];
                    }
                }
            }
            (bc, sums)
        })
        .collect();
    let mut bc = vec![0.0; n];
    let mut sums = Vec::with_capacity(n);
    for (part, s) in partials {
        for (acc, x) in bc.iter_mut().zip(part) {
            *acc += x;
        }
        sums.extend(s);
    }
    for x in &mut bc {
        *x /= 2.0;
    }
    (bc, sums)
}

/// Betweenness: number of shortest paths through each node, summed over
/// unordered pairs of other nodes with ties split evenly.
pub fn betweenness(g: &CoCitationGraph, use_distances: bool) -> Vec<f64> {
    let lengths = use_distances.then(|| edge_lengths(g));
    betweenness_and_distances(g, lengths.as_deref()).0
}

pub fn closeness(g: &CoCitationGraph, use_distances: bool, variant: ClosenessVariant) -> Vec<f64> {
    let lengths = use_distances.then(|| edge_lengths(g));
    let (_, sums) = betweenness_and_distances(g, lengths.as_deref());
    closeness_from(&sums, g.node_count(), variant)
}

fn closeness_from(sums: &[DistanceSums], n: usize, variant: ClosenessVariant) -> Vec<f64> {
    sums.iter()
        .map(|&(total, reached, harmonic)| match variant {
            ClosenessVariant::Component => {
                if reached <= 1 || total == 0.0 {
                    0.0
                } else {
                    (reached - 1) as f64 / total
                }
            }
            ClosenessVariant::Harmonic => {
                if n <= 1 {
                    0.0
                } else {
                    harmonic / (n - 1) as f64
                }
            }
        })
        .collect()
}

fn edge_lengths(g: &CoCitationGraph) -> Vec<f64> {
    g.edges().iter().map(|e| 1.0 / e.weight as f64).collect()
}

/// Eigenvector centrality of the weight matrix, max-normalized within each
/// component. Singleton components score 0.
///
/// Iterates `x <- (A + c I) x` with `c` the component's mean edge weight; the
/// shift leaves the leading eigenvector unchanged but keeps the iteration from
/// oscillating on bipartite components.
pub fn eigenvector(g: &CoCitationGraph) -> Result<Vec<f64>, CentralityError> {
    let n = g.node_count();
    let labels = g.component_labels();
    let count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        members[l as usize].push(v as u32);
    }
    let mut out = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    for comp in members.iter().filter(|c| c.len() > 1) {
        let mut weight_sum = 0.0;
        let mut edge_count = 0usize;
        for &v in comp {
            for &(_, e) in g.neighbors(v) {
                weight_sum += g.edges()[e as usize].weight as f64;
                edge_count += 1;
            }
        }
        let shift = weight_sum / edge_count as f64;
        for &v in comp {
            x[v as usize] = 1.0;
        }
        let mut converged = false;
        let mut residual = f64::INFINITY;
        for _ in 0..EIGEN_MAX_ITERATIONS {
            let mut max = 0.0f64;
            for &v in comp {
                let vi = v as usize;
                let mut acc = shift * x[vi];
                for &(w, e) in g.neighbors(v) {
                    acc += g.edges()[e as usize].weight as f64 * x[w as usize];
                }
                next[vi] = acc;
                max = max.max(acc);
            }
            residual = 0.0;
            for &v in comp {
                let vi = v as usize;
                let y = next[vi] / max;
                residual = residual.max((y - x[vi]).abs());
                x[vi] = y;
            }
            if residual < EIGEN_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(CentralityError::NoConvergence {
                iterations: EIGEN_MAX_ITERATIONS,
                residual,
            });
        }
        for &v in comp {
            out[v as usize] = x[v as usize];
        }
    }
    Ok(out)
}

pub fn centralities(g: &CoCitationGraph, options: CentralityOptions) -> Result<CentralityReport, CentralityError> {
    let lengths = options.use_distances.then(|| edge_lengths(g));
    let (bc, sums) = betweenness_and_distances(g, lengths.as_deref());
    let close = closeness_from(&sums, g.node_count(), options.closeness);
    let eig = eigenvector(g)?;
    let strength = g.weighted_degree();
    let nodes = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| NodeCentrality {
            node_id: node.id.clone(),
            label: node.label.clone(),
            citations: node.citations,
            weighted_degree: strength[i],
            betweenness: bc[i],
            closeness: close[i],
            eigenvector: eig[i],
        })
        .collect();
    Ok(CentralityReport {
        weighted: options.use_distances,
        betweenness_normalization: "unnormalized_pairs",
        component_handling: "per_component",
        closeness: options.closeness,
        nodes,
    })
}
