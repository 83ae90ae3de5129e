//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use cocite::corpus::{
    link_and_classify, ClassificationScheme, Funnel, Issn, JournalRecord, LinkOptions, LinkedCorpus,
    ReferenceRecord,
};
use cocite::graph::{CoCitationGraph, CountingMode};

pub fn scheme() -> ClassificationScheme {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/asjc_scheme.csv");
    cocite::corpus::load_scheme(std::path::Path::new(path)).expect("bundled scheme loads")
}

pub fn bundled_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

/// Each possible edge present with probability `density`, weights in `1..=max_weight`.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64, max_weight: u64) -> CoCitationGraph {
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.random::<f64>() < density {
                edges.push((a, b, rng.random_range(1..=max_weight)));
            }
        }
    }
    CoCitationGraph::from_edges(n, &edges).expect("valid edges")
}

/// A random spanning tree plus extra edges; `weight` draws each edge weight.
pub fn random_connected_graph(
    rng: &mut impl Rng,
    n: usize,
    extra_density: f64,
    mut weight: impl FnMut(&mut dyn rand::RngCore) -> u64,
) -> CoCitationGraph {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.random::<f64>() < extra_density {
                pairs.insert((a, b));
            }
        }
    }
    let edges: Vec<(u32, u32, u64)> = pairs.into_iter().map(|(a, b)| (a, b, weight(rng))).collect();
    CoCitationGraph::from_edges(n, &edges).expect("valid edges")
}

/// Prim's algorithm on distance `1 / weight` (so the heaviest crossing edge
/// is the shortest), breaking ties uniformly at random. Returns edge indices.
pub fn prim_random_ties(g: &CoCitationGraph, rng: &mut impl Rng) -> BTreeSet<usize> {
    let n = g.node_count();
    let mut in_tree = vec![false; n];
    let mut tree = BTreeSet::new();
    if n == 0 {
        return tree;
    }
    in_tree[rng.random_range(0..n)] = true;
    for _ in 1..n {
        let mut best: Vec<usize> = Vec::new();
        let mut best_w = 0u64;
        for (i, e) in g.edges().iter().enumerate() {
            if in_tree[e.source as usize] == in_tree[e.target as usize] {
                continue;
            }
            if e.weight > best_w {
                best_w = e.weight;
                best.clear();
            }
            if e.weight == best_w {
                best.push(i);
            }
        }
        let pick = *best.choose(rng).expect("graph is connected");
        let e = &g.edges()[pick];
        in_tree[e.source as usize] = true;
        in_tree[e.target as usize] = true;
        tree.insert(pick);
    }
    tree
}

fn lengths(g: &CoCitationGraph, use_distances: bool) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| if use_distances { 1.0 / e.weight as f64 } else { 1.0 })
        .collect()
}

/// All-pairs shortest distances by Floyd–Warshall.
pub fn floyd_warshall(g: &CoCitationGraph, use_distances: bool) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let len = lengths(g, use_distances);
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (e, l) in g.edges().iter().zip(&len) {
        let (a, b) = (e.source as usize, e.target as usize);
        d[a][b] = d[a][b].min(*l);
        d[b][a] = d[b][a].min(*l);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

const PATH_TOL: f64 = 1e-9;

/// Betweenness by listing every shortest path between every unordered pair,
/// crediting each interior node with its share of the paths.
pub fn enumerated_betweenness(g: &CoCitationGraph, use_distances: bool) -> Vec<f64> {
    let n = g.node_count();
    let d = floyd_warshall(g, use_distances);
    let len = lengths(g, use_distances);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            if !d[s][t].is_finite() {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![s];
            let mut visited = vec![false; n];
            visited[s] = true;
            extend_paths(g, &len, &d, t, 0.0, &mut stack, &mut visited, &mut paths);
            let total = paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    bc
}

#[allow(clippy::too_many_arguments)]
fn extend_paths(
    g: &CoCitationGraph,
    len: &[f64],
    d: &[Vec<f64>],
    t: usize,
    so_far: f64,
    stack: &mut Vec<usize>,
    visited: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let v = *stack.last().unwrap();
    if v == t {
        out.push(stack.clone());
        return;
    }
    let s = stack[0];
    for &(w, e) in g.neighbors(v as u32) {
        let w = w as usize;
        let next = so_far + len[e as usize];
        if visited[w] || next + d[w][t] > d[s][t] + PATH_TOL * d[s][t].max(1.0) {
            continue;
        }
        visited[w] = true;
        stack.push(w);
        extend_paths(g, len, d, t, next, stack, visited, out);
        stack.pop();
        visited[w] = false;
    }
}

/// `(reached - 1) / sum of distances` within each node's component.
pub fn reference_closeness(g: &CoCitationGraph, use_distances: bool) -> Vec<f64> {
    let d = floyd_warshall(g, use_distances);
    d.iter()
        .map(|row| {
            let reach: Vec<f64> = row.iter().copied().filter(|x| x.is_finite()).collect();
            let total: f64 = reach.iter().sum();
            if reach.len() <= 1 || total == 0.0 {
                0.0
            } else {
                (reach.len() - 1) as f64 / total
            }
        })
        .collect()
}

/// Leading eigenvector of each component's weight matrix from a dense
/// symmetric eigendecomposition, max-normalized; singletons score 0.
pub fn dense_eigenvector(g: &CoCitationGraph) -> Vec<f64> {
    let n = g.node_count();
    let labels = g.component_labels();
    let mut out = vec![0.0; n];
    let comps: BTreeSet<u32> = labels.iter().copied().collect();
    for c in comps {
        let members: Vec<usize> = (0..n).filter(|&v| labels[v] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let pos: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = members.len();
        let mut a = DMatrix::<f64>::zeros(m, m);
        for e in g.edges() {
            if let (Some(&i), Some(&j)) = (pos.get(&(e.source as usize)), pos.get(&(e.target as usize))) {
                a[(i, j)] = e.weight as f64;
                a[(j, i)] = e.weight as f64;
            }
        }
        let eig = SymmetricEigen::new(a);
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k);
        let max = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (i, &node) in members.iter().enumerate() {
            out[node] = v[i].abs() / max;
        }
    }
    out
}

/// Co-citation counts by enumeration. `entries[e][r]` lists the units reached
/// by record `r` of entry `e`.
pub fn enumerated_cocitation(
    entries: &[Vec<BTreeSet<String>>],
    mode: CountingMode,
) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    let mut bump = |a: &String, b: &String| {
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        *out.entry(key).or_insert(0) += 1;
    };
    for records in entries {
        match mode {
            CountingMode::Set => {
                let units: BTreeSet<&String> = records.iter().flatten().collect();
                let units: Vec<&String> = units.into_iter().collect();
                for i in 0..units.len() {
                    for j in i + 1..units.len() {
                        bump(units[i], units[j]);
                    }
                }
            }
            CountingMode::PairSum => {
                for i in 0..records.len() {
                    for j in i + 1..records.len() {
                        let mut pairs = BTreeSet::new();
                        for a in &records[i] {
                            for b in &records[j] {
                                if a != b {
                                    pairs.insert(if a < b { (a, b) } else { (b, a) });
                                }
                            }
                        }
                        for (a, b) in pairs {
                            bump(a, b);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn graph_weights(g: &CoCitationGraph) -> BTreeMap<(String, String), u64> {
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = (g.node(e.source).id.clone(), g.node(e.target).id.clone());
            (if a < b { (a, b) } else { (b, a) }, e.weight)
        })
        .collect()
}

/// A random corpus in which each work belongs to one or two journals.
pub struct RandomCorpus {
    pub corpus: LinkedCorpus,
    /// Per entry, per distinct cited work: its journal ids.
    pub journal_sets: Vec<Vec<BTreeSet<String>>>,
    /// Per entry, per distinct cited work: the work id as a singleton.
    pub work_sets: Vec<Vec<BTreeSet<String>>>,
}

pub fn random_corpus(rng: &mut impl Rng, scheme: &ClassificationScheme, max_entries: usize, max_units: usize) -> RandomCorpus {
    let n_journals = rng.random_range(2..=max_units);
    let codes: Vec<u16> = scheme.fields().map(|f| f.code).collect();
    let journals: Vec<JournalRecord> = (0..n_journals)
        .map(|j| JournalRecord {
            journal_id: format!("J{j:02}"),
            title: format!("Journal {j}"),
            issns: vec![Issn::from_serial(100 + j as u32)],
            asjc_codes: vec![codes[rng.random_range(0..codes.len())]],
            open_access: false,
            window_citations: 0,
            window_articles: 0,
        })
        .collect();
    let n_works = rng.random_range(2..=max_units);
    let work_journals: Vec<BTreeSet<usize>> = (0..n_works)
        .map(|_| {
            let mut s = BTreeSet::from([rng.random_range(0..n_journals)]);
            if rng.random::<f64>() < 0.2 {
                s.insert(rng.random_range(0..n_journals));
            }
            s
        })
        .collect();
    let date = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let n_entries = rng.random_range(1..=max_entries);
    let mut records = Vec::new();
    let mut journal_sets = Vec::new();
    let mut work_sets = Vec::new();
    for e in 0..n_entries {
        let k = rng.random_range(0..=6.min(n_works));
        let mut works: Vec<usize> = (0..n_works).collect();
        works.shuffle(rng);
        works.truncate(k);
        works.sort_unstable();
        let mut js = Vec::new();
        let mut ws = Vec::new();
        for &w in &works {
            records.push(ReferenceRecord {
                citing_entry_id: format!("E{e:02}"),
                cited_work_id: format!("W{w:02}"),
                citation_date: date,
                publication_date: date,
                issns: work_journals[w].iter().map(|&j| journals[j].issns[0].clone()).collect(),
            });
            js.push(work_journals[w].iter().map(|&j| journals[j].journal_id.clone()).collect());
            ws.push(BTreeSet::from([format!("W{w:02}")]));
        }
        journal_sets.push(js);
        work_sets.push(ws);
    }
    records.sort_by(|a, b| (&a.citing_entry_id, &a.cited_work_id).cmp(&(&b.citing_entry_id, &b.cited_work_id)));
    let funnel = Funnel {
        raw: records.len(),
        kept: records.len(),
        ..Funnel::default()
    };
    let corpus = link_and_classify(records, funnel, journals, scheme.clone(), LinkOptions::default())
        .expect("fixture links");
    RandomCorpus {
        corpus,
        journal_sets,
        work_sets,
    }
}

/// Peak resident set size in bytes, when the platform reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
