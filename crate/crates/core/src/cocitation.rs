//! Co-citation network construction, components, filtering and area shares.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{combined_area_label, LinkedCorpus};
use crate::graph::{CoCitationGraph, CountingMode, Edge, Level, Node};

/// Citing entries per accumulation chunk.
const CHUNK_ENTRIES: usize = 4096;

/// Units of each record at a given level, plus the node table.
struct UnitTable {
    nodes: Vec<Node>,
    /// Sorted, deduplicated unit indices per record.
    per_record: Vec<Vec<u32>>,
}

#[derive(Default)]
struct Attrs {
    label: String,
    areas: BTreeSet<String>,
    main_fields: BTreeSet<String>,
    open_access: Option<bool>,
}

fn unit_table(corpus: &LinkedCorpus, level: Level) -> UnitTable {
    let scheme = &corpus.scheme;
    let mut keyed: Vec<Vec<String>> = Vec::with_capacity(corpus.records.len());
    let mut attrs: BTreeMap<String, Attrs> = BTreeMap::new();

    for lr in &corpus.records {
        let journals = lr.journals.iter().map(|&j| &corpus.journals[j as usize]);
        let mut keys: Vec<String> = Vec::new();
        match level {
            Level::Work => {
                let id = lr.record.cited_work_id.clone();
                let a = attrs.entry(id.clone()).or_default();
                a.label = id.clone();
                for j in journals {
                    a.areas.extend(j.areas.iter().cloned());
                    for &p in &j.main_fields {
                        if let Some(m) = scheme.main_field(p) {
                            a.main_fields.insert(m.name.clone());
                        }
                    }
                    a.open_access = Some(a.open_access.unwrap_or(false) || j.record.open_access);
                }
                keys.push(id);
            }
            Level::Journal => {
                for j in journals {
                    let id = j.record.journal_id.clone();
                    attrs.entry(id.clone()).or_insert_with(|| Attrs {
                        label: j.record.title.clone(),
                        areas: j.areas.iter().cloned().collect(),
                        main_fields: j
                            .main_fields
                            .iter()
                            .filter_map(|&p| scheme.main_field(p).map(|m| m.name.clone()))
                            .collect(),
                        open_access: Some(j.record.open_access),
                    });
                    keys.push(id);
                }
            }
            Level::Field => {
                for j in journals {
                    for &code in &j.fields {
                        let (Some(f), Some(m)) = (scheme.field(code), scheme.main_field_of(code)) else {
                            continue;
                        };
                        let id = code.to_string();
                        attrs.entry(id.clone()).or_insert_with(|| Attrs {
                            label: f.name.clone(),
                            areas: [m.area.clone()].into(),
                            main_fields: [m.name.clone()].into(),
                            open_access: None,
                        });
                        keys.push(id);
                    }
                }
            }
            Level::MainField => {
                for j in journals {
                    for &p in &j.main_fields {
                        let Some(m) = scheme.main_field(p) else { continue };
                        let id = format!("{p:02}");
                        attrs.entry(id.clone()).or_insert_with(|| Attrs {
                            label: m.name.clone(),
                            areas: [m.area.clone()].into(),
                            main_fields: [m.name.clone()].into(),
                            open_access: None,
                        });
                        keys.push(id);
                    }
                }
            }
            Level::Area => {
                for j in journals {
                    for area in &j.areas {
                        attrs.entry(area.clone()).or_insert_with(|| Attrs {
                            label: area.clone(),
                            areas: [area.clone()].into(),
                            main_fields: BTreeSet::new(),
                            open_access: None,
                        });
                        keys.push(area.clone());
                    }
                }
            }
        }
        keyed.push(keys);
    }

    let index: BTreeMap<&str, u32> = attrs
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i as u32))
        .collect();
    let per_record: Vec<Vec<u32>> = keyed
        .iter()
        .map(|keys| {
            let mut units: Vec<u32> = keys.iter().map(|k| index[k.as_str()]).collect();
            units.sort_unstable();
            units.dedup();
            units
        })
        .collect();
    let mut citations = vec![0u64; attrs.len()];
    for units in &per_record {
        for &u in units {
            citations[u as usize] += 1;
        }
    }
    let nodes = attrs
        .into_iter()
        .zip(citations)
        .map(|((id, a), citations)| Node {
            id,
            label: a.label,
            citations,
            area_label: (!a.areas.is_empty()).then(|| combined_area_label(a.areas.iter().map(String::as_str))),
            areas: a.areas.into_iter().collect(),
            main_fields: a.main_fields.into_iter().collect(),
            open_access: a.open_access,
        })
        .collect();
    UnitTable { nodes, per_record }
}

fn pair_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (u64::from(a) << 32) | u64::from(b)
}

/// Sorts keys and collapses runs into `(key, count)`.
fn run_length(mut keys: Vec<u64>) -> Vec<(u64, u64)> {
    keys.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::new();
    for k in keys {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Merges sorted `(key, count)` runs by addition.
fn merge_runs(parts: Vec<Vec<(u64, u64)>>) -> Vec<(u64, u64)> {
    let mut all: Vec<(u64, u64)> = parts.into_iter().flatten().collect();
    all.sort_unstable_by_key(|&(k, _)| k);
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(all.len());
    for (k, c) in all {
        match out.last_mut() {
            Some((last, total)) if *last == k => *total += c,
            _ => out.push((k, c)),
        }
    }
    out
}

/// Pair contributions of one citing entry, given the unit sets of its records.
fn entry_pairs(units: &[&[u32]], mode: CountingMode, out: &mut Vec<u64>) {
    match mode {
        CountingMode::Set => {
            let mut all: Vec<u32> = units.iter().flat_map(|u| u.iter().copied()).collect();
            all.sort_unstable();
            all.dedup();
            for (i, &u) in all.iter().enumerate() {
                for &v in &all[i + 1..] {
                    out.push(pair_key(u, v));
                }
            }
        }
        CountingMode::PairSum => {
            let mut local = Vec::new();
            for (i, a) in units.iter().enumerate() {
                for b in &units[i + 1..] {
                    local.clear();
                    for &u in a.iter() {
                        for &v in b.iter() {
                            if u != v {
                                local.push(pair_key(u, v));
                            }
                        }
                    }
                    local.sort_unstable();
                    local.dedup();
                    out.extend_from_slice(&local);
                }
            }
        }
    }
}

/// Builds the co-citation graph of `corpus` at `level`.
///
/// Every unit cited at least once becomes a node, so units never co-cited
/// appear as isolated nodes.
pub fn build_cocitation(corpus: &LinkedCorpus, level: Level, mode: CountingMode) -> CoCitationGraph {
    let table = unit_table(corpus, level);

    let mut order: Vec<usize> = (0..corpus.records.len()).collect();
    order.sort_by(|&a, &b| {
        corpus.records[a]
            .record
            .citing_entry_id
            .cmp(&corpus.records[b].record.citing_entry_id)
    });
    let entries: Vec<&[usize]> = order
        .chunk_by(|&a, &b| corpus.records[a].record.citing_entry_id == corpus.records[b].record.citing_entry_id)
        .collect();

    let parts: Vec<Vec<(u64, u64)>> = entries
        .par_chunks(CHUNK_ENTRIES)
        .map(|chunk| {
            let mut keys = Vec::new();
            let mut units: Vec<&[u32]> = Vec::new();
            for entry in chunk {
                units.clear();
                units.extend(entry.iter().map(|&r| table.per_record[r].as_slice()));
                entry_pairs(&units, mode, &mut keys);
            }
            run_length(keys)
        })
        .collect();

    let edges = merge_runs(parts)
        .into_iter()
        .map(|(k, weight)| Edge {
            source: (k >> 32) as u32,
            target: k as u32,
            weight,
        })
        .collect();
    CoCitationGraph::new(level, mode, table.nodes, edges).expect("accumulated edges are canonical")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCensus {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
    pub giant_nodes: usize,
    pub giant_edges: usize,
    pub nodes_outside: usize,
}

/// Largest connected component and the sizes of all components. Ties go to
/// the component holding the smallest node id.
pub fn giant_component(graph: &CoCitationGraph) -> (CoCitationGraph, ComponentCensus) {
    let labels = graph.component_labels();
    let count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    // Labels are numbered by smallest member, so the first maximum wins ties.
    let giant = sizes
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, usize)>, (l, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((l, s)),
        })
        .map(|(l, _)| l as u32);
    let keep: Vec<bool> = labels.iter().map(|&l| Some(l) == giant).collect();
    let sub = graph.subgraph(&keep, &vec![true; graph.edge_count()]);
    let mut sorted = sizes;
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let census = ComponentCensus {
        giant_nodes: sub.node_count(),
        giant_edges: sub.edge_count(),
        nodes_outside: graph.node_count() - sub.node_count(),
        sizes: sorted,
    };
    (sub, census)
}

/// Drops edges lighter than `threshold`, then nodes left isolated by the drop.
/// Nodes already isolated in the input are kept, so a threshold of 1 is the
/// identity.
pub fn filter_edges_min_weight(graph: &CoCitationGraph, threshold: u64) -> CoCitationGraph {
    let keep_edge: Vec<bool> = graph.edges().iter().map(|e| e.weight >= threshold).collect();
    let mut touched = vec![false; graph.node_count()];
    for e in graph.edges().iter().filter(|e| e.weight >= threshold) {
        touched[e.source as usize] = true;
        touched[e.target as usize] = true;
    }
    let keep_node: Vec<bool> = (0..graph.node_count())
        .map(|i| touched[i] || graph.degree(i as u32) == 0)
        .collect();
    graph.subgraph(&keep_node, &keep_edge)
}

/// Keeps nodes whose weighted degree reaches `threshold` and the edges among them.
pub fn filter_nodes_min_strength(graph: &CoCitationGraph, threshold: u64) -> CoCitationGraph {
    let keep: Vec<bool> = graph.weighted_degree().iter().map(|&s| s >= threshold).collect();
    graph.subgraph(&keep, &vec![true; graph.edge_count()])
}

/// Node grouping used for intra/inter shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One group per node: its (possibly combined) area label.
    AreaLabel,
    /// A node belongs to each of its areas.
    Areas,
    /// A node belongs to each of its main fields.
    MainFields,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShareError {
    #[error("node {0:?} has no group label")]
    GroupMissing(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupShare {
    pub group: String,
    pub intra_weight: u64,
    pub inter_weight: u64,
    pub intra_share: f64,
    pub inter_share: f64,
}

fn groups_of(node: &Node, grouping: Grouping) -> Result<Vec<&str>, ShareError> {
    let groups: Vec<&str> = match grouping {
        Grouping::AreaLabel => node.area_label.iter().map(String::as_str).filter(|s| !s.is_empty()).collect(),
        Grouping::Areas => node.areas.iter().map(String::as_str).collect(),
        Grouping::MainFields => node.main_fields.iter().map(String::as_str).collect(),
    };
    if groups.is_empty() {
        return Err(ShareError::GroupMissing(node.id.clone()));
    }
    Ok(groups)
}

/// Splits the edge weight incident to each group into same-group and
/// cross-group parts. An edge counts once per group touching either endpoint:
/// as intra when both endpoints belong to the group, otherwise as inter.
pub fn intra_inter_shares(graph: &CoCitationGraph, grouping: Grouping) -> Result<Vec<GroupShare>, ShareError> {
    let groups: Vec<Vec<&str>> = graph
        .nodes()
        .iter()
        .map(|n| groups_of(n, grouping))
        .collect::<Result<_, _>>()?;
    let mut totals: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for gs in &groups {
        for g in gs {
            totals.entry(g).or_default();
        }
    }
    for e in graph.edges() {
        let a = &groups[e.source as usize];
        let b = &groups[e.target as usize];
        let touched: BTreeSet<&str> = a.iter().chain(b.iter()).copied().collect();
        for g in touched {
            let t = totals.get_mut(g).expect("group registered");
            if a.contains(&g) && b.contains(&g) {
                t.0 += e.weight;
            } else {
                t.1 += e.weight;
            }
        }
    }
    Ok(totals
        .into_iter()
        .map(|(group, (intra, inter))| {
            let total = intra + inter;
            let (intra_share, inter_share) = if total == 0 {
                (0.0, 0.0)
            } else {
                let i = intra as f64 / total as f64;
                (i, 1.0 - i)
            };
            GroupShare {
                group: group.to_string(),
                intra_weight: intra,
                inter_weight: inter,
                intra_share,
                inter_share,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub level: Level,
    pub mode: CountingMode,
    pub nodes: usize,
    pub edges: usize,
    pub total_cocitations: u64,
    /// Nodes with at least one co-citation.
    pub cocited_nodes: usize,
    pub cocited_share: f64,
    /// Mean weighted degree over co-cited nodes.
    pub mean_cocitations_per_node: f64,
}

pub fn summarize(graph: &CoCitationGraph) -> NetworkSummary {
    let strength = graph.weighted_degree();
    let cocited: Vec<u64> = strength.iter().copied().filter(|&s| s > 0).collect();
    let n = graph.node_count();
    NetworkSummary {
        level: graph.level,
        mode: graph.mode,
        nodes: n,
        edges: graph.edge_count(),
        total_cocitations: graph.edges().iter().map(|e| e.weight).sum(),
        cocited_nodes: cocited.len(),
        cocited_share: if n == 0 { 0.0 } else { cocited.len() as f64 / n as f64 },
        mean_cocitations_per_node: if cocited.is_empty() {
            0.0
        } else {
            cocited.iter().sum::<u64>() as f64 / cocited.len() as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        link_and_classify, ClassificationScheme, Funnel, Issn, JournalRecord, LinkOptions, ReferenceRecord,
    };
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn scheme() -> ClassificationScheme {
        ClassificationScheme::from_entries(vec![
            (1300, "Biochem".into(), "Biochemistry".into(), "Life Sciences".into()),
            (2700, "General Medicine".into(), "Medicine".into(), "Health Sciences".into()),
            (3100, "General Physics".into(), "Physics".into(), "Physical Sciences".into()),
        ])
        .unwrap()
    }

    fn journal(n: u32, codes: &[u16]) -> JournalRecord {
        JournalRecord {
            journal_id: format!("J{n}"),
            title: format!("Journal {n}"),
            issns: vec![Issn::from_serial(n)],
            asjc_codes: codes.to_vec(),
            open_access: n.is_multiple_of(2),
            window_citations: 0,
            window_articles: 0,
        }
    }

    fn rec(entry: &str, work: &str, journal: u32) -> ReferenceRecord {
        let d = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
        ReferenceRecord {
            citing_entry_id: entry.into(),
            cited_work_id: work.into(),
            citation_date: d,
            publication_date: d,
            issns: vec![Issn::from_serial(journal)],
        }
    }

    fn corpus(records: Vec<ReferenceRecord>, journals: Vec<JournalRecord>) -> LinkedCorpus {
        let funnel = Funnel {
            raw: records.len(),
            kept: records.len(),
            ..Funnel::default()
        };
        link_and_classify(records, funnel, journals, scheme(), LinkOptions::default()).unwrap()
    }

    #[test]
    fn work_level_definition_example() {
        let c = corpus(
            vec![
                rec("E1", "A", 1),
                rec("E1", "B", 1),
                rec("E1", "C", 1),
                rec("E2", "A", 1),
                rec("E2", "B", 1),
            ],
            vec![journal(1, &[1300])],
        );
        let g = build_cocitation(&c, Level::Work, CountingMode::Set);
        assert_eq!(g.weight_by_id("A", "B"), Some(2));
        assert_eq!(g.weight_by_id("B", "A"), Some(2));
        assert_eq!(g.weight_by_id("A", "C"), Some(1));
        assert_eq!(g.weight_by_id("B", "C"), Some(1));
        assert_eq!(g.node(g.node_index("A").unwrap()).citations, 2);
    }

    #[test]
    fn single_citation_entry_gives_no_edges() {
        let c = corpus(vec![rec("E1", "A", 1)], vec![journal(1, &[1300])]);
        let g = build_cocitation(&c, Level::Journal, CountingMode::Set);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn journal_level_set_versus_pair_sum() {
        let records = vec![
            rec("E1", "a1", 1),
            rec("E1", "a2", 1),
            rec("E1", "a3", 1),
            rec("E1", "b1", 2),
            rec("E1", "b2", 2),
        ];
        let journals = vec![journal(1, &[1300]), journal(2, &[2700])];
        let c = corpus(records, journals);
        let set = build_cocitation(&c, Level::Journal, CountingMode::Set);
        assert_eq!(set.weight_by_id("J1", "J2"), Some(1));
        assert_eq!(set.edge_count(), 1);
        let sum = build_cocitation(&c, Level::Journal, CountingMode::PairSum);
        assert_eq!(sum.weight_by_id("J1", "J2"), Some(6));
        assert_eq!(sum.edge_count(), 1);
        let j1 = set.node(0);
        assert_eq!((j1.label.as_str(), j1.citations), ("Journal 1", 3));
        assert_eq!(j1.area_label.as_deref(), Some("Life Sciences"));
    }

    #[test]
    fn higher_levels_follow_the_hierarchy() {
        let c = corpus(
            vec![rec("E1", "a", 1), rec("E1", "b", 2), rec("E2", "c", 3), rec("E2", "a", 1)],
            vec![journal(1, &[1300, 2700]), journal(2, &[2700]), journal(3, &[3100])],
        );
        let area = build_cocitation(&c, Level::Area, CountingMode::Set);
        assert_eq!(area.weight_by_id("Health Sciences", "Life Sciences"), Some(2));
        assert_eq!(area.weight_by_id("Life Sciences", "Physical Sciences"), Some(1));
        let mf = build_cocitation(&c, Level::MainField, CountingMode::Set);
        assert_eq!(mf.weight_by_id("13", "27"), Some(2));
        let field = build_cocitation(&c, Level::Field, CountingMode::Set);
        assert_eq!(field.node(field.node_index("2700").unwrap()).citations, 3);
        let journal_node = build_cocitation(&c, Level::Journal, CountingMode::Set);
        assert_eq!(
            journal_node.node(0).area_label.as_deref(),
            Some("Health Sciences & Life Sciences")
        );
    }

    #[test]
    fn giant_component_census() {
        let g = CoCitationGraph::from_edges(5, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1)]).unwrap();
        let (giant, census) = giant_component(&g);
        assert_eq!(giant.node_count(), 3);
        assert_eq!(census.sizes, vec![3, 2]);
        assert_eq!(census.nodes_outside, 2);

        let tri = CoCitationGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let (giant, census) = giant_component(&tri);
        assert_eq!(giant, tri);
        assert_eq!(census.sizes, vec![3]);

        let tie = CoCitationGraph::from_edges(4, &[(2, 3, 1), (0, 1, 1)]).unwrap();
        let (giant, _) = giant_component(&tie);
        assert_eq!(giant.node(0).id, "0");
    }

    #[test]
    fn edge_threshold_filter() {
        let g = CoCitationGraph::from_edges(3, &[(0, 1, 60), (1, 2, 40)]).unwrap();
        let f = filter_edges_min_weight(&g, 50);
        assert_eq!(f.node_count(), 2);
        assert_eq!(f.edges(), &[Edge { source: 0, target: 1, weight: 60 }]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(filter_edges_min_weight(&g, 1), g);
        let strength = filter_nodes_min_strength(&g, 50);
        assert_eq!(strength.node_count(), 2);
    }

    fn labelled(labels: &[&str], edges: &[(u32, u32, u64)]) -> CoCitationGraph {
        let g = CoCitationGraph::from_edges(labels.len(), edges).unwrap();
        let nodes = g
            .nodes()
            .iter()
            .zip(labels)
            .map(|(n, l)| Node {
                area_label: Some(l.to_string()),
                areas: l.split(" & ").map(str::to_string).collect(),
                ..n.clone()
            })
            .collect();
        CoCitationGraph::new(Level::Journal, CountingMode::Set, nodes, g.edges().to_vec()).unwrap()
    }

    #[test]
    fn shares_single_group_and_bridge() {
        let one = labelled(&["X", "X", "X"], &[(0, 1, 2), (1, 2, 3)]);
        let s = intra_inter_shares(&one, Grouping::AreaLabel).unwrap();
        assert_eq!((s[0].intra_share, s[0].inter_share), (1.0, 0.0));

        let two = labelled(&["X", "Y"], &[(0, 1, 5)]);
        for s in intra_inter_shares(&two, Grouping::AreaLabel).unwrap() {
            assert_eq!((s.intra_share, s.inter_share), (0.0, 1.0));
        }
    }

    #[test]
    fn decomposed_combined_labels() {
        let g = labelled(&["X & Y", "X"], &[(0, 1, 4)]);
        let combined = intra_inter_shares(&g, Grouping::AreaLabel).unwrap();
        assert_eq!(combined.len(), 2);
        assert!(combined.iter().all(|s| s.inter_share == 1.0));
        let split = intra_inter_shares(&g, Grouping::Areas).unwrap();
        let x = split.iter().find(|s| s.group == "X").unwrap();
        let y = split.iter().find(|s| s.group == "Y").unwrap();
        assert_eq!((x.intra_weight, x.inter_weight), (4, 0));
        assert_eq!((y.intra_weight, y.inter_weight), (0, 4));
    }

    #[test]
    fn missing_group_is_an_error() {
        let g = CoCitationGraph::from_edges(2, &[(0, 1, 1)]).unwrap();
        assert!(matches!(
            intra_inter_shares(&g, Grouping::AreaLabel),
            Err(ShareError::GroupMissing(_))
        ));
    }

    /// Reference enumeration straight from the definition, on unit sets.
    fn brute_force(entries: &[Vec<Vec<u32>>], mode: CountingMode) -> BTreeMap<(u32, u32), u64> {
        let mut out = BTreeMap::new();
        for works in entries {
            match mode {
                CountingMode::Set => {
                    let units: BTreeSet<u32> = works.iter().flatten().copied().collect();
                    for &a in &units {
                        for &b in &units {
                            if a < b {
                                *out.entry((a, b)).or_insert(0) += 1;
                            }
                        }
                    }
                }
                CountingMode::PairSum => {
                    for i in 0..works.len() {
                        for j in i + 1..works.len() {
                            let mut pairs = BTreeSet::new();
                            for &a in &works[i] {
                                for &b in &works[j] {
                                    if a != b {
                                        pairs.insert((a.min(b), a.max(b)));
                                    }
                                }
                            }
                            for p in pairs {
                                *out.entry(p).or_insert(0) += 1;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn accumulation_matches_enumeration(
            entries in prop::collection::vec(
                prop::collection::vec(prop::collection::btree_set(0u32..8, 1..3), 0..6), 0..12),
            pair_sum in any::<bool>(),
        ) {
            let mode = if pair_sum { CountingMode::PairSum } else { CountingMode::Set };
            let entries: Vec<Vec<Vec<u32>>> = entries
                .into_iter()
                .map(|e| e.into_iter().map(|s| s.into_iter().collect()).collect())
                .collect();
            let mut keys = Vec::new();
            for e in &entries {
                let slices: Vec<&[u32]> = e.iter().map(Vec::as_slice).collect();
                entry_pairs(&slices, mode, &mut keys);
            }
            let half = keys.len() / 2;
            let tail = keys.split_off(half);
            let got: BTreeMap<(u32, u32), u64> = merge_runs(vec![run_length(keys), run_length(tail)])
                .into_iter()
                .map(|(k, c)| (((k >> 32) as u32, k as u32), c))
                .collect();
            prop_assert_eq!(got, brute_force(&entries, mode));
        }

        #[test]
        fn set_weights_bounded_and_filters_nest(
            entries in prop::collection::vec(prop::collection::btree_set(0u32..6, 1..5), 1..15),
            t1 in 1u64..4, dt in 0u64..3,
        ) {
            let mut records = Vec::new();
            for (e, works) in entries.iter().enumerate() {
                for w in works {
                    records.push(rec(&format!("E{e:02}"), &format!("W{w}"), w % 3 + 1));
                }
            }
            let c = corpus(records, vec![journal(1, &[1300]), journal(2, &[2700]), journal(3, &[3100])]);
            for level in [Level::Work, Level::Journal, Level::Area] {
                let g = build_cocitation(&c, level, CountingMode::Set);
                for e in g.edges() {
                    prop_assert!(e.weight <= entries.len() as u64);
                    prop_assert_eq!(g.weight(e.target, e.source), Some(e.weight));
                }
                let lo = filter_edges_min_weight(&g, t1);
                let hi = filter_edges_min_weight(&g, t1 + dt);
                for e in hi.edges() {
                    let (a, b) = (&hi.node(e.source).id, &hi.node(e.target).id);
                    prop_assert_eq!(lo.weight_by_id(a, b), Some(e.weight));
                }
                for s in intra_inter_shares(&g, Grouping::Areas).unwrap() {
                    if s.intra_weight + s.inter_weight > 0 {
                        prop_assert!((s.intra_share + s.inter_share - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
