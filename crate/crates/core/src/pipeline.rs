//! End-to-end run: ingest, link, metrics, co-citation, PFNET, centralities,
//! tail fits and cross-source comparisons, written as a fixed set of
//! artifacts with a digest manifest.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cocitation::{
    build_cocitation, filter_edges_min_weight, giant_component, intra_inter_shares, summarize, ComponentCensus,
    Grouping,
};
use crate::compare::{field_share_diff, linear_fit, percentile_ratio, qq_points, SourceCounts, Thresholds};
use crate::corpus::{
    classify_journal, ingest_path, link_and_classify, load_journals, load_scheme, CitationWindow, CorpusError,
    IngestOptions, JournalRecord, LinkOptions, LinkedCorpus, Tier,
};
use crate::export::{self, ExportError};
use crate::graph::{CoCitationGraph, CountingMode, Level};
use crate::heavytail::{analyze_tail, cdf_points, TailOptions, MIN_SIMULATIONS};
use crate::metrics::{citation_aging_profile, corpus_summary, price_index, PriceIndexReport, WindowBoundary};
use crate::netmetrics::{
    betweenness, centralities, closeness, CentralityOptions, CentralityReport, ClosenessVariant, NodeCentrality,
};
use crate::pathfinder::{pfnet_sparsify, to_distance, PfNetwork};

pub const ARTIFACTS: [&str; 9] = [
    "ingest.json",
    "stats.json",
    "price_index.csv",
    "network.graphml",
    "network_edges.csv",
    "pfnet_filtered.graphml",
    "centrality.csv",
    "tailfit.json",
    "comparison.json",
];

pub const MANIFEST: &str = "manifest.json";

fn default_level() -> Level {
    Level::Journal
}
fn default_min_weight() -> u64 {
    50
}
fn default_windows() -> Vec<u32> {
    vec![5, 10, 15, 20]
}
fn default_significance() -> f64 {
    0.05
}
fn default_min_tail() -> usize {
    50
}
fn default_quantiles() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub references: PathBuf,
    pub journals: PathBuf,
    pub scheme: PathBuf,
    #[serde(default = "default_level")]
    pub level: Level,
    #[serde(default)]
    pub mode: CountingMode,
    /// Edge threshold applied after PFNET pruning.
    #[serde(default = "default_min_weight")]
    pub min_weight: u64,
    #[serde(default = "default_windows")]
    pub windows: Vec<u32>,
    #[serde(default)]
    pub boundary: WindowBoundary,
    /// Bootstrap simulations; 0 skips the goodness-of-fit test.
    #[serde(default)]
    pub n_sims: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_min_tail")]
    pub min_tail: usize,
    #[serde(default)]
    pub comparison_window: CitationWindow,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_quantiles")]
    pub qq_quantiles: usize,
    #[serde(default)]
    pub closeness: ClosenessVariant,
    /// Fail on malformed rows and on ISSNs claimed by two journals.
    #[serde(default)]
    pub strict: bool,
    /// Never echoed into reports, so runs into different directories agree.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl PipelineConfig {
    pub fn new(references: PathBuf, journals: PathBuf, scheme: PathBuf, out: PathBuf) -> Self {
        Self {
            references,
            journals,
            scheme,
            level: default_level(),
            mode: CountingMode::default(),
            min_weight: default_min_weight(),
            windows: default_windows(),
            boundary: WindowBoundary::default(),
            n_sims: 0,
            seed: None,
            significance: default_significance(),
            min_tail: default_min_tail(),
            comparison_window: CitationWindow::default(),
            thresholds: Thresholds::default(),
            qq_quantiles: default_quantiles(),
            closeness: ClosenessVariant::default(),
            strict: false,
            out,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for (name, path) in [
            ("references", &self.references),
            ("journals", &self.journals),
            ("scheme", &self.scheme),
        ] {
            if fs::File::open(path).is_err() || path.is_dir() {
                return Err(PipelineError::Config {
                    message: format!("{name} file is not readable"),
                    path: Some(path.clone()),
                });
            }
        }
        let bad = |message: String| PipelineError::Config { message, path: None };
        if self.windows.is_empty() || self.windows.contains(&0) {
            return Err(bad("windows must be non-empty and strictly positive".into()));
        }
        if self.n_sims > 0 && self.seed.is_none() {
            return Err(bad("a seed is required when n_sims > 0".into()));
        }
        if self.n_sims > 0 && self.n_sims < MIN_SIMULATIONS {
            return Err(bad(format!("n_sims must be 0 or at least {MIN_SIMULATIONS}")));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(bad("significance must lie in (0, 1)".into()));
        }
        if self.min_tail < 2 {
            return Err(bad("min_tail must be at least 2".into()));
        }
        if self.qq_quantiles == 0 {
            return Err(bad("qq_quantiles must be positive".into()));
        }
        let w = &self.comparison_window;
        if w.citation_from > w.citation_to || w.publication_from > w.publication_to {
            return Err(bad("comparison window bounds are reversed".into()));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<(&'static str, u64)> {
        self.seed.map(|s| vec![("bootstrap", s)]).unwrap_or_default()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{message}")]
    Config { message: String, path: Option<PathBuf> },
    #[error(transparent)]
    Input(#[from] CorpusError),
    #[error("invariant violated: {invariant}: {detail}")]
    Invariant { invariant: &'static str, detail: String },
    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: ExportError,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) | PipelineError::Output { .. } => 1,
            PipelineError::Config { .. } => 2,
            PipelineError::Invariant { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Input(_) => "input",
            PipelineError::Output { .. } => "output",
            PipelineError::Config { .. } => "config",
            PipelineError::Invariant { .. } => "invariant",
        }
    }

    /// Single-line JSON for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            PipelineError::Config { path: Some(p), .. } | PipelineError::Output { path: p, .. } => {
                v["path"] = Value::from(p.display().to_string());
            }
            PipelineError::Invariant { invariant, .. } => v["invariant"] = Value::from(*invariant),
            _ => {}
        }
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub artifacts: Vec<ManifestEntry>,
}

/// Either the value or `{"error": message}`, so that one failed analysis
/// does not abort the run.
fn or_error<T: Serialize, E: Display>(r: Result<T, E>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts into one directory and records their digests.
pub struct ArtifactWriter<'a> {
    dir: &'a Path,
    entries: Vec<ManifestEntry>,
}

impl<'a> ArtifactWriter<'a> {
    pub fn new(dir: &'a Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::Config {
            message: format!("cannot create output directory: {e}"),
            path: Some(dir.to_path_buf()),
        })?;
        Ok(Self {
            dir,
            entries: Vec::new(),
        })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn put(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<(), ExportError>) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        let mut buf = Vec::new();
        write(&mut buf).map_err(|source| PipelineError::Output { path: path.clone(), source })?;
        fs::write(&path, &buf).map_err(|e| PipelineError::Output {
            path: path.clone(),
            source: e.into(),
        })?;
        self.entries.push(ManifestEntry {
            file: name.to_string(),
            bytes: buf.len() as u64,
            sha256: sha256_hex(&buf),
        });
        Ok(())
    }
}

/// Loads the inputs into a linked corpus. Also returns every journal read,
/// cited or not, for the external-source side of comparisons.
pub fn load_corpus(config: &PipelineConfig) -> Result<(LinkedCorpus, Vec<JournalRecord>, Value), PipelineError> {
    let scheme = load_scheme(&config.scheme)?;
    let ingested = ingest_path(&config.references, IngestOptions { strict: config.strict })?;
    let journals = load_journals(&config.journals)?;
    let corpus = link_and_classify(
        ingested.records,
        ingested.funnel,
        journals.clone(),
        scheme,
        LinkOptions {
            lenient_duplicate_issn: !config.strict,
        },
    )?;
    let f = corpus.funnel;
    if !f.is_conserved() || f.kept != f.linked + f.unresolved {
        return Err(PipelineError::Invariant {
            invariant: "funnel_conservation",
            detail: format!("{f:?}"),
        });
    }
    let ingest = json!({
        "funnel": f,
        "row_errors": ingested.errors,
        "issn_conflicts": corpus.issn_conflicts,
        "work_conflicts": corpus.work_conflicts,
        "scheme": corpus.scheme.counts(),
        "journals_loaded": journals.len(),
        "journals_cited": corpus.journals.len(),
    });
    Ok((corpus, journals, ingest))
}

/// Centralities, falling back to betweenness and closeness alone (with an
/// undefined eigenvector column) when the eigenvector iteration fails.
pub fn centrality_with_fallback(graph: &CoCitationGraph, options: CentralityOptions) -> (CentralityReport, Option<String>) {
    match centralities(graph, options) {
        Ok(r) => (r, None),
        Err(e) => {
            let b = betweenness(graph, options.use_distances);
            let c = closeness(graph, options.use_distances, options.closeness);
            let strength = graph.weighted_degree();
            let nodes = graph
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, n)| NodeCentrality {
                    node_id: n.id.clone(),
                    label: n.label.clone(),
                    citations: n.citations,
                    weighted_degree: strength[i],
                    betweenness: b[i],
                    closeness: c[i],
                    eigenvector: f64::NAN,
                })
                .collect();
            let report = CentralityReport {
                weighted: options.use_distances,
                betweenness_normalization: "unnormalized_pairs",
                component_handling: "per_component",
                closeness: options.closeness,
                nodes,
            };
            (report, Some(e.to_string()))
        }
    }
}

pub fn check_pfnet(graph: &CoCitationGraph, pfnet: &PfNetwork) -> Result<CoCitationGraph, PipelineError> {
    let pruned = pfnet.to_graph(graph);
    if pruned.component_labels() != graph.component_labels() {
        return Err(PipelineError::Invariant {
            invariant: "pfnet_preserves_connectivity",
            detail: "pruning split a connected component".into(),
        });
    }
    Ok(pruned)
}

/// External-source counts per journal and articles per main field.
fn scopus_side(
    journals: &[JournalRecord],
    corpus: &LinkedCorpus,
) -> (BTreeMap<String, SourceCounts>, BTreeMap<String, u64>) {
    let mut counts = BTreeMap::new();
    let mut per_field: BTreeMap<String, u64> = BTreeMap::new();
    for j in journals {
        counts.insert(
            j.journal_id.clone(),
            SourceCounts {
                citations: j.window_citations,
                articles: j.window_articles,
            },
        );
        let classified = classify_journal(j.clone(), &corpus.scheme);
        for p in classified.main_fields {
            if let Some(m) = corpus.scheme.main_field(p) {
                *per_field.entry(m.name.clone()).or_default() += j.window_articles;
            }
        }
    }
    (counts, per_field)
}

pub fn comparison_report(config: &PipelineConfig, corpus: &LinkedCorpus, journals: &[JournalRecord]) -> Value {
    let wiki: BTreeMap<String, SourceCounts> = corpus
        .window_counts(&config.comparison_window)
        .into_iter()
        .map(|(k, w)| {
            (
                k,
                SourceCounts {
                    citations: w.citations,
                    articles: w.articles,
                },
            )
        })
        .collect();
    let (scopus, scopus_fields) = scopus_side(journals, corpus);
    let ratios = percentile_ratio(&wiki, &scopus, config.thresholds);
    let x: Vec<f64> = ratios.iter().map(|r| r.scopus_citations as f64).collect();
    let y: Vec<f64> = ratios.iter().map(|r| r.wiki_citations as f64).collect();
    let qq = if x.is_empty() {
        Vec::new()
    } else {
        qq_points(&x, &y, config.qq_quantiles)
    };
    json!({
        "percentile_method": "mean_rank_fractional",
        "thresholds": config.thresholds,
        "window": config.comparison_window,
        "journals_wiki": wiki.len(),
        "journals_scopus": scopus.len(),
        "percentile_ratios": ratios,
        "field_shares": or_error(field_share_diff(&corpus.articles_per_main_field(), &scopus_fields)),
        "field_shares_sources": { "a": "wikipedia", "b": "scopus" },
        "citation_fit": or_error(linear_fit(&x, &y)),
        "citation_fit_axes": { "x": "scopus_citations", "y": "wiki_citations" },
        "qq": qq,
    })
}

/// Co-citation graph and its pruned forms.
pub struct NetworkStage {
    pub graph: CoCitationGraph,
    pub pfnet: PfNetwork,
    /// All nodes, PFNET edges only.
    pub pruned: CoCitationGraph,
    /// PFNET edges at or above the weight threshold.
    pub filtered: CoCitationGraph,
    pub census: ComponentCensus,
}

pub fn network_stage(config: &PipelineConfig, corpus: &LinkedCorpus) -> Result<NetworkStage, PipelineError> {
    let graph = build_cocitation(corpus, config.level, config.mode);
    let pfnet = pfnet_sparsify(&to_distance(&graph));
    let pruned = check_pfnet(&graph, &pfnet)?;
    let filtered = filter_edges_min_weight(&pruned, config.min_weight);
    let (_, census) = giant_component(&graph);
    Ok(NetworkStage {
        graph,
        pfnet,
        pruned,
        filtered,
        census,
    })
}

impl NetworkStage {
    pub fn report(&self, config: &PipelineConfig) -> Value {
        json!({
            "network": summarize(&self.graph),
            "components": self.census,
            "shares_by_area": or_error(intra_inter_shares(&self.graph, Grouping::AreaLabel)),
            "shares_by_main_field": or_error(intra_inter_shares(&self.graph, Grouping::MainFields)),
            "pfnet": {
                "r": self.pfnet.r,
                "q": self.pfnet.q,
                "edges_before": self.graph.edge_count(),
                "edges_retained": self.pfnet.retained_count(),
                "edges_after_threshold": self.filtered.edge_count(),
                "min_weight": config.min_weight,
            },
        })
    }
}

/// Corpus-level statistics and the Price index, overall (first row) and
/// per main field.
pub fn corpus_stats(config: &PipelineConfig, corpus: &LinkedCorpus) -> (Value, Vec<PriceIndexReport>) {
    let overall = price_index(corpus, &config.windows, None, config.boundary);
    let by_field = price_index(corpus, &config.windows, Some(Tier::MainField), config.boundary);
    let value = json!({
        "summary": or_error(corpus_summary(corpus)),
        "aging_profile": or_error(citation_aging_profile(corpus.records.iter().map(|lr| &lr.record))),
        "price_index": overall,
        "price_index_by_main_field": by_field,
    });
    let mut rows = overall;
    rows.extend(by_field);
    (value, rows)
}

/// Power-law and log-normal fits, Vuong test and optional bootstrap on
/// `samples`; failures are embedded rather than raised.
pub fn tail_report(config: &PipelineConfig, population: &str, samples: &[u64]) -> Value {
    let options = TailOptions {
        min_tail: config.min_tail,
        xmin: None,
    };
    match analyze_tail(
        samples,
        &options,
        config.n_sims,
        config.seed.unwrap_or(0),
        config.significance,
    ) {
        Ok(r) => json!({
            "population": population,
            "n": samples.len(),
            "cdf": cdf_points(samples, &r.power_law),
            "fit": r,
        }),
        Err(e) => json!({
            "population": population,
            "n": samples.len(),
            "error": e.to_string(),
        }),
    }
}

pub fn centrality_options(config: &PipelineConfig) -> CentralityOptions {
    CentralityOptions {
        use_distances: true,
        closeness: config.closeness,
    }
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

/// Runs every stage and writes the artifacts and manifest into `config.out`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Manifest, PipelineError> {
    config.validate()?;
    let seeds = config.seeds();
    let mut sink = ArtifactWriter::new(&config.out)?;

    let (corpus, journals, ingest) = load_corpus(config)?;
    sink.put("ingest.json", |w| export::write_report(w, "ingest", &ingest, config, &seeds))?;

    let net = network_stage(config, &corpus)?;
    let (centrality, centrality_error) = centrality_with_fallback(&net.pruned, centrality_options(config));
    let (corpus_part, price_rows) = corpus_stats(config, &corpus);
    let mut stats = merge(corpus_part, net.report(config));
    stats["centrality_graph"] = Value::from("pfnet");
    stats["centrality_error"] = serde_json::to_value(centrality_error).unwrap_or(Value::Null);
    sink.put("stats.json", |w| export::write_report(w, "stats", &stats, config, &seeds))?;

    sink.put("price_index.csv", |w| export::write_price_csv(w, &price_rows))?;
    sink.put("network.graphml", |w| export::write_graphml(w, &net.graph, Some(&net.pfnet.retained)))?;
    sink.put("network_edges.csv", |w| export::write_edge_csv(w, &net.graph))?;
    sink.put("pfnet_filtered.graphml", |w| export::write_graphml(w, &net.filtered, None))?;
    sink.put("centrality.csv", |w| export::write_centrality_csv(w, &centrality))?;

    let tail = tail_report(config, "citations_per_journal", &corpus.journal_citations());
    sink.put("tailfit.json", |w| export::write_report(w, "tailfit", &tail, config, &seeds))?;

    let comparison = comparison_report(config, &corpus, &journals);
    sink.put("comparison.json", |w| export::write_report(w, "comparison", &comparison, config, &seeds))?;

    let manifest = Manifest {
        tool: export::TOOL_NAME.into(),
        version: export::TOOL_VERSION.into(),
        artifacts: sink.entries,
    };
    let path = config.out.join(MANIFEST);
    let text = export::to_stable_json(&manifest).map_err(|source| PipelineError::Output {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(|e| PipelineError::Output { path, source: e.into() })?;
    Ok(manifest)
}
