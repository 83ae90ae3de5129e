use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cocite::cocitation::{build_cocitation, giant_component, intra_inter_shares, summarize, Grouping};
use cocite::corpus::load_scheme;
use cocite::export;
use cocite::graph::{CountingMode, Level};
use cocite::netmetrics::CentralityReport;
use cocite::pipeline::{
    centrality_options, centrality_with_fallback, comparison_report, corpus_stats, load_corpus, network_stage,
    run_pipeline, tail_report, ArtifactWriter, PipelineConfig, PipelineError,
};
use cocite::synth::{generate, SynthParams};

#[derive(Parser)]
#[command(name = "cocite", version, about = "Co-citation network and citation statistics toolkit")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, deduplicate and link references; writes ingest.json.
    Ingest(Common),
    /// Corpus statistics and Price index; writes stats.json and price_index.csv.
    Stats(Common),
    /// Co-citation network; writes cocite.json, network.graphml and network_edges.csv.
    Cocite(Common),
    /// Pathfinder pruning; writes pfnet.json, pfnet.graphml, pfnet_edges.csv and pfnet_filtered.graphml.
    Pfnet(Common),
    /// Centralities on the pruned network; writes centrality.json and centrality.csv.
    Centrality(Common),
    /// Heavy-tail fits; writes tailfit.json.
    Tailfit(TailArgs),
    /// Cross-source comparison; writes comparison.json.
    Compare(Common),
    /// Every stage, nine artifacts and manifest.json.
    Pipeline(Common),
    /// Writes a seeded synthetic corpus with a matching pipeline.toml.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    refs: Option<PathBuf>,
    #[arg(long)]
    journals: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// work, journal, field, main_field or area.
    #[arg(long)]
    level: Option<Level>,
    /// set or pair_sum.
    #[arg(long)]
    mode: Option<CountingMode>,
    #[arg(long)]
    min_weight: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<u32>>,
    #[arg(long)]
    nsims: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail on malformed rows and on ISSNs shared by two journals.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct TailArgs {
    #[command(flatten)]
    common: Common,
    /// One non-negative count per line; without it, citations per journal
    /// from the corpus are used.
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    entries: Option<usize>,
    #[arg(long)]
    references: Option<usize>,
    #[arg(long)]
    journals: Option<usize>,
    /// 10^6 references over 10^4 journals instead of the small default.
    #[arg(long)]
    scale: bool,
}

struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
    path: Option<PathBuf>,
}

impl CliError {
    fn new(code: u8, kind: &'static str, message: impl Into<String>, path: Option<&Path>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            path: path.map(Path::to_path_buf),
        }
    }

    fn config(message: impl Into<String>, path: Option<&Path>) -> Self {
        Self::new(2, "config", message, path)
    }

    fn input(message: impl Into<String>, path: Option<&Path>) -> Self {
        Self::new(1, "input", message, path)
    }

    fn line(&self) -> String {
        let mut v = json!({ "error": self.kind, "exit_code": self.code, "message": self.message });
        if let Some(p) = &self.path {
            v["path"] = Value::from(p.display().to_string());
        }
        v.to_string()
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let path = match &e {
            PipelineError::Config { path, .. } => path.clone(),
            PipelineError::Output { path, .. } => Some(path.clone()),
            _ => None,
        };
        Self {
            code: e.exit_code() as u8,
            kind: e.kind(),
            message: e.to_string(),
            path,
        }
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(1, "output", e.to_string(), Some(path))
}

/// Merges the config file (paths resolved against its directory) with the
/// flags, flags taking precedence.
fn build_config(c: &Common, placeholders: bool) -> Result<PipelineConfig, CliError> {
    let mut table = toml::Table::new();
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(e.to_string(), Some(path)))?;
        table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::config(e.to_string().replace('\n', " "), Some(path)))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for key in ["references", "journals", "scheme", "out"] {
            if let Some(toml::Value::String(p)) = table.get(key) {
                let resolved = base.join(p).display().to_string();
                table.insert(key.into(), toml::Value::String(resolved));
            }
        }
    }
    let mut set = |key: &str, v: toml::Value| {
        table.insert(key.into(), v);
    };
    let path_value = |p: &PathBuf| toml::Value::String(p.display().to_string());
    if let Some(p) = &c.refs {
        set("references", path_value(p));
    }
    if let Some(p) = &c.journals {
        set("journals", path_value(p));
    }
    if let Some(p) = &c.scheme {
        set("scheme", path_value(p));
    }
    if let Some(p) = &c.out {
        set("out", path_value(p));
    }
    if let Some(l) = c.level {
        set("level", toml::Value::String(l.as_str().into()));
    }
    if let Some(m) = c.mode {
        set("mode", toml::Value::String(m.as_str().into()));
    }
    if let Some(w) = c.min_weight {
        set("min_weight", toml::Value::Integer(w as i64));
    }
    if let Some(ws) = &c.windows {
        set("windows", toml::Value::Array(ws.iter().map(|&w| toml::Value::Integer(w as i64)).collect()));
    }
    if let Some(n) = c.nsims {
        set("n_sims", toml::Value::Integer(n as i64));
    }
    if let Some(s) = c.seed {
        set("seed", toml::Value::Integer(s as i64));
    }
    if c.strict {
        set("strict", toml::Value::Boolean(true));
    }
    table.entry("out").or_insert_with(|| toml::Value::String("out".into()));
    if placeholders {
        for key in ["references", "journals", "scheme"] {
            table.entry(key).or_insert_with(|| toml::Value::String(String::new()));
        }
    }
    table
        .try_into::<PipelineConfig>()
        .map_err(|e| CliError::config(e.to_string().replace('\n', " "), c.config.as_deref()))
}

fn validated(c: &Common) -> Result<PipelineConfig, CliError> {
    let config = build_config(c, false)?;
    config.validate()?;
    Ok(config)
}

fn report(
    sink: &mut ArtifactWriter,
    name: &str,
    kind: &str,
    value: &impl serde::Serialize,
    config: &impl serde::Serialize,
    seeds: &[(&str, u64)],
) -> Result<(), CliError> {
    sink.put(name, |w| export::write_report(w, kind, value, config, seeds))?;
    Ok(())
}

fn written(sink: &ArtifactWriter) -> Value {
    json!({ "written": sink.entries().iter().map(|e| e.file.clone()).collect::<Vec<_>>() })
}

fn run(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Ingest(c) => {
            let config = validated(&c)?;
            let (_, _, ingest) = load_corpus(&config)?;
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "ingest.json", "ingest", &ingest, &config, &config.seeds())?;
            Ok(written(&sink))
        }
        Command::Stats(c) => {
            let config = validated(&c)?;
            let (corpus, _, _) = load_corpus(&config)?;
            let (stats, rows) = corpus_stats(&config, &corpus);
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "stats.json", "stats", &stats, &config, &config.seeds())?;
            sink.put("price_index.csv", |w| export::write_price_csv(w, &rows))?;
            Ok(written(&sink))
        }
        Command::Cocite(c) => {
            let config = validated(&c)?;
            let (corpus, _, _) = load_corpus(&config)?;
            let graph = build_cocitation(&corpus, config.level, config.mode);
            let (_, census) = giant_component(&graph);
            let value = json!({
                "network": summarize(&graph),
                "components": census,
                "shares_by_area": intra_inter_shares(&graph, Grouping::AreaLabel).map_err(|e| e.to_string()),
                "shares_by_main_field": intra_inter_shares(&graph, Grouping::MainFields).map_err(|e| e.to_string()),
            });
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "cocite.json", "cocite", &value, &config, &config.seeds())?;
            sink.put("network.graphml", |w| export::write_graphml(w, &graph, None))?;
            sink.put("network_edges.csv", |w| export::write_edge_csv(w, &graph))?;
            Ok(written(&sink))
        }
        Command::Pfnet(c) => {
            let config = validated(&c)?;
            let (corpus, _, _) = load_corpus(&config)?;
            let net = network_stage(&config, &corpus)?;
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "pfnet.json", "pfnet", &net.report(&config), &config, &config.seeds())?;
            sink.put("pfnet.graphml", |w| export::write_graphml(w, &net.graph, Some(&net.pfnet.retained)))?;
            sink.put("pfnet_edges.csv", |w| export::write_edge_csv(w, &net.pruned))?;
            sink.put("pfnet_filtered.graphml", |w| export::write_graphml(w, &net.filtered, None))?;
            Ok(written(&sink))
        }
        Command::Centrality(c) => {
            let config = validated(&c)?;
            let (corpus, _, _) = load_corpus(&config)?;
            let net = network_stage(&config, &corpus)?;
            let (centrality, error): (CentralityReport, _) =
                centrality_with_fallback(&net.pruned, centrality_options(&config));
            let value = json!({ "centrality_graph": "pfnet", "error": error, "centrality": centrality });
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "centrality.json", "centrality", &value, &config, &config.seeds())?;
            sink.put("centrality.csv", |w| export::write_centrality_csv(w, &centrality))?;
            Ok(written(&sink))
        }
        Command::Tailfit(t) => {
            let (config, samples, population) = match &t.counts {
                Some(path) => {
                    let config = build_config(&t.common, true)?;
                    if config.n_sims > 0 && config.seed.is_none() {
                        return Err(CliError::config("a seed is required when n_sims > 0", None));
                    }
                    (config, read_counts(path)?, "counts_file")
                }
                None => {
                    let config = validated(&t.common)?;
                    let (corpus, _, _) = load_corpus(&config)?;
                    let samples = corpus.journal_citations();
                    (config, samples, "citations_per_journal")
                }
            };
            if config.n_sims > 0 && config.n_sims < cocite::heavytail::MIN_SIMULATIONS {
                return Err(CliError::config(
                    format!("n_sims must be 0 or at least {}", cocite::heavytail::MIN_SIMULATIONS),
                    None,
                ));
            }
            let value = tail_report(&config, population, &samples);
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "tailfit.json", "tailfit", &value, &config, &config.seeds())?;
            Ok(written(&sink))
        }
        Command::Compare(c) => {
            let config = validated(&c)?;
            let (corpus, journals, _) = load_corpus(&config)?;
            let value = comparison_report(&config, &corpus, &journals);
            let mut sink = ArtifactWriter::new(&config.out)?;
            report(&mut sink, "comparison.json", "comparison", &value, &config, &config.seeds())?;
            Ok(written(&sink))
        }
        Command::Pipeline(c) => {
            let config = build_config(&c, false)?;
            let manifest = run_pipeline(&config)?;
            Ok(serde_json::to_value(manifest).unwrap_or(Value::Null))
        }
        Command::Synth(s) => synth(s),
    }
}

fn read_counts(path: &Path) -> Result<Vec<u64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(e.to_string(), Some(path)))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.parse::<u64>()
                .map_err(|_| CliError::input(format!("line {}: not a non-negative integer: {l:?}", i + 1), Some(path)))
        })
        .collect()
}

fn synth(s: SynthArgs) -> Result<Value, CliError> {
    let scheme = load_scheme(&s.scheme).map_err(|e| CliError::config(e.to_string(), Some(&s.scheme)))?;
    let mut params = if s.scale {
        SynthParams::scale()
    } else {
        SynthParams::bundled()
    };
    if let Some(v) = s.seed {
        params.seed = v;
    }
    if let Some(v) = s.entries {
        params.entries = v;
    }
    if let Some(v) = s.references {
        params.references = v;
    }
    if let Some(v) = s.journals {
        params.journals = v;
    }
    if params.entries == 0 || params.journals == 0 {
        return Err(CliError::config("entries and journals must be positive", None));
    }
    let corpus = generate(&params, &scheme);
    fs::create_dir_all(&s.out).map_err(|e| output_error(&s.out, e))?;
    let refs = s.out.join("references.csv");
    let journals = s.out.join("journals.csv");
    let scheme_copy = s.out.join("scheme.csv");
    let file = |p: &Path| fs::File::create(p).map(std::io::BufWriter::new).map_err(|e| output_error(p, e));
    corpus.write_references_csv(file(&refs)?).map_err(|e| output_error(&refs, e))?;
    corpus.write_journals_csv(file(&journals)?).map_err(|e| output_error(&journals, e))?;
    fs::copy(&s.scheme, &scheme_copy).map_err(|e| output_error(&scheme_copy, e))?;
    let config = format!(
        "references = \"references.csv\"\njournals = \"journals.csv\"\nscheme = \"scheme.csv\"\n\
         level = \"journal\"\nmode = \"set\"\nmin_weight = 5\nwindows = [5, 10, 15, 20]\n\
         n_sims = 1000\nseed = {}\nmin_tail = 20\nout = \"out\"\n\n\
         [comparison_window]\ncitation_from = 2014\ncitation_to = 2018\n\
         publication_from = 2008\npublication_to = 2015\n",
        params.seed
    );
    let config_path = s.out.join("pipeline.toml");
    fs::write(&config_path, config).map_err(|e| output_error(&config_path, e))?;
    Ok(json!({
        "params": params,
        "written": ["references.csv", "journals.csv", "scheme.csv", "pipeline.toml"],
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::config(first, None).line());
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("{}", CliError::config("--workers must be positive", None).line());
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", CliError::config(e.to_string(), None).line());
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code)
        }
    }
}
