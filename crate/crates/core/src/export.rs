//! Serialization of graphs, tables and JSON reports. Every writer is
//! byte-stable for identical inputs.

use std::io::Write;

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::Writer;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::graph::CoCitationGraph;
use crate::metrics::PriceIndexReport;
use crate::netmetrics::CentralityReport;

pub const TOOL_NAME: &str = "cocite";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Significant digits kept for every floating-point number written.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("XML: {0}")]
    Xml(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl From<quick_xml::Error> for ExportError {
    fn from(e: quick_xml::Error) -> Self {
        ExportError::Xml(e.to_string())
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Number formatting shared by the CSV writers.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        let r = round_sig(x);
        if r == 0.0 {
            "0".into()
        } else {
            r.to_string()
        }
    }
}

/// Rounds floats and rebuilds objects with sorted keys.
pub fn normalize_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize_json).collect()),
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, normalize_json(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

/// Pretty JSON with sorted keys, rounded numbers and a trailing newline.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> Result<String, ExportError> {
    let v = normalize_json(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Wraps a report with the tool version, the effective configuration and
/// the seeds that produced it.
pub fn envelope<R: Serialize, C: Serialize>(
    kind: &str,
    report: &R,
    config: &C,
    seeds: &[(&str, u64)],
) -> Result<Value, ExportError> {
    let mut map = Map::new();
    map.insert("tool".into(), Value::from(TOOL_NAME));
    map.insert("version".into(), Value::from(TOOL_VERSION));
    map.insert("kind".into(), Value::from(kind));
    map.insert("config".into(), serde_json::to_value(config)?);
    map.insert(
        "seeds".into(),
        Value::Object(seeds.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect()),
    );
    map.insert("report".into(), serde_json::to_value(report)?);
    Ok(Value::Object(map))
}

pub fn write_report<W: Write, R: Serialize, C: Serialize>(
    mut out: W,
    kind: &str,
    report: &R,
    config: &C,
    seeds: &[(&str, u64)],
) -> Result<(), ExportError> {
    out.write_all(to_stable_json(&envelope(kind, report, config, seeds)?)?.as_bytes())?;
    Ok(())
}

fn key(writer: &mut Writer<impl Write>, id: &str, domain: &str, ty: &str) -> Result<(), ExportError> {
    let mut el = BytesStart::new("key");
    el.push_attribute(("id", id));
    el.push_attribute(("for", domain));
    el.push_attribute(("attr.name", id));
    el.push_attribute(("attr.type", ty));
    writer.write_event(Event::Empty(el))?;
    Ok(())
}

fn data(writer: &mut Writer<impl Write>, key: &str, value: &str) -> Result<(), ExportError> {
    let mut el = BytesStart::new("data");
    el.push_attribute(("key", key));
    writer.write_event(Event::Start(el))?;
    writer.write_event(Event::Text(BytesText::new(value)))?;
    writer.write_event(Event::End(BytesEnd::new("data")))?;
    Ok(())
}

/// GraphML with node keys `label`, `citations`, `area` and edge key
/// `weight`; `retained` adds a boolean `pfnet_retained` per edge.
pub fn write_graphml<W: Write>(out: W, graph: &CoCitationGraph, retained: Option<&[bool]>) -> Result<(), ExportError> {
    if let Some(r) = retained {
        assert_eq!(r.len(), graph.edge_count(), "one flag per edge");
    }
    let mut w = Writer::new_with_indent(out, b' ', 2);
    w.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))?;
    let mut root = BytesStart::new("graphml");
    root.push_attribute(("xmlns", "http://graphml.graphdrawing.org/xmlns"));
    w.write_event(Event::Start(root))?;
    key(&mut w, "label", "node", "string")?;
    key(&mut w, "citations", "node", "long")?;
    key(&mut w, "area", "node", "string")?;
    key(&mut w, "weight", "edge", "long")?;
    if retained.is_some() {
        key(&mut w, "pfnet_retained", "edge", "boolean")?;
    }
    let mut g = BytesStart::new("graph");
    g.push_attribute(("id", format!("{}_{}", graph.level.as_str(), graph.mode.as_str()).as_str()));
    g.push_attribute(("edgedefault", "undirected"));
    w.write_event(Event::Start(g))?;
    for node in graph.nodes() {
        let mut el = BytesStart::new("node");
        el.push_attribute(("id", node.id.as_str()));
        w.write_event(Event::Start(el))?;
        data(&mut w, "label", &node.label)?;
        data(&mut w, "citations", &node.citations.to_string())?;
        data(&mut w, "area", node.area_label.as_deref().unwrap_or(""))?;
        w.write_event(Event::End(BytesEnd::new("node")))?;
    }
    for (i, e) in graph.edges().iter().enumerate() {
        let mut el = BytesStart::new("edge");
        el.push_attribute(("source", graph.node(e.source).id.as_str()));
        el.push_attribute(("target", graph.node(e.target).id.as_str()));
        w.write_event(Event::Start(el))?;
        data(&mut w, "weight", &e.weight.to_string())?;
        if let Some(r) = retained {
            data(&mut w, "pfnet_retained", if r[i] { "true" } else { "false" })?;
        }
        w.write_event(Event::End(BytesEnd::new("edge")))?;
    }
    w.write_event(Event::End(BytesEnd::new("graph")))?;
    w.write_event(Event::End(BytesEnd::new("graphml")))?;
    w.get_mut().write_all(b"\n")?;
    Ok(())
}

/// `source,target,weight` rows by canonical pair, using node ids.
pub fn write_edge_csv<W: Write>(out: W, graph: &CoCitationGraph) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "weight"])?;
    for e in graph.edges() {
        w.write_record([
            graph.node(e.source).id.as_str(),
            graph.node(e.target).id.as_str(),
            &e.weight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_centrality_csv<W: Write>(out: W, report: &CentralityReport) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "node_id",
        "label",
        "citations",
        "weighted_degree",
        "betweenness",
        "closeness",
        "eigenvector",
    ])?;
    for n in &report.nodes {
        w.write_record([
            n.node_id.clone(),
            n.label.clone(),
            n.citations.to_string(),
            n.weighted_degree.to_string(),
            fmt_num(n.betweenness),
            fmt_num(n.closeness),
            fmt_num(n.eigenvector),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per group and window; the overall population has an empty group.
pub fn write_price_csv<W: Write>(out: W, reports: &[PriceIndexReport]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "window", "fraction", "eligible", "excluded_negative_age", "boundary"])?;
    for r in reports {
        let boundary = match r.boundary {
            crate::metrics::WindowBoundary::Exclusive => "exclusive",
            crate::metrics::WindowBoundary::Inclusive => "inclusive",
        };
        for (i, n) in r.windows.iter().enumerate() {
            let fraction = r.fractions.as_ref().map_or(String::new(), |f| fmt_num(f[i]));
            w.write_record([
                r.group.clone().unwrap_or_default(),
                n.to_string(),
                fraction,
                r.eligible.to_string(),
                r.excluded_negative_age.to_string(),
                boundary.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes rows of any serializable record type with a header.
pub fn write_rows_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
