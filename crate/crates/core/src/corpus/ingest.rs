//! Reference ingestion: row parsing, deduplication and date validation.

use std::collections::BTreeMap;
use std::io::{BufRead, Read};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::issn::{normalize_issn, Issn};
use super::CorpusError;

/// One citation event after validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub citing_entry_id: String,
    pub cited_work_id: String,
    pub citation_date: NaiveDate,
    pub publication_date: NaiveDate,
    pub issns: Vec<Issn>,
}

/// An input row before validation. Dates are kept as text so that rows
/// lacking a usable publication date can be counted rather than rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawReference {
    pub citing_entry_id: String,
    pub cited_work_id: String,
    pub citation_date: String,
    pub publication_date: Option<String>,
    pub issns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based position among the data rows (headers and blank lines excluded).
    pub row: usize,
    pub message: String,
}

/// Counts at each stage of the pre-processing funnel.
///
/// `raw = malformed + dropped_duplicates + dropped_missing_date + kept` and,
/// once linked, `kept = linked + unresolved`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub raw: usize,
    pub malformed: usize,
    pub dropped_duplicates: usize,
    pub dropped_missing_date: usize,
    pub kept: usize,
    pub unresolved: usize,
    pub linked: usize,
    /// Linked records whose work resolves to more than one journal.
    pub multi_journal: usize,
}

impl Funnel {
    pub fn deduplicated(&self) -> usize {
        self.raw - self.malformed - self.dropped_duplicates
    }

    pub fn is_conserved(&self) -> bool {
        self.raw == self.malformed + self.dropped_duplicates + self.dropped_missing_date + self.kept
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Abort on the first malformed row instead of collecting it.
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ingested {
    /// Sorted by `(citing_entry_id, cited_work_id)`.
    pub records: Vec<ReferenceRecord>,
    pub funnel: Funnel,
    pub errors: Vec<RowError>,
}

/// Parses `YYYY-MM-DD`, `YYYY-MM`, `YYYY`, or an RFC 3339 timestamp (date part).
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    let date_part = s.split(['T', ' ']).next().unwrap_or(s);
    let mut parts = date_part.split('-');
    let year = parts.next()?;
    if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if let Ok(d) = NaiveDate::parse_from_str(date_part, "%Y-%m-%d") {
        return Some(d);
    }
    let year: i32 = year.parse().ok()?;
    match (parts.next(), parts.next()) {
        (None, _) => NaiveDate::from_ymd_opt(year, 1, 1),
        (Some(m), None) if m.len() == 2 => NaiveDate::from_ymd_opt(year, m.parse().ok()?, 1),
        _ => None,
    }
}

fn split_issns(raw: &str) -> Vec<String> {
    raw.split([';', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    citing_entry_id: String,
    cited_work_id: String,
    citation_date: String,
    #[serde(default)]
    publication_date: Option<String>,
    #[serde(default)]
    issns: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum IssnField {
    Joined(String),
    List(Vec<String>),
}

#[derive(Debug, Deserialize)]
struct JsonRow {
    citing_entry_id: String,
    cited_work_id: String,
    citation_date: String,
    #[serde(default)]
    publication_date: Option<String>,
    #[serde(default)]
    issns: Option<IssnField>,
}

/// Reads reference rows from CSV with a header line.
pub fn read_references_csv<R: Read>(
    reader: R,
) -> impl Iterator<Item = Result<RawReference, RowError>> {
    let rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    rdr.into_deserialize::<CsvRow>().enumerate().map(|(i, row)| {
        let row = row.map_err(|e| RowError {
            row: i + 1,
            message: e.to_string(),
        })?;
        Ok(RawReference {
            citing_entry_id: row.citing_entry_id,
            cited_work_id: row.cited_work_id,
            citation_date: row.citation_date,
            publication_date: row.publication_date,
            issns: row.issns.as_deref().map(split_issns).unwrap_or_default(),
        })
    })
}

/// Reads reference rows from JSON Lines; blank lines are skipped.
/// `issns` may be a semicolon-separated string or an array of strings.
pub fn read_references_jsonl<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<RawReference, RowError>> {
    reader
        .lines()
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true))
        .enumerate()
        .map(|(i, line)| {
            let err = |message: String| RowError { row: i + 1, message };
            let text = line.map_err(|e| err(e.to_string()))?;
            let row: JsonRow = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
            let issns = match row.issns {
                None => Vec::new(),
                Some(IssnField::Joined(s)) => split_issns(&s),
                Some(IssnField::List(v)) => v,
            };
            Ok(RawReference {
                citing_entry_id: row.citing_entry_id,
                cited_work_id: row.cited_work_id,
                citation_date: row.citation_date,
                publication_date: row.publication_date,
                issns,
            })
        })
}

enum Validated {
    Ok {
        citing_entry_id: String,
        cited_work_id: String,
        citation_date: NaiveDate,
        publication_date: Option<NaiveDate>,
        issns: Vec<Issn>,
    },
    Malformed(String),
}

fn validate(raw: RawReference, issn_errors: &mut Vec<String>) -> Validated {
    let citing = raw.citing_entry_id.trim();
    let cited = raw.cited_work_id.trim();
    if citing.is_empty() || cited.is_empty() {
        return Validated::Malformed("empty citing_entry_id or cited_work_id".into());
    }
    let Some(citation_date) = parse_date(&raw.citation_date) else {
        return Validated::Malformed(format!("unparseable citation_date {:?}", raw.citation_date));
    };
    let mut issns = Vec::with_capacity(raw.issns.len());
    for s in &raw.issns {
        match normalize_issn(s) {
            Ok(i) => issns.push(i),
            Err(e) => issn_errors.push(e.to_string()),
        }
    }
    issns.sort();
    issns.dedup();
    Validated::Ok {
        citing_entry_id: citing.to_string(),
        cited_work_id: cited.to_string(),
        citation_date,
        publication_date: raw.publication_date.as_deref().and_then(parse_date),
        issns,
    }
}

struct Candidate {
    citation_date: NaiveDate,
    publication_date: Option<NaiveDate>,
    issns: Vec<Issn>,
}

/// Validates rows, deduplicates on `(citing_entry_id, cited_work_id)` keeping
/// the earliest citation date (first seen on ties), then drops rows without a
/// parseable publication date.
///
/// Rows that fail validation are collected as [`RowError`]s unless
/// `options.strict` is set, in which case the first one aborts ingestion.
/// Invalid ISSNs are reported but do not drop the row.
pub fn ingest_references<I>(rows: I, options: IngestOptions) -> Result<Ingested, CorpusError>
where
    I: IntoIterator<Item = Result<RawReference, RowError>>,
{
    let mut funnel = Funnel::default();
    let mut errors = Vec::new();
    let mut unique: BTreeMap<(String, String), Candidate> = BTreeMap::new();
    let mut issn_errors = Vec::new();
    for (idx, row) in rows.into_iter().enumerate() {
        funnel.raw += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                if options.strict {
                    return Err(CorpusError::Parse(e));
                }
                funnel.malformed += 1;
                errors.push(e);
                continue;
            }
        };
        issn_errors.clear();
        let validated = validate(row, &mut issn_errors);
        let row_no = idx + 1;
        if !issn_errors.is_empty() {
            let err = RowError {
                row: row_no,
                message: issn_errors.join("; "),
            };
            if options.strict {
                return Err(CorpusError::Parse(err));
            }
            errors.push(err);
        }
        match validated {
            Validated::Malformed(message) => {
                let err = RowError {
                    row: row_no,
                    message,
                };
                if options.strict {
                    return Err(CorpusError::Parse(err));
                }
                funnel.malformed += 1;
                errors.push(err);
            }
            Validated::Ok {
                citing_entry_id,
                cited_work_id,
                citation_date,
                publication_date,
                issns,
            } => {
                let candidate = Candidate {
                    citation_date,
                    publication_date,
                    issns,
                };
                match unique.entry((citing_entry_id, cited_work_id)) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(candidate);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        funnel.dropped_duplicates += 1;
                        if candidate.citation_date < o.get().citation_date {
                            o.insert(candidate);
                        }
                    }
                }
            }
        }
    }
    let mut records = Vec::with_capacity(unique.len());
    for ((citing_entry_id, cited_work_id), c) in unique {
        match c.publication_date {
            Some(publication_date) => records.push(ReferenceRecord {
                citing_entry_id,
                cited_work_id,
                citation_date: c.citation_date,
                publication_date,
                issns: c.issns,
            }),
            None => funnel.dropped_missing_date += 1,
        }
    }
    funnel.kept = records.len();
    Ok(Ingested {
        records,
        funnel,
        errors,
    })
}

impl From<&ReferenceRecord> for RawReference {
    fn from(r: &ReferenceRecord) -> Self {
        RawReference {
            citing_entry_id: r.citing_entry_id.clone(),
            cited_work_id: r.cited_work_id.clone(),
            citation_date: r.citation_date.to_string(),
            publication_date: Some(r.publication_date.to_string()),
            issns: r.issns.iter().map(|i| i.as_str().to_string()).collect(),
        }
    }
}

impl Ingested {
    /// Merges independently ingested chunks, re-running deduplication across
    /// chunk boundaries.
    pub fn merge(parts: Vec<Ingested>) -> Ingested {
        let mut funnel = Funnel::default();
        let mut errors = Vec::new();
        let mut unique: BTreeMap<(String, String), ReferenceRecord> = BTreeMap::new();
        for part in parts {
            funnel.raw += part.funnel.raw;
            funnel.malformed += part.funnel.malformed;
            funnel.dropped_duplicates += part.funnel.dropped_duplicates;
            funnel.dropped_missing_date += part.funnel.dropped_missing_date;
            errors.extend(part.errors);
            for rec in part.records {
                let key = (rec.citing_entry_id.clone(), rec.cited_work_id.clone());
                match unique.entry(key) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(rec);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        funnel.dropped_duplicates += 1;
                        if rec.citation_date < o.get().citation_date {
                            o.insert(rec);
                        }
                    }
                }
            }
        }
        let records: Vec<_> = unique.into_values().collect();
        funnel.kept = records.len();
        Ingested {
            records,
            funnel,
            errors,
        }
    }
}
