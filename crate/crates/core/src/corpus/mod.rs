//! Reference ingestion, journal linking and subject classification.

mod ingest;
mod issn;
mod link;
mod scheme;

pub use ingest::{
    ingest_references, parse_date, read_references_csv, read_references_jsonl, Funnel, IngestOptions,
    Ingested, RawReference, ReferenceRecord, RowError,
};
pub use issn::{normalize_issn, Issn, IssnError};
pub use link::{
    classify_journal, link_and_classify, read_journals_csv, CitationWindow, ClassifiedJournal, IssnClaim,
    JournalRecord, LinkOptions, LinkedCorpus, LinkedRecord, Tier, WindowCounts,
};
pub use scheme::{
    combined_area_label, ClassificationScheme, Field, MainField, SchemeCounts, REFERENCE_AREAS,
    REFERENCE_MAIN_FIELDS,
};

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("row {}: {}", .0.row, .0.message)]
    Parse(RowError),
    #[error("journal row {row}: {message}")]
    InvalidJournal { row: usize, message: String },
    #[error("classification scheme: {0}")]
    Scheme(String),
    #[error("ISSN {} claimed by both {} and {}", .0.issn, .0.kept, .0.ignored)]
    DuplicateIssn(IssnClaim),
    #[error("journal {journal_id} carries code {code} missing from the classification scheme")]
    UnknownCode { journal_id: String, code: u16 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn open(path: &Path) -> Result<BufReader<File>, CorpusError> {
    File::open(path).map(BufReader::new).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Ingests a reference file, choosing JSON Lines for `.jsonl`/`.ndjson`/`.json`
/// extensions and CSV otherwise.
pub fn ingest_path(path: &Path, options: IngestOptions) -> Result<Ingested, CorpusError> {
    let reader = open(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "jsonl" | "ndjson" | "json" => ingest_references(read_references_jsonl(reader), options),
        _ => ingest_references(read_references_csv(reader), options),
    }
}

pub fn load_journals(path: &Path) -> Result<Vec<JournalRecord>, CorpusError> {
    read_journals_csv(open(path)?)
}

pub fn load_scheme(path: &Path) -> Result<ClassificationScheme, CorpusError> {
    ClassificationScheme::from_csv(open(path)?)
}
