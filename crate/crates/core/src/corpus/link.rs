//! Linking references to journals through ISSNs and attributing the
//! classification hierarchy to each journal.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::ingest::{Funnel, ReferenceRecord};
use super::issn::{normalize_issn, Issn};
use super::scheme::{combined_area_label, parse_code, ClassificationScheme};
use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub journal_id: String,
    pub title: String,
    pub issns: Vec<Issn>,
    pub asjc_codes: Vec<u16>,
    pub open_access: bool,
    /// Citations received in the comparison citation window by articles
    /// published in the comparison publication window.
    pub window_citations: u64,
    /// Articles published in the comparison publication window.
    pub window_articles: u64,
}

#[derive(Debug, Deserialize)]
struct JournalRow {
    journal_id: String,
    title: String,
    issns: String,
    asjc_codes: String,
    open_access: String,
    window_citations: u64,
    window_articles: u64,
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split([';', ',']).map(str::trim).filter(|s| !s.is_empty())
}

/// Reads `journal_id,title,issns,asjc_codes,open_access,window_citations,window_articles`.
pub fn read_journals_csv<R: Read>(reader: R) -> Result<Vec<JournalRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<JournalRow>().enumerate() {
        let bad = |msg: String| CorpusError::InvalidJournal {
            row: i + 1,
            message: msg,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let issns = split_list(&row.issns)
            .map(normalize_issn)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let asjc_codes = split_list(&row.asjc_codes)
            .map(|c| parse_code(c).ok_or_else(|| bad(format!("invalid classification code {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let open_access = match row.open_access.as_str() {
            "1" | "true" | "TRUE" | "True" => true,
            "0" | "false" | "FALSE" | "False" | "" => false,
            other => return Err(bad(format!("open_access must be 0/1, got {other:?}"))),
        };
        let journal = JournalRecord {
            journal_id: row.journal_id,
            title: row.title,
            issns,
            asjc_codes,
            open_access,
            window_citations: row.window_citations,
            window_articles: row.window_articles,
        };
        journal.validate().map_err(bad)?;
        out.push(journal);
    }
    Ok(out)
}

impl JournalRecord {
    fn validate(&self) -> Result<(), String> {
        if self.journal_id.trim().is_empty() {
            return Err("empty journal_id".into());
        }
        if self.issns.is_empty() {
            return Err(format!("journal {} has no ISSN", self.journal_id));
        }
        if self.asjc_codes.is_empty() {
            return Err(format!("journal {} has no classification code", self.journal_id));
        }
        Ok(())
    }
}

/// A journal with its classification resolved at every tier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedJournal {
    pub record: JournalRecord,
    /// Sorted, distinct 4-digit field codes.
    pub fields: Vec<u16>,
    /// Sorted, distinct 2-digit main-field prefixes.
    pub main_fields: Vec<u8>,
    /// Sorted, distinct area names.
    pub areas: Vec<String>,
    pub area_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkedRecord {
    pub record: ReferenceRecord,
    /// Indices into [`LinkedCorpus::journals`], sorted and distinct.
    pub journals: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IssnClaim {
    pub issn: Issn,
    pub kept: String,
    pub ignored: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinkOptions {
    /// Keep the first journal that claims an ISSN instead of failing.
    pub lenient_duplicate_issn: bool,
}

/// Citation-window bounds (inclusive calendar years) for cross-source comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CitationWindow {
    pub citation_from: i32,
    pub citation_to: i32,
    pub publication_from: i32,
    pub publication_to: i32,
}

impl Default for CitationWindow {
    fn default() -> Self {
        Self {
            citation_from: 2016,
            citation_to: 2016,
            publication_from: 2013,
            publication_to: 2015,
        }
    }
}

impl CitationWindow {
    pub fn contains(&self, record: &ReferenceRecord) -> bool {
        let cy = record.citation_date.year();
        let py = record.publication_date.year();
        (self.citation_from..=self.citation_to).contains(&cy)
            && (self.publication_from..=self.publication_to).contains(&py)
    }
}

/// A level of the classification hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Field,
    MainField,
    Area,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WindowCounts {
    pub citations: u64,
    pub articles: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkedCorpus {
    pub records: Vec<LinkedRecord>,
    /// Journals reached by at least one record, sorted by `journal_id`.
    pub journals: Vec<ClassifiedJournal>,
    #[serde(skip)]
    pub scheme: ClassificationScheme,
    pub funnel: Funnel,
    /// ISSNs claimed by more than one journal (lenient mode only).
    pub issn_conflicts: Vec<IssnClaim>,
    /// Works whose records disagree on their ISSN list. Reported, not resolved.
    pub work_conflicts: Vec<String>,
}

/// Resolves each record to its journal(s) via ISSN and classifies the journals.
///
/// Unresolved records are dropped and counted in `funnel.unresolved`. A work
/// resolving to several journals is attributed to all of them.
pub fn link_and_classify(
    records: Vec<ReferenceRecord>,
    funnel: Funnel,
    journals: Vec<JournalRecord>,
    scheme: ClassificationScheme,
    options: LinkOptions,
) -> Result<LinkedCorpus, CorpusError> {
    for j in &journals {
        for &code in &j.asjc_codes {
            if scheme.field(code).is_none() {
                return Err(CorpusError::UnknownCode {
                    journal_id: j.journal_id.clone(),
                    code,
                });
            }
        }
    }

    let mut by_issn: HashMap<&Issn, usize> = HashMap::new();
    let mut issn_conflicts = Vec::new();
    for (idx, j) in journals.iter().enumerate() {
        for issn in &j.issns {
            if let Some(&first) = by_issn.get(issn) {
                if first == idx {
                    continue;
                }
                let claim = IssnClaim {
                    issn: issn.clone(),
                    kept: journals[first].journal_id.clone(),
                    ignored: j.journal_id.clone(),
                };
                if !options.lenient_duplicate_issn {
                    return Err(CorpusError::DuplicateIssn(claim));
                }
                issn_conflicts.push(claim);
            } else {
                by_issn.insert(issn, idx);
            }
        }
    }

    let mut funnel = funnel;
    funnel.kept = records.len();
    funnel.unresolved = 0;
    funnel.multi_journal = 0;
    let mut resolved: Vec<(ReferenceRecord, Vec<usize>)> = Vec::with_capacity(records.len());
    let mut work_issns: HashMap<&str, Option<&[Issn]>> = HashMap::new();
    let mut conflicted: BTreeSet<String> = BTreeSet::new();
    for rec in &records {
        match work_issns.get(rec.cited_work_id.as_str()) {
            None => {
                work_issns.insert(&rec.cited_work_id, Some(&rec.issns));
            }
            Some(Some(prev)) if *prev != rec.issns.as_slice() => {
                conflicted.insert(rec.cited_work_id.clone());
            }
            _ => {}
        }
    }
    drop(work_issns);
    for rec in records {
        let mut hits: Vec<usize> = rec.issns.iter().filter_map(|i| by_issn.get(i).copied()).collect();
        hits.sort_unstable();
        hits.dedup();
        if hits.is_empty() {
            funnel.unresolved += 1;
            continue;
        }
        if hits.len() > 1 {
            funnel.multi_journal += 1;
        }
        resolved.push((rec, hits));
    }
    funnel.linked = resolved.len();

    let used: BTreeSet<usize> = resolved.iter().flat_map(|(_, h)| h.iter().copied()).collect();
    let mut order: Vec<usize> = used.into_iter().collect();
    order.sort_by(|&a, &b| journals[a].journal_id.cmp(&journals[b].journal_id));
    let mut remap = vec![u32::MAX; journals.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as u32;
    }
    let classified: Vec<ClassifiedJournal> = order
        .iter()
        .map(|&old| classify_journal(journals[old].clone(), &scheme))
        .collect();
    let linked_records = resolved
        .into_iter()
        .map(|(record, hits)| {
            let mut journals: Vec<u32> = hits.into_iter().map(|h| remap[h]).collect();
            journals.sort_unstable();
            LinkedRecord { record, journals }
        })
        .collect();

    Ok(LinkedCorpus {
        records: linked_records,
        journals: classified,
        scheme,
        funnel,
        issn_conflicts,
        work_conflicts: conflicted.into_iter().collect(),
    })
}

/// Classifies a journal whose codes are all known to `scheme`.
pub fn classify_journal(record: JournalRecord, scheme: &ClassificationScheme) -> ClassifiedJournal {
    let fields: BTreeSet<u16> = record.asjc_codes.iter().copied().collect();
    let main_fields: BTreeSet<u8> = fields.iter().map(|c| (c / 100) as u8).collect();
    let areas: BTreeSet<String> = fields
        .iter()
        .filter_map(|&c| scheme.area_of(c))
        .map(str::to_string)
        .collect();
    let area_label = combined_area_label(areas.iter().map(String::as_str));
    ClassifiedJournal {
        record,
        fields: fields.into_iter().collect(),
        main_fields: main_fields.into_iter().collect(),
        areas: areas.into_iter().collect(),
        area_label,
    }
}

impl LinkedCorpus {
    /// Names of the classification units of journal `j` at `tier`.
    pub fn journal_groups(&self, j: u32, tier: Tier) -> Vec<&str> {
        let journal = &self.journals[j as usize];
        match tier {
            Tier::Field => journal
                .fields
                .iter()
                .filter_map(|&c| self.scheme.field(c).map(|f| f.name.as_str()))
                .collect(),
            Tier::MainField => journal
                .main_fields
                .iter()
                .filter_map(|&p| self.scheme.main_field(p).map(|m| m.name.as_str()))
                .collect(),
            Tier::Area => journal.areas.iter().map(String::as_str).collect(),
        }
    }

    /// Distinct classification units reached by a record through any of its journals.
    pub fn record_groups(&self, record: &LinkedRecord, tier: Tier) -> BTreeSet<&str> {
        record
            .journals
            .iter()
            .flat_map(|&j| self.journal_groups(j, tier))
            .collect()
    }

    /// Wikipedia-side citation and distinct-article counts per journal within
    /// the comparison window. Journals with no windowed citation are absent.
    pub fn window_counts(&self, window: &CitationWindow) -> BTreeMap<String, WindowCounts> {
        let mut works: BTreeMap<u32, BTreeSet<&str>> = BTreeMap::new();
        let mut cites: BTreeMap<u32, u64> = BTreeMap::new();
        for lr in self.records.iter().filter(|lr| window.contains(&lr.record)) {
            for &j in &lr.journals {
                *cites.entry(j).or_default() += 1;
                works.entry(j).or_default().insert(&lr.record.cited_work_id);
            }
        }
        cites
            .into_iter()
            .map(|(j, citations)| {
                let articles = works.get(&j).map_or(0, |s| s.len() as u64);
                (
                    self.journals[j as usize].record.journal_id.clone(),
                    WindowCounts { citations, articles },
                )
            })
            .collect()
    }

    /// Distinct cited works per main-field name, counting a work once for
    /// each main field of its journal(s).
    pub fn articles_per_main_field(&self) -> BTreeMap<String, u64> {
        let mut works: BTreeMap<u8, BTreeSet<&str>> = BTreeMap::new();
        for lr in &self.records {
            let prefixes: BTreeSet<u8> = lr
                .journals
                .iter()
                .flat_map(|&j| self.journals[j as usize].main_fields.iter().copied())
                .collect();
            for p in prefixes {
                works.entry(p).or_default().insert(&lr.record.cited_work_id);
            }
        }
        works
            .into_iter()
            .filter_map(|(p, set)| self.scheme.main_field(p).map(|m| (m.name.clone(), set.len() as u64)))
            .collect()
    }

    /// Total citations per journal over the whole corpus.
    pub fn journal_citations(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.journals.len()];
        for lr in &self.records {
            for &j in &lr.journals {
                counts[j as usize] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn scheme() -> ClassificationScheme {
        ClassificationScheme::from_entries(vec![
            (1000, "Multidisciplinary".into(), "Multidisciplinary".into(), "Multidisciplinary".into()),
            (1311, "Genetics".into(), "Biochemistry, Genetics and Molecular Biology".into(), "Life Sciences".into()),
            (2700, "General Medicine".into(), "Medicine".into(), "Health Sciences".into()),
            (2725, "Infectious Diseases".into(), "Medicine".into(), "Health Sciences".into()),
        ])
        .unwrap()
    }

    fn journal(id: &str, serial: u32, codes: &[u16]) -> JournalRecord {
        JournalRecord {
            journal_id: id.into(),
            title: format!("Journal {id}"),
            issns: vec![Issn::from_serial(serial)],
            asjc_codes: codes.to_vec(),
            open_access: false,
            window_citations: 0,
            window_articles: 0,
        }
    }

    fn rec(entry: &str, work: &str, serials: &[u32]) -> ReferenceRecord {
        ReferenceRecord {
            citing_entry_id: entry.into(),
            cited_work_id: work.into(),
            citation_date: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
            publication_date: NaiveDate::from_ymd_opt(2014, 1, 1).unwrap(),
            issns: serials.iter().map(|&s| Issn::from_serial(s)).collect(),
        }
    }

    fn funnel_for(n: usize) -> Funnel {
        Funnel {
            raw: n,
            kept: n,
            ..Funnel::default()
        }
    }

    #[test]
    fn single_and_combined_area_labels() {
        let s = scheme();
        assert_eq!(classify_journal(journal("J1", 1, &[2700, 2725]), &s).area_label, "Health Sciences");
        let both = classify_journal(journal("J2", 2, &[1311, 2700]), &s);
        assert_eq!(both.area_label, "Health Sciences & Life Sciences");
        let swapped = classify_journal(journal("J2", 2, &[2700, 1311]), &s);
        assert_eq!(both.area_label, swapped.area_label);
        assert_eq!(both.main_fields, vec![13, 27]);
    }

    #[test]
    fn unresolved_records_dropped_and_counted() {
        let records = vec![rec("E1", "W1", &[1]), rec("E1", "W2", &[99]), rec("E2", "W1", &[1])];
        let corpus = link_and_classify(
            records,
            funnel_for(3),
            vec![journal("J1", 1, &[2700]), journal("J9", 9, &[1000])],
            scheme(),
            LinkOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.funnel.unresolved, 1);
        assert_eq!(corpus.funnel.linked, 2);
        assert_eq!(corpus.funnel.kept, corpus.funnel.linked + corpus.funnel.unresolved);
        // J9 is never cited and is not carried.
        assert_eq!(corpus.journals.len(), 1);
    }

    #[test]
    fn multi_journal_work_attributed_to_all() {
        let corpus = link_and_classify(
            vec![rec("E1", "W1", &[1, 2])],
            funnel_for(1),
            vec![journal("J2", 2, &[1311]), journal("J1", 1, &[2700])],
            scheme(),
            LinkOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.funnel.multi_journal, 1);
        assert_eq!(corpus.records[0].journals, vec![0, 1]);
        assert_eq!(corpus.journals[0].record.journal_id, "J1");
    }

    #[test]
    fn duplicate_issn_strict_and_lenient() {
        let journals = vec![journal("J1", 1, &[2700]), journal("J2", 1, &[1311])];
        let strict = link_and_classify(vec![], Funnel::default(), journals.clone(), scheme(), LinkOptions::default());
        assert!(matches!(strict, Err(CorpusError::DuplicateIssn(_))));
        let lenient = link_and_classify(
            vec![rec("E1", "W1", &[1])],
            funnel_for(1),
            journals,
            scheme(),
            LinkOptions {
                lenient_duplicate_issn: true,
            },
        )
        .unwrap();
        assert_eq!(lenient.issn_conflicts.len(), 1);
        assert_eq!(lenient.issn_conflicts[0].kept, "J1");
        assert_eq!(lenient.journals[0].record.journal_id, "J1");
    }

    #[test]
    fn unknown_code_rejected() {
        let err = link_and_classify(vec![], Funnel::default(), vec![journal("J1", 1, &[3100])], scheme(), LinkOptions::default());
        assert!(matches!(err, Err(CorpusError::UnknownCode { code: 3100, .. })));
    }

    #[test]
    fn conflicting_work_metadata_reported() {
        let corpus = link_and_classify(
            vec![rec("E1", "W1", &[1]), rec("E2", "W1", &[2])],
            funnel_for(2),
            vec![journal("J1", 1, &[2700]), journal("J2", 2, &[1311])],
            scheme(),
            LinkOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.work_conflicts, vec!["W1".to_string()]);
    }

    #[test]
    fn window_counts_and_field_articles() {
        let mut late = rec("E3", "W3", &[1]);
        late.citation_date = NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
        let corpus = link_and_classify(
            vec![rec("E1", "W1", &[1]), rec("E2", "W1", &[1]), rec("E2", "W2", &[1, 2]), late],
            funnel_for(4),
            vec![journal("J1", 1, &[2700]), journal("J2", 2, &[1311, 2725])],
            scheme(),
            LinkOptions::default(),
        )
        .unwrap();
        let w = corpus.window_counts(&CitationWindow::default());
        assert_eq!(w["J1"], WindowCounts { citations: 3, articles: 2 });
        assert_eq!(w["J2"], WindowCounts { citations: 1, articles: 1 });
        let per_field = corpus.articles_per_main_field();
        assert_eq!(per_field["Medicine"], 3);
        assert_eq!(per_field["Biochemistry, Genetics and Molecular Biology"], 1);
        assert_eq!(corpus.journal_citations(), vec![4, 1]);
    }

    #[test]
    fn journal_csv_parsing() {
        let csv = "journal_id,title,issns,asjc_codes,open_access,window_citations,window_articles\n\
                   J1,Nature,0028-0836;1476-4687,1000,0,100,20\n";
        let js = read_journals_csv(csv.as_bytes()).unwrap();
        assert_eq!(js[0].issns.len(), 2);
        assert_eq!(js[0].asjc_codes, vec![1000]);
        let bad = "journal_id,title,issns,asjc_codes,open_access,window_citations,window_articles\n\
                   J1,Nature,0028-0836,,0,1,1\n";
        assert!(matches!(read_journals_csv(bad.as_bytes()), Err(CorpusError::InvalidJournal { row: 1, .. })));
    }
}
