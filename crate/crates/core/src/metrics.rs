//! Descriptive statistics, concentration, citation aging and the Price index.

use std::collections::{BTreeMap, HashMap};

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::corpus::{LinkedCorpus, ReferenceRecord, Tier};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("values sum to zero")]
    ZeroTotal,
    #[error("top fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("negative value {0}")]
    NegativeValue(f64),
    #[error("non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when n = 1.
    pub sd: f64,
    pub iqr: f64,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics: quantile `p` sits at 1-based position `1 + (n - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats, MetricsError> {
    let sorted = sorted_finite(values)?;
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = sorted.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)).max(0.0);
    Ok(DescriptiveStats {
        n,
        mean,
        median: quantile_sorted(&sorted, 0.5),
        sd,
        iqr,
    })
}

/// Five-number summary with Tukey fences (1.5 IQR) and the points outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

pub fn box_summary(values: &[f64]) -> Result<BoxSummary, MetricsError> {
    let sorted = sorted_finite(values)?;
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
    Ok(BoxSummary {
        min: sorted[0],
        q1,
        median: quantile_sorted(&sorted, 0.5),
        q3,
        max: sorted[sorted.len() - 1],
        lower_whisker: inside().next().unwrap_or(q1),
        upper_whisker: inside().next_back().unwrap_or(q3),
        outliers: sorted
            .iter()
            .copied()
            .filter(|v| !(lo_fence..=hi_fence).contains(v))
            .collect(),
    })
}

/// Share of the total held by the largest `ceil(top_fraction * n)` values.
pub fn concentration_share(values: &[f64], top_fraction: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(MetricsError::InvalidFraction(top_fraction));
    }
    if let Some(&v) = values.iter().find(|v| **v < 0.0) {
        return Err(MetricsError::NegativeValue(v));
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(MetricsError::ZeroTotal);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((top_fraction * values.len() as f64).ceil() as usize).clamp(1, values.len());
    Ok(sorted[..k].iter().sum::<f64>() / total)
}

/// Whether a reference of age `N` falls inside the `N`-year window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowBoundary {
    /// `0 <= age < N`
    #[default]
    Exclusive,
    /// `0 <= age <= N`
    Inclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceIndexReport {
    pub group: Option<String>,
    pub windows: Vec<u32>,
    /// One fraction per window; absent when no reference has a non-negative age.
    pub fractions: Option<Vec<f64>>,
    pub eligible: usize,
    pub excluded_negative_age: usize,
    pub boundary: WindowBoundary,
}

/// Price-index fractions for a population of citation ages in whole years.
pub fn price_fractions<I>(ages: I, windows: &[u32], boundary: WindowBoundary) -> PriceIndexReport
where
    I: IntoIterator<Item = i32>,
{
    let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
    let mut excluded = 0;
    for age in ages {
        if age < 0 {
            excluded += 1;
        } else {
            *hist.entry(age as u32).or_default() += 1;
        }
    }
    let eligible: usize = hist.values().sum();
    let fractions = (eligible > 0).then(|| {
        windows
            .iter()
            .map(|&n| {
                let inside: usize = match boundary {
                    WindowBoundary::Exclusive => hist.range(..n).map(|(_, c)| c).sum(),
                    WindowBoundary::Inclusive => hist.range(..=n).map(|(_, c)| c).sum(),
                };
                inside as f64 / eligible as f64
            })
            .collect()
    });
    PriceIndexReport {
        group: None,
        windows: windows.to_vec(),
        fractions,
        eligible,
        excluded_negative_age: excluded,
        boundary,
    }
}

/// Citation age in calendar years: citation year minus publication year.
pub fn citation_age(record: &ReferenceRecord) -> i32 {
    record.citation_date.year() - record.publication_date.year()
}

/// Price index over the whole corpus (`group_by = None`) or one report per
/// classification unit, sorted by unit name. In grouped mode a reference
/// counts once toward every unit of its journal(s).
pub fn price_index(
    corpus: &LinkedCorpus,
    windows: &[u32],
    group_by: Option<Tier>,
    boundary: WindowBoundary,
) -> Vec<PriceIndexReport> {
    match group_by {
        None => vec![price_fractions(
            corpus.records.iter().map(|lr| citation_age(&lr.record)),
            windows,
            boundary,
        )],
        Some(tier) => {
            let mut ages: BTreeMap<&str, Vec<i32>> = BTreeMap::new();
            for lr in &corpus.records {
                let age = citation_age(&lr.record);
                for g in corpus.record_groups(lr, tier) {
                    ages.entry(g).or_default().push(age);
                }
            }
            ages.into_iter()
                .map(|(g, a)| PriceIndexReport {
                    group: Some(g.to_string()),
                    ..price_fractions(a, windows, boundary)
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingBin {
    /// Years since the citing entry's first citation year.
    pub offset: u32,
    pub citations: u64,
    /// Citations at this offset divided by the number of citing entries.
    pub mean_per_entry: f64,
    pub share: f64,
}

/// Mean citations per entry and share of all references by years elapsed
/// since each entry's first citation year.
pub fn citation_aging_profile<'a, I>(records: I) -> Result<Vec<AgingBin>, MetricsError>
where
    I: IntoIterator<Item = &'a ReferenceRecord>,
{
    let mut by_entry: HashMap<&str, Vec<i32>> = HashMap::new();
    for r in records {
        by_entry
            .entry(r.citing_entry_id.as_str())
            .or_default()
            .push(r.citation_date.year());
    }
    if by_entry.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut total = 0u64;
    for years in by_entry.values() {
        let first = *years.iter().min().expect("entries have at least one record");
        for &y in years {
            *counts.entry((y - first) as u32).or_default() += 1;
            total += 1;
        }
    }
    let entries = by_entry.len() as f64;
    let max_offset = counts.keys().next_back().copied().unwrap_or(0);
    Ok((0..=max_offset)
        .map(|offset| {
            let c = counts.get(&offset).copied().unwrap_or(0);
            AgingBin {
                offset,
                citations: c,
                mean_per_entry: c as f64 / entries,
                share: c as f64 / total as f64,
            }
        })
        .collect())
}

/// Corpus-wide descriptive figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub references: usize,
    pub entries: usize,
    pub works: usize,
    pub journals: usize,
    pub references_per_entry: DescriptiveStats,
    pub citations_per_work: DescriptiveStats,
    pub citations_per_journal: DescriptiveStats,
    pub articles_per_journal: DescriptiveStats,
    pub publication_year: DescriptiveStats,
    pub citation_year: DescriptiveStats,
    pub publication_year_box: BoxSummary,
    /// Share of works cited exactly once.
    pub single_citation_work_share: f64,
    /// Share of references made by the top 1% of entries.
    pub top_entry_share: f64,
    /// Share of references pointing to at least one open-access journal.
    pub open_access_share: f64,
}

pub fn corpus_summary(corpus: &LinkedCorpus) -> Result<CorpusSummary, MetricsError> {
    if corpus.records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut per_entry: HashMap<&str, f64> = HashMap::new();
    let mut per_work: HashMap<&str, f64> = HashMap::new();
    let mut works_per_journal: Vec<std::collections::HashSet<&str>> =
        vec![Default::default(); corpus.journals.len()];
    let mut oa = 0usize;
    for lr in &corpus.records {
        *per_entry.entry(lr.record.citing_entry_id.as_str()).or_default() += 1.0;
        *per_work.entry(lr.record.cited_work_id.as_str()).or_default() += 1.0;
        for &j in &lr.journals {
            works_per_journal[j as usize].insert(&lr.record.cited_work_id);
        }
        if lr.journals.iter().any(|&j| corpus.journals[j as usize].record.open_access) {
            oa += 1;
        }
    }
    // HashMap iteration order varies between runs; sort before summing so the
    // floating-point results are reproducible.
    let sorted_values = |m: &HashMap<&str, f64>| {
        let mut v: Vec<f64> = m.values().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let entry_counts = sorted_values(&per_entry);
    let work_counts = sorted_values(&per_work);
    let journal_cites: Vec<f64> = corpus.journal_citations().into_iter().map(|c| c as f64).collect();
    let journal_articles: Vec<f64> = works_per_journal.iter().map(|s| s.len() as f64).collect();
    let pub_years: Vec<f64> = corpus
        .records
        .iter()
        .map(|lr| lr.record.publication_date.year() as f64)
        .collect();
    let cite_years: Vec<f64> = corpus
        .records
        .iter()
        .map(|lr| lr.record.citation_date.year() as f64)
        .collect();
    let n = corpus.records.len() as f64;
    Ok(CorpusSummary {
        references: corpus.records.len(),
        entries: per_entry.len(),
        works: per_work.len(),
        journals: corpus.journals.len(),
        references_per_entry: describe(&entry_counts)?,
        citations_per_work: describe(&work_counts)?,
        citations_per_journal: describe(&journal_cites)?,
        articles_per_journal: describe(&journal_articles)?,
        publication_year: describe(&pub_years)?,
        citation_year: describe(&cite_years)?,
        publication_year_box: box_summary(&pub_years)?,
        single_citation_work_share: work_counts.iter().filter(|&&c| c == 1.0).count() as f64
            / work_counts.len() as f64,
        top_entry_share: concentration_share(&entry_counts, 0.01)?,
        open_access_share: oa as f64 / n,
    })
}
