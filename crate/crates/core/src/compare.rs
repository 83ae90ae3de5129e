//! Cross-source comparisons of journal citation counts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::metrics::quantile_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub min_wiki_citations: u64,
    pub min_scopus_citations: u64,
    pub min_wiki_articles: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_wiki_citations: 3,
            min_scopus_citations: 3,
            min_wiki_articles: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SourceCounts {
    pub citations: u64,
    pub articles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalComparison {
    pub journal_id: String,
    pub wiki_citations: u64,
    pub scopus_citations: u64,
    pub wiki_articles_cited: u64,
    pub wiki_percentile: f64,
    pub scopus_percentile: f64,
    pub ratio: f64,
}

/// Mean-rank fractional percentiles: rank among all values (1 = smallest),
/// ties share the mean of their ranks, divided by the count.
pub fn fractional_percentiles(values: &[u64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| values[i]);
    let mut out = vec![0.0; n];
    let mut start = 0;
    for run in order.chunk_by(|&a, &b| values[a] == values[b]) {
        // Ranks start+1 ..= start+len.
        let mean_rank = start as f64 + (run.len() as f64 + 1.0) / 2.0;
        for &i in run {
            out[i] = mean_rank / n as f64;
        }
        start += run.len();
    }
    out
}

/// Percentile ratio per journal present in both sources and passing the
/// thresholds, sorted by ratio descending (journal id ascending on ties).
pub fn percentile_ratio(
    wiki: &BTreeMap<String, SourceCounts>,
    scopus: &BTreeMap<String, SourceCounts>,
    thresholds: Thresholds,
) -> Vec<JournalComparison> {
    let eligible: Vec<(&String, SourceCounts, SourceCounts)> = wiki
        .iter()
        .filter_map(|(id, w)| scopus.get(id).map(|s| (id, *w, *s)))
        .filter(|(_, w, s)| {
            w.citations >= thresholds.min_wiki_citations
                && s.citations >= thresholds.min_scopus_citations
                && w.articles >= thresholds.min_wiki_articles
        })
        .collect();
    let wp = fractional_percentiles(&eligible.iter().map(|e| e.1.citations).collect::<Vec<_>>());
    let sp = fractional_percentiles(&eligible.iter().map(|e| e.2.citations).collect::<Vec<_>>());
    let mut out: Vec<JournalComparison> = eligible
        .iter()
        .zip(wp.iter().zip(&sp))
        .map(|((id, w, s), (&wp, &sp))| JournalComparison {
            journal_id: (*id).clone(),
            wiki_citations: w.citations,
            scopus_citations: s.citations,
            wiki_articles_cited: w.articles,
            wiki_percentile: wp,
            scopus_percentile: sp,
            ratio: wp / sp,
        })
        .collect();
    out.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then_with(|| a.journal_id.cmp(&b.journal_id)));
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("source {0} has no articles")]
    EmptySource(&'static str),
    #[error("x is constant")]
    ConstantPredictor,
    #[error("need at least {needed} paired values, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("x and y differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldShareDiff {
    pub main_field: String,
    pub share_a: f64,
    pub share_b: f64,
    /// `share_a - share_b` in percentage points.
    pub diff: f64,
}

/// Share of each field within each source and their difference in
/// percentage points, over the union of fields (missing counts as 0).
pub fn field_share_diff(
    a: &BTreeMap<String, u64>,
    b: &BTreeMap<String, u64>,
) -> Result<Vec<FieldShareDiff>, CompareError> {
    let total_a: u64 = a.values().sum();
    let total_b: u64 = b.values().sum();
    if total_a == 0 {
        return Err(CompareError::EmptySource("a"));
    }
    if total_b == 0 {
        return Err(CompareError::EmptySource("b"));
    }
    let fields: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    Ok(fields
        .into_iter()
        .map(|f| {
            let share_a = a.get(f).copied().unwrap_or(0) as f64 / total_a as f64;
            let share_b = b.get(f).copied().unwrap_or(0) as f64 / total_b as f64;
            FieldShareDiff {
                main_field: f.clone(),
                share_a,
                share_b,
                diff: 100.0 * (share_a - share_b),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, CompareError> {
    if x.len() != y.len() {
        return Err(CompareError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(CompareError::TooFewPoints { needed: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CompareError::ConstantPredictor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - rss / syy).clamp(0.0, 1.0) };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqPoint {
    pub p: f64,
    pub qx: f64,
    pub qy: f64,
}

/// Matched quantiles at probabilities `(i - 0.5) / n_quantiles`.
pub fn qq_points(x: &[f64], y: &[f64], n_quantiles: usize) -> Vec<QqPoint> {
    if x.is_empty() || y.is_empty() || n_quantiles == 0 {
        return Vec::new();
    }
    let mut sx = x.to_vec();
    let mut sy = y.to_vec();
    sx.sort_by(f64::total_cmp);
    sy.sort_by(f64::total_cmp);
    (1..=n_quantiles)
        .map(|i| {
            let p = (i as f64 - 0.5) / n_quantiles as f64;
            QqPoint {
                p,
                qx: quantile_sorted(&sx, p),
                qy: quantile_sorted(&sy, p),
            }
        })
        .collect()
}
