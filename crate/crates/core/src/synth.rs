//! Seeded synthetic corpora shaped like real citation data: heavy-tailed
//! journal popularity and entry sizes, plus duplicates, missing dates and
//! unresolvable ISSNs to exercise the pre-processing funnel.

use std::io::Write;

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassificationScheme, Issn, JournalRecord, RawReference};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub entries: usize,
    /// Raw rows, duplicates and defective rows included.
    pub references: usize,
    pub journals: usize,
    pub works_per_journal: usize,
    /// Zipf exponent of journal popularity.
    pub journal_exponent: f64,
    /// Zipf exponent of work popularity inside a journal.
    pub work_exponent: f64,
    /// Log-normal sigma of entry sizes.
    pub entry_sigma: f64,
    pub duplicate_rate: f64,
    pub missing_date_rate: f64,
    pub unresolved_rate: f64,
    pub seed: u64,
}

impl SynthParams {
    /// The corpus shipped under `data/synthetic`.
    pub fn bundled() -> Self {
        Self {
            entries: 1000,
            references: 5000,
            journals: 300,
            works_per_journal: 40,
            journal_exponent: 1.1,
            work_exponent: 1.0,
            entry_sigma: 0.8,
            duplicate_rate: 0.03,
            missing_date_rate: 0.02,
            unresolved_rate: 0.02,
            seed: 20_160_101,
        }
    }

    /// 10^6 references over 10^4 journals.
    pub fn scale() -> Self {
        Self {
            entries: 100_000,
            references: 1_000_000,
            journals: 10_000,
            works_per_journal: 200,
            ..Self::bundled()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SyntheticCorpus {
    pub references: Vec<RawReference>,
    pub journals: Vec<JournalRecord>,
}

fn random_date(rng: &mut impl Rng, year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, rng.random_range(1..=12), rng.random_range(1..=28)).expect("valid day")
}

/// Codes drawn for one journal: usually one, sometimes two or three.
fn journal_codes(rng: &mut impl Rng, codes: &[u16]) -> Vec<u16> {
    let k = match rng.random::<f64>() {
        u if u < 0.7 => 1,
        u if u < 0.95 => 2,
        _ => 3,
    };
    let mut out: Vec<u16> = (0..k).map(|_| codes[rng.random_range(0..codes.len())]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn generate(params: &SynthParams, scheme: &ClassificationScheme) -> SyntheticCorpus {
    assert!(params.entries > 0 && params.journals > 0 && params.works_per_journal > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let codes: Vec<u16> = scheme.fields().map(|f| f.code).collect();
    assert!(!codes.is_empty(), "scheme has no fields");

    let popularity: Vec<f64> = (0..params.journals)
        .map(|j| (j as f64 + 1.0).powf(-params.journal_exponent))
        .collect();
    let total_pop: f64 = popularity.iter().sum();
    let noise = LogNormal::new(0.0, 0.6).expect("valid sigma");
    let journals: Vec<JournalRecord> = (0..params.journals)
        .map(|j| {
            let mut issns = vec![Issn::from_serial(1000 + 2 * j as u32)];
            if rng.random::<f64>() < 0.3 {
                issns.push(Issn::from_serial(1001 + 2 * j as u32));
            }
            let share = popularity[j] / total_pop;
            let articles = (share * 20.0 * params.references as f64 * noise.sample(&mut rng)).round() as u64 + 1;
            let rate = noise.sample(&mut rng) * 3.0;
            JournalRecord {
                journal_id: format!("J{j:05}"),
                title: format!("Journal {j}"),
                issns,
                asjc_codes: journal_codes(&mut rng, &codes),
                open_access: rng.random::<f64>() < 0.2,
                window_citations: (articles as f64 * rate).round() as u64,
                window_articles: articles,
            }
        })
        .collect();

    let journal_pick = WeightedIndex::new(&popularity).expect("positive weights");
    let work_pick = Zipf::new(params.works_per_journal as f64, params.work_exponent).expect("valid Zipf");
    let size = LogNormal::new(0.0, params.entry_sigma).expect("valid sigma");
    let entry_weights: Vec<f64> = (0..params.entries).map(|_| size.sample(&mut rng)).collect();
    let entry_pick = WeightedIndex::new(&entry_weights).expect("positive weights");

    let mut references: Vec<RawReference> = Vec::with_capacity(params.references);
    for i in 0..params.references {
        if !references.is_empty() && rng.random::<f64>() < params.duplicate_rate {
            let mut dup = references[rng.random_range(0..references.len())].clone();
            let year = rng.random_range(2008..=2020);
            dup.citation_date = random_date(&mut rng, year).to_string();
            references.push(dup);
            continue;
        }
        // Every entry cites at least once when there are enough rows.
        let entry = if i < params.entries {
            i
        } else {
            entry_pick.sample(&mut rng)
        };
        let j = journal_pick.sample(&mut rng);
        let k = work_pick.sample(&mut rng) as usize;
        let cite_year = rng.random_range(2008..=2020);
        let age: i32 = if rng.random::<f64>() < 0.01 {
            -1
        } else {
            // Geometric ages with mean about 7 years.
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / (1.0f64 - 0.13).ln()).floor() as i32
        };
        let issns = if rng.random::<f64>() < params.unresolved_rate {
            vec![Issn::from_serial(9_000_000 + rng.random_range(0..900_000)).hyphenated()]
        } else {
            journals[j].issns.iter().map(Issn::hyphenated).collect()
        };
        let publication_date = if rng.random::<f64>() < params.missing_date_rate {
            None
        } else {
            Some(random_date(&mut rng, cite_year - age).to_string())
        };
        references.push(RawReference {
            citing_entry_id: format!("E{entry:06}"),
            cited_work_id: format!("W{j:05}-{k:04}"),
            citation_date: random_date(&mut rng, cite_year).to_string(),
            publication_date,
            issns,
        });
    }
    SyntheticCorpus { references, journals }
}

impl SyntheticCorpus {
    pub fn write_references_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["citing_entry_id", "cited_work_id", "citation_date", "publication_date", "issns"])?;
        for r in &self.references {
            w.write_record([
                r.citing_entry_id.as_str(),
                r.cited_work_id.as_str(),
                r.citation_date.as_str(),
                r.publication_date.as_deref().unwrap_or(""),
                &r.issns.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_journals_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "journal_id",
            "title",
            "issns",
            "asjc_codes",
            "open_access",
            "window_citations",
            "window_articles",
        ])?;
        for j in &self.journals {
            let issns: Vec<String> = j.issns.iter().map(Issn::hyphenated).collect();
            let codes: Vec<String> = j.asjc_codes.iter().map(u16::to_string).collect();
            w.write_record([
                j.journal_id.as_str(),
                j.title.as_str(),
                &issns.join(";"),
                &codes.join(";"),
                if j.open_access { "1" } else { "0" },
                &j.window_citations.to_string(),
                &j.window_articles.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
