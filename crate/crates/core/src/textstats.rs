//! Frequent-word rates and place mention shares per language corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{CleanPost, LanguageLabel};
use crate::gazetteer::{Gazetteer, PlaceKind};
use crate::text::TermSet;
use crate::{Error, Result};

pub const PER_TEN_THOUSAND: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub token: String,
    pub count: u64,
    /// `unit * count / total_tokens`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub language: LanguageLabel,
    pub rows: Vec<FrequencyRow>,
    /// All tokens in the corpus, stoplisted ones included.
    pub total_tokens: u64,
    pub unit: f64,
}

/// Top `top_k` non-stoplisted tokens, count descending then lexicographic.
pub fn word_frequencies(corpus: &[CleanPost], stoplist: &TermSet, top_k: usize) -> Result<FrequencyTable> {
    word_frequencies_per(corpus, stoplist, top_k, PER_TEN_THOUSAND)
}

pub fn word_frequencies_per(
    corpus: &[CleanPost],
    stoplist: &TermSet,
    top_k: usize,
    unit: f64,
) -> Result<FrequencyTable> {
    let first = corpus.first().ok_or(Error::Empty("corpus"))?;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total = 0u64;
    for post in corpus {
        total += post.tokens.len() as u64;
        for t in &post.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut rows: Vec<(&str, u64)> = counts.into_iter().filter(|(t, _)| !stoplist.contains(t)).collect();
    // BTreeMap order is lexicographic; a stable sort keeps it for ties.
    rows.sort_by_key(|r| core::cmp::Reverse(r.1));
    rows.truncate(top_k);
    let rows = rows
        .into_iter()
        .map(|(token, count)| FrequencyRow {
            token: token.into(),
            count,
            rate: if total == 0 { 0.0 } else { unit * count as f64 / total as f64 },
        })
        .collect();
    Ok(FrequencyTable { language: first.language, rows, total_tokens: total, unit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MentionCounting {
    /// Every alias occurrence counts.
    Occurrences,
    /// A place counts at most once per post.
    PerPost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShareLevel {
    District,
    /// Neighborhoods of one district, by canonical token.
    Neighborhood {
        district: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub place: String,
    pub display: String,
    pub count: u64,
    /// Percentage of `total`; 0 when the total is empty.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentionShares {
    pub language: Option<LanguageLabel>,
    pub level: ShareLevel,
    pub rows: Vec<ShareRow>,
    pub total: u64,
    pub empty_total: bool,
    /// Neighborhood level only: mentions of the district name itself, which
    /// count for the district but for none of its neighborhoods.
    pub district_direct: u64,
}

impl MentionShares {
    /// Mentions this table accounts for at district level.
    pub fn district_total(&self) -> u64 {
        self.total + self.district_direct
    }
}

/// Mentions per gazetteer place over a corpus.
pub fn place_mention_counts(corpus: &[CleanPost], g: &Gazetteer, counting: MentionCounting) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; g.len()];
    for post in corpus {
        for m in g.match_mentions(&post.tokens) {
            counts[m.place] += match counting {
                MentionCounting::Occurrences => m.count as u64,
                MentionCounting::PerPost => 1,
            };
        }
    }
    counts
}

fn shares(
    g: &Gazetteer,
    language: Option<LanguageLabel>,
    level: ShareLevel,
    entries: Vec<(usize, u64)>,
    district_direct: u64,
) -> MentionShares {
    let total: u64 = entries.iter().map(|e| e.1).sum();
    let rows = entries
        .into_iter()
        .map(|(i, count)| ShareRow {
            place: g.place(i).canonical.clone(),
            display: g.place(i).display.clone(),
            count,
            share: if total == 0 { 0.0 } else { 100.0 * count as f64 / total as f64 },
        })
        .collect();
    MentionShares { language, level, rows, total, empty_total: total == 0, district_direct }
}

/// District shares; neighborhood mentions roll up into their district.
pub fn district_mention_shares(
    corpus: &[CleanPost],
    g: &Gazetteer,
    counting: MentionCounting,
) -> Result<MentionShares> {
    let first = corpus.first().ok_or(Error::Empty("corpus"))?;
    let counts = place_mention_counts(corpus, g, counting);
    Ok(district_shares_from_counts(g, &counts, Some(first.language)))
}

pub fn district_shares_from_counts(g: &Gazetteer, counts: &[u64], language: Option<LanguageLabel>) -> MentionShares {
    let mut per_district: BTreeMap<usize, u64> = g.districts().map(|d| (d, 0)).collect();
    for (i, &c) in counts.iter().enumerate() {
        *per_district.entry(g.district_of(i)).or_default() += c;
    }
    shares(g, language, ShareLevel::District, per_district.into_iter().collect(), 0)
}

/// Shares among the neighborhoods of `district` (a canonical token).
pub fn neighborhood_mention_shares(
    corpus: &[CleanPost],
    g: &Gazetteer,
    district: &str,
    counting: MentionCounting,
) -> Result<MentionShares> {
    let first = corpus.first().ok_or(Error::Empty("corpus"))?;
    let counts = place_mention_counts(corpus, g, counting);
    neighborhood_shares_from_counts(g, &counts, district, Some(first.language))
}

pub fn neighborhood_shares_from_counts(
    g: &Gazetteer,
    counts: &[u64],
    district: &str,
    language: Option<LanguageLabel>,
) -> Result<MentionShares> {
    let d = g
        .position(district)
        .filter(|&d| g.place(d).kind == PlaceKind::District)
        .ok_or_else(|| Error::UnknownPlace(district.into()))?;
    let entries = g.neighborhoods_of(d).map(|n| (n, counts[n])).collect();
    Ok(shares(g, language, ShareLevel::Neighborhood { district: district.into() }, entries, counts[d]))
}
