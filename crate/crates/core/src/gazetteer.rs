//! Districts and neighborhoods with their aliases.
//!
//! Place order is significant: it defines the axes of the neighborhood space
//! and is bound into every trained head through [`Axes::digest`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::text::{fold, folded_tokens};
use crate::{fnv1a64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaceKind {
    District,
    Neighborhood,
}

impl PlaceKind {
    pub fn name(self) -> &'static str {
        match self {
            PlaceKind::District => "district",
            PlaceKind::Neighborhood => "neighborhood",
        }
    }

    pub fn parse(s: &str) -> Option<PlaceKind> {
        match s {
            "district" => Some(PlaceKind::District),
            "neighborhood" | "neighbourhood" => Some(PlaceKind::Neighborhood),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    /// Single token, e.g. `vila_de_gracia`. Also matched as an alias.
    pub canonical: String,
    pub display: String,
    pub kind: PlaceKind,
    pub parent: Option<String>,
    /// Free-text aliases; tokenized and folded for matching.
    pub aliases: Vec<String>,
}

/// Ordered axis labels of a neighborhood space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axes {
    labels: Vec<String>,
}

impl Axes {
    pub fn new(labels: Vec<String>) -> Result<Axes> {
        let mut seen = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if let Some(j) = seen.insert(l.as_str(), i) {
                return Err(Error::Gazetteer(format!("axis `{l}` repeated at {j} and {i}")));
            }
        }
        Ok(Axes { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// FNV-1a over the newline-terminated labels.
    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::new();
        for l in &self.labels {
            bytes.extend_from_slice(l.as_bytes());
            bytes.push(b'\n');
        }
        fnv1a64(&bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MentionCount {
    pub place: usize,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    places: Vec<Place>,
    parents: Vec<Option<usize>>,
    matcher: BTreeMap<Vec<String>, usize>,
    longest_alias: usize,
}

impl Gazetteer {
    /// Validates and indexes places, keeping their order.
    pub fn new(places: Vec<Place>) -> Result<Gazetteer> {
        if places.is_empty() {
            return Err(Error::Gazetteer("no places".into()));
        }
        let mut by_canonical: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in places.iter().enumerate() {
            if p.canonical.is_empty() || p.canonical.chars().any(char::is_whitespace) {
                return Err(Error::Gazetteer(format!(
                    "canonical token `{}` must be a single non-empty token",
                    p.canonical
                )));
            }
            if by_canonical.insert(&p.canonical, i).is_some() {
                return Err(Error::Gazetteer(format!("duplicate canonical token `{}`", p.canonical)));
            }
        }

        let mut parents = Vec::with_capacity(places.len());
        for p in &places {
            let parent = match (p.kind, &p.parent) {
                (PlaceKind::District, None) => None,
                (PlaceKind::District, Some(_)) => {
                    return Err(Error::Gazetteer(format!("district `{}` has a parent", p.canonical)))
                }
                (PlaceKind::Neighborhood, None) => {
                    return Err(Error::Gazetteer(format!("neighborhood `{}` has no parent district", p.canonical)))
                }
                (PlaceKind::Neighborhood, Some(parent)) => {
                    let idx = by_canonical.get(parent.as_str()).copied().ok_or_else(|| {
                        Error::Gazetteer(format!("neighborhood `{}` names unknown parent `{parent}`", p.canonical))
                    })?;
                    if places[idx].kind != PlaceKind::District {
                        return Err(Error::Gazetteer(format!(
                            "parent `{parent}` of `{}` is not a district",
                            p.canonical
                        )));
                    }
                    Some(idx)
                }
            };
            parents.push(parent);
        }

        let mut matcher: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        let mut longest_alias = 1;
        for (i, p) in places.iter().enumerate() {
            let mut keys = Vec::with_capacity(p.aliases.len() + 1);
            keys.push(alloc::vec![fold(&p.canonical)]);
            for alias in &p.aliases {
                let key = folded_tokens(alias);
                if key.is_empty() {
                    return Err(Error::Gazetteer(format!("empty alias on `{}`", p.canonical)));
                }
                keys.push(key);
            }
            for key in keys {
                longest_alias = longest_alias.max(key.len());
                if let Some(&other) = matcher.get(&key) {
                    if other != i {
                        return Err(Error::Gazetteer(format!(
                            "alias `{}` used by both `{}` and `{}`",
                            key.join(" "),
                            places[other].canonical,
                            p.canonical
                        )));
                    }
                }
                matcher.insert(key, i);
            }
        }

        Ok(Gazetteer { places, parents, matcher, longest_alias })
    }

    /// Number of places, i.e. the dimension of the neighborhood space.
    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place(&self, index: usize) -> &Place {
        &self.places[index]
    }

    pub fn position(&self, canonical: &str) -> Option<usize> {
        self.places.iter().position(|p| p.canonical == canonical)
    }

    pub fn parent_of(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    /// District owning a place: itself for districts, the parent otherwise.
    pub fn district_of(&self, index: usize) -> usize {
        self.parents[index].unwrap_or(index)
    }

    pub fn districts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.places[i].kind == PlaceKind::District)
    }

    pub fn neighborhoods_of(&self, district: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.parents[i] == Some(district))
    }

    pub fn axes(&self) -> Axes {
        Axes { labels: self.places.iter().map(|p| p.canonical.clone()).collect() }
    }

    /// Longest alias starting at `start`, as (place, token length).
    fn longest_match(&self, folded: &[String], start: usize) -> Option<(usize, usize)> {
        let max = self.longest_alias.min(folded.len() - start);
        (1..=max).rev().find_map(|len| self.matcher.get(&folded[start..start + len]).map(|&p| (p, len)))
    }

    /// Left-to-right, longest-first alias hits as (start, len, place).
    fn scan(&self, tokens: &[String]) -> Vec<(usize, usize, usize)> {
        let folded: Vec<String> = tokens.iter().map(|t| fold(t)).collect();
        let mut hits = Vec::new();
        let mut i = 0;
        while i < folded.len() {
            match self.longest_match(&folded, i) {
                Some((place, len)) => {
                    hits.push((i, len, place));
                    i += len;
                }
                None => i += 1,
            }
        }
        hits
    }

    /// Replaces alias runs by canonical tokens; other tokens pass through.
    pub fn merge_phrases(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut next = 0;
        for (start, len, place) in self.scan(tokens) {
            out.extend_from_slice(&tokens[next..start]);
            out.push(self.places[place].canonical.clone());
            next = start + len;
        }
        out.extend_from_slice(&tokens[next..]);
        out
    }

    /// Occurrence counts per place, in gazetteer order, zero counts omitted.
    pub fn match_mentions(&self, tokens: &[String]) -> Vec<MentionCount> {
        let mut counts = BTreeMap::new();
        for (_, _, place) in self.scan(tokens) {
            *counts.entry(place).or_insert(0) += 1;
        }
        counts.into_iter().map(|(place, count)| MentionCount { place, count }).collect()
    }
}
