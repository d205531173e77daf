use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Token inventory with dense indices, ordered by count descending then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from stored parts, keeping the given order.
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Vocabulary> {
        if tokens.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: tokens.len(), actual: counts.len() });
        }
        if tokens.is_empty() {
            return Err(Error::Empty("vocabulary"));
        }
        let mut index = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("token `{t}` repeated in vocabulary")));
            }
        }
        if let Some((t, c)) = tokens.iter().zip(&counts).find(|(_, &c)| c < min_count) {
            return Err(Error::InvalidArgument(format!("token `{t}` has count {c} < min_count {min_count}")));
        }
        Ok(Vocabulary { tokens, counts, index, min_count })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts tokens and keeps those seen at least `min_count` times.
pub fn build_vocab<S: AsRef<[String]>>(corpus: &[S], min_count: u64) -> Result<Vocabulary> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for sentence in corpus {
        for t in sentence.as_ref() {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::Empty("vocabulary"));
    }
    kept.sort_by_key(|k| core::cmp::Reverse(k.1));
    let (tokens, counts) = kept.into_iter().map(|(t, c)| (String::from(t), c)).unzip();
    Vocabulary::from_parts(tokens, counts, min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn corpus(sentences: &[&str]) -> Vec<Vec<String>> {
        sentences.iter().map(|s| s.split(' ').map(ToString::to_string).collect()).collect()
    }

    #[test]
    fn threshold_and_order() {
        let c = corpus(&["a a a b", "a a c c"]);
        let v = build_vocab(&c, 2).unwrap();
        assert_eq!(v.tokens(), ["a", "c"]);
        assert_eq!(v.counts(), [5, 2]);
        let all = build_vocab(&c, 1).unwrap();
        assert_eq!(all.tokens(), ["a", "c", "b"]);
        assert_eq!(all.index_of("b"), Some(2));
        assert!(matches!(build_vocab(&c, 6), Err(Error::Empty(_))));
    }

    #[test]
    fn ties_are_lexicographic() {
        let c = corpus(&["zz yy xx", "xx yy zz"]);
        assert_eq!(build_vocab(&c, 1).unwrap().tokens(), ["xx", "yy", "zz"]);
    }

    #[test]
    fn from_parts_validates() {
        assert!(Vocabulary::from_parts(vec!["a".into(), "a".into()], vec![1, 1], 1).is_err());
        assert!(Vocabulary::from_parts(vec!["a".into()], vec![1, 2], 1).is_err());
        assert!(Vocabulary::from_parts(vec!["a".into()], vec![1], 2).is_err());
    }
}
