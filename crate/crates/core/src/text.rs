//! Caption tokenization and accent folding.
//!
//! Tokens keep their accents so they can be shown as written; every
//! comparison against a term list (gazetteer aliases, stoplists, other-city
//! names) goes through [`fold`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Catalan "punt volat", kept inside words like `col·lecció`.
const MIDDLE_DOT: char = '\u{00B7}';

fn is_url(chunk: &str) -> bool {
    chunk.contains("://") || chunk.starts_with("www.")
}

/// Splits a caption into lowercase tokens.
///
/// Whitespace chunks that look like URLs or start with `@` are dropped.
/// Hashtag markers disappear because `#` is not alphanumeric, so `#raval`
/// and `raval` produce the same token.
pub fn tokenize(caption: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in caption.split_whitespace() {
        if chunk.starts_with('@') || is_url(chunk) {
            continue;
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let joins = c == MIDDLE_DOT && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphabetic());
            if c.is_alphanumeric() || joins {
                current.extend(c.to_lowercase());
            } else if !current.is_empty() {
                tokens.push(core::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Accent-folded, lowercase form used for matching.
pub fn fold(token: &str) -> String {
    token.nfd().filter(|&c| !is_combining_mark(c) && c != MIDDLE_DOT).flat_map(char::to_lowercase).collect()
}

/// Tokenizes then folds; used for term lists such as aliases and stoplists.
pub fn folded_tokens(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| fold(t)).collect()
}

/// A set of folded terms. Multi-word entries match as contiguous token runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSet {
    single: BTreeSet<String>,
    phrases: BTreeSet<Vec<String>>,
}

impl TermSet {
    pub fn new<I, S>(terms: I) -> TermSet
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = TermSet::default();
        for term in terms {
            set.insert(term.as_ref());
        }
        set
    }

    /// Adds a term; blank terms are ignored.
    pub fn insert(&mut self, term: &str) {
        let mut parts = folded_tokens(term);
        match parts.len() {
            0 => {}
            1 => {
                self.single.insert(parts.pop().unwrap_or_default());
            }
            _ => {
                self.phrases.insert(parts);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.single.len() + self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether a single token (any case or accents) is a one-word term.
    pub fn contains(&self, token: &str) -> bool {
        self.single.contains(&fold(token))
    }

    /// Whether any term occurs as whole tokens in `tokens`.
    pub fn matches_any(&self, tokens: &[String]) -> bool {
        let folded: Vec<String> = tokens.iter().map(|t| fold(t)).collect();
        if folded.iter().any(|t| self.single.contains(t)) {
            return true;
        }
        self.phrases.iter().any(|p| folded.windows(p.len()).any(|w| w == p.as_slice()))
    }
}
