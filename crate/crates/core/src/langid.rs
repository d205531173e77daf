//! Caption language labels and the built-in stopword detector.

use alloc::vec::Vec;

use crate::text::{fold, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageLabel {
    En,
    Es,
    Ca,
    Other,
}

impl LanguageLabel {
    /// The three corpus languages, in output order.
    pub const KEPT: [LanguageLabel; 3] = [LanguageLabel::En, LanguageLabel::Es, LanguageLabel::Ca];

    pub fn code(self) -> &'static str {
        match self {
            LanguageLabel::En => "en",
            LanguageLabel::Es => "es",
            LanguageLabel::Ca => "ca",
            LanguageLabel::Other => "other",
        }
    }

    /// Parses an ISO 639-1 code; anything unrecognised is `Other`.
    pub fn from_code(code: &str) -> LanguageLabel {
        match code.trim().to_ascii_lowercase().as_str() {
            "en" => LanguageLabel::En,
            "es" => LanguageLabel::Es,
            "ca" => LanguageLabel::Ca,
            _ => LanguageLabel::Other,
        }
    }

    pub fn is_kept(self) -> bool {
        self != LanguageLabel::Other
    }
}

impl core::fmt::Display for LanguageLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

/// Anything that can label a caption. Implementations must be deterministic.
pub trait LanguageDetector {
    fn detect(&self, caption: &str) -> LanguageLabel;
}

impl<F: Fn(&str) -> LanguageLabel> LanguageDetector for F {
    fn detect(&self, caption: &str) -> LanguageLabel {
        self(caption)
    }
}

/// Labels a caption, short-circuiting to `Other` when nothing survives
/// tokenization.
pub fn detect_language(caption: &str, detector: &dyn LanguageDetector) -> LanguageLabel {
    if tokenize(caption).is_empty() {
        return LanguageLabel::Other;
    }
    detector.detect(caption)
}

// Folded forms, sorted. Words shared by several lists split their weight.
const EN_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "after",
    "all",
    "amazing",
    "an",
    "and",
    "are",
    "as",
    "at",
    "be",
    "beautiful",
    "because",
    "been",
    "best",
    "but",
    "by",
    "can",
    "day",
    "for",
    "from",
    "get",
    "good",
    "had",
    "has",
    "have",
    "he",
    "her",
    "here",
    "his",
    "how",
    "i",
    "in",
    "is",
    "it",
    "its",
    "just",
    "last",
    "like",
    "love",
    "me",
    "more",
    "my",
    "night",
    "not",
    "of",
    "on",
    "one",
    "or",
    "our",
    "out",
    "she",
    "so",
    "some",
    "that",
    "the",
    "their",
    "there",
    "they",
    "this",
    "time",
    "to",
    "today",
    "too",
    "up",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "who",
    "will",
    "with",
    "you",
    "your",
];

const ES_STOPWORDS: &[&str] = &[
    "al", "algo", "aqui", "bien", "buen", "buena", "como", "con", "cuando", "de", "del", "desde", "dia", "donde", "el",
    "ella", "en", "era", "es", "esta", "estas", "este", "esto", "estos", "fue", "gracias", "hasta", "hay", "hoy", "la",
    "las", "lo", "los", "mas", "me", "mi", "mis", "muy", "no", "noche", "nos", "nuestra", "nuestro", "para", "pero",
    "por", "porque", "que", "se", "ser", "siempre", "sin", "sobre", "son", "su", "sus", "tambien", "te", "todo",
    "todos", "tu", "un", "una", "vida", "y", "ya", "yo",
];

const CA_STOPWORDS: &[&str] = &[
    "a", "aixo", "al", "als", "amb", "aquest", "aquesta", "aqui", "avui", "bon", "bona", "com", "de", "del", "dels",
    "des", "dia", "el", "els", "em", "en", "ens", "es", "esta", "fins", "gracies", "ha", "hi", "i", "ja", "la", "les",
    "li", "mes", "meu", "meva", "molt", "molta", "nit", "no", "nostra", "nostre", "on", "pel", "pels", "per", "pero",
    "perque", "quan", "que", "se", "sempre", "sense", "seu", "seva", "sobre", "son", "tambe", "tot", "tota", "tots",
    "un", "una", "va", "vida",
];

/// Deterministic stopword plus character-pattern scorer over en/es/ca.
///
/// Each token scores `1/k` for every one of the `k` languages whose stoplist
/// contains it. Orthographic markers add one point: `ñ` and `á` for Spanish,
/// `à è ò ç ï` and `l·l` for Catalan. The best language wins when it has at
/// least [`StopwordDetector::min_score`] and strictly beats the runner-up.
#[derive(Debug, Clone)]
pub struct StopwordDetector {
    pub min_score: f64,
}

impl Default for StopwordDetector {
    fn default() -> Self {
        StopwordDetector { min_score: 1.0 }
    }
}

impl StopwordDetector {
    pub fn scores(&self, caption: &str) -> [f64; 3] {
        let lists = [EN_STOPWORDS, ES_STOPWORDS, CA_STOPWORDS];
        let mut scores = [0.0f64; 3];
        for token in tokenize(caption) {
            let folded = fold(&token);
            let hits: Vec<usize> = (0..3).filter(|&l| lists[l].binary_search(&folded.as_str()).is_ok()).collect();
            for &l in &hits {
                scores[l] += 1.0 / hits.len() as f64;
            }
            if token.contains(['ñ', 'á']) {
                scores[1] += 1.0;
            }
            if token.contains(['à', 'è', 'ò', 'ç', 'ï']) || token.contains("l·l") {
                scores[2] += 1.0;
            }
        }
        scores
    }
}

impl LanguageDetector for StopwordDetector {
    fn detect(&self, caption: &str) -> LanguageLabel {
        let scores = self.scores(caption);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let (best, second) = (scores[order[0]], scores[order[1]]);
        if best < self.min_score || best <= second {
            return LanguageLabel::Other;
        }
        LanguageLabel::KEPT[order[0]]
    }
}
