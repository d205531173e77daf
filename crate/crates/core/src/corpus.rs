//! Raw posts, the user blacklist, and the cleaning rules that produce the
//! per-language corpora.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

pub use crate::langid::LanguageLabel;
use crate::langid::{detect_language, LanguageDetector};
use crate::text::{tokenize, TermSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPost {
    pub post_id: String,
    pub user_id: String,
    pub caption: String,
    pub image_feature_id: String,
    pub image_hash: Option<String>,
    /// Language declared by the source, only used when the cleaner is told
    /// to trust it.
    pub lang: Option<String>,
}

impl RawPost {
    /// Identity used by the duplicate-image rule.
    pub fn image_key(&self) -> &str {
        self.image_hash.as_deref().unwrap_or(&self.image_feature_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanPost {
    pub post: RawPost,
    pub language: LanguageLabel,
    pub tokens: Vec<String>,
}

impl CleanPost {
    /// Back to a raw record carrying its label, e.g. to clean again.
    pub fn to_raw(&self) -> RawPost {
        let mut raw = self.post.clone();
        raw.lang = Some(self.language.code().into());
        raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CleaningRule {
    Blacklist,
    ShortCaption,
    Duplicate,
    OtherCity,
    OtherLanguage,
}

impl CleaningRule {
    pub const ALL: [CleaningRule; 5] = [
        CleaningRule::Blacklist,
        CleaningRule::ShortCaption,
        CleaningRule::Duplicate,
        CleaningRule::OtherCity,
        CleaningRule::OtherLanguage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CleaningRule::Blacklist => "blacklist",
            CleaningRule::ShortCaption => "short-caption",
            CleaningRule::Duplicate => "duplicate",
            CleaningRule::OtherCity => "other-city",
            CleaningRule::OtherLanguage => "other-language",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleaningReport {
    pub ingested: usize,
    pub discarded: BTreeMap<CleaningRule, usize>,
    pub kept: BTreeMap<LanguageLabel, usize>,
}

impl CleaningReport {
    pub fn discarded_by(&self, rule: CleaningRule) -> usize {
        self.discarded.get(&rule).copied().unwrap_or(0)
    }

    pub fn kept_in(&self, lang: LanguageLabel) -> usize {
        self.kept.get(&lang).copied().unwrap_or(0)
    }

    pub fn total_discarded(&self) -> usize {
        self.discarded.values().sum()
    }

    pub fn total_kept(&self) -> usize {
        self.kept.values().sum()
    }
}

#[derive(Debug, Clone)]
pub struct CleaningOptions {
    pub min_caption_words: usize,
    pub other_cities: TermSet,
    /// Use a post's declared `lang` instead of running the detector.
    pub trust_declared_language: bool,
}

impl Default for CleaningOptions {
    fn default() -> Self {
        CleaningOptions { min_caption_words: 3, other_cities: TermSet::default(), trust_declared_language: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CleanOutput {
    pub corpora: BTreeMap<LanguageLabel, Vec<CleanPost>>,
    pub report: CleaningReport,
    /// Every discarded post id with the first rule that rejected it.
    pub discarded: Vec<(String, CleaningRule)>,
}

impl CleanOutput {
    pub fn corpus(&self, lang: LanguageLabel) -> &[CleanPost] {
        self.corpora.get(&lang).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Users with strictly more than `threshold` posts.
pub fn build_user_blacklist(posts: &[RawPost], threshold: usize) -> Result<BTreeSet<String>> {
    if threshold == 0 {
        return Err(Error::InvalidArgument("blacklist threshold must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in posts {
        *counts.entry(p.user_id.as_str()).or_default() += 1;
    }
    Ok(counts.into_iter().filter(|&(_, n)| n > threshold).map(|(u, _)| u.into()).collect())
}

/// Applies the cleaning rules in order: blacklist, short caption, duplicate
/// image (first occurrence wins), other-city mention, language.
///
/// Each discarded post is charged to the first rule it fails.
pub fn clean_corpus(
    posts: &[RawPost],
    blacklist: &BTreeSet<String>,
    options: &CleaningOptions,
    detector: &dyn LanguageDetector,
) -> Result<CleanOutput> {
    if options.min_caption_words == 0 {
        return Err(Error::InvalidArgument("min_caption_words must be at least 1".into()));
    }
    let mut out = CleanOutput::default();
    out.report.ingested = posts.len();
    let mut seen_images: BTreeSet<&str> = BTreeSet::new();

    for post in posts {
        let verdict = judge(post, blacklist, options, detector, &mut seen_images);
        match verdict {
            Ok((language, tokens)) => {
                *out.report.kept.entry(language).or_default() += 1;
                out.corpora.entry(language).or_default().push(CleanPost { post: post.clone(), language, tokens });
            }
            Err(rule) => {
                *out.report.discarded.entry(rule).or_default() += 1;
                out.discarded.push((post.post_id.clone(), rule));
            }
        }
    }
    Ok(out)
}

fn judge<'a>(
    post: &'a RawPost,
    blacklist: &BTreeSet<String>,
    options: &CleaningOptions,
    detector: &dyn LanguageDetector,
    seen_images: &mut BTreeSet<&'a str>,
) -> core::result::Result<(LanguageLabel, Vec<String>), CleaningRule> {
    if blacklist.contains(&post.user_id) {
        return Err(CleaningRule::Blacklist);
    }
    let tokens = tokenize(&post.caption);
    if tokens.len() < options.min_caption_words {
        return Err(CleaningRule::ShortCaption);
    }
    if !seen_images.insert(post.image_key()) {
        return Err(CleaningRule::Duplicate);
    }
    if options.other_cities.matches_any(&tokens) {
        return Err(CleaningRule::OtherCity);
    }
    let language = match (&post.lang, options.trust_declared_language) {
        (Some(code), true) => LanguageLabel::from_code(code),
        _ => detect_language(&post.caption, detector),
    };
    if !language.is_kept() {
        return Err(CleaningRule::OtherLanguage);
    }
    Ok((language, tokens))
}
