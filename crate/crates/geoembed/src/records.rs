//! Line-delimited JSON records, term lists and the bundled Barcelona data.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use geoembed_core::corpus::{CleanPost, LanguageLabel, RawPost};
use geoembed_core::gazetteer::{Gazetteer, Place, PlaceKind};
use geoembed_core::text::TermSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BARCELONA_GAZETTEER: &str = include_str!("../../../data/barcelona_gazetteer.jsonl");
pub const OTHER_CITIES: &str = include_str!("../../../data/other_cities.txt");
pub const STOPLIST_EN: &str = include_str!("../../../data/stoplists/en.txt");
pub const STOPLIST_ES: &str = include_str!("../../../data/stoplists/es.txt");
pub const STOPLIST_CA: &str = include_str!("../../../data/stoplists/ca.txt");

pub fn bundled_stoplist(lang: LanguageLabel) -> Option<&'static str> {
    match lang {
        LanguageLabel::En => Some(STOPLIST_EN),
        LanguageLabel::Es => Some(STOPLIST_ES),
        LanguageLabel::Ca => Some(STOPLIST_CA),
        LanguageLabel::Other => None,
    }
}

pub fn barcelona() -> Gazetteer {
    parse_gazetteer(BARCELONA_GAZETTEER).expect("bundled gazetteer is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub user_id: String,
    pub caption: String,
    pub image_feature_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl From<PostRecord> for RawPost {
    fn from(r: PostRecord) -> Self {
        RawPost {
            post_id: r.post_id,
            user_id: r.user_id,
            caption: r.caption,
            image_feature_id: r.image_feature_id,
            image_hash: r.image_hash,
            lang: r.lang,
        }
    }
}

impl From<&RawPost> for PostRecord {
    fn from(p: &RawPost) -> Self {
        PostRecord {
            post_id: p.post_id.clone(),
            user_id: p.user_id.clone(),
            caption: p.caption.clone(),
            image_feature_id: p.image_feature_id.clone(),
            image_hash: p.image_hash.clone(),
            lang: p.lang.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CleanRecord {
    #[serde(flatten)]
    post: PostRecord,
    language: String,
    tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines: usize,
    pub posts: usize,
    /// 1-based line numbers that failed to parse.
    pub malformed: Vec<usize>,
}

/// Parses posts one per line. Blank lines are ignored; malformed lines are
/// logged, recorded and skipped.
pub fn parse_posts(reader: impl BufRead) -> std::io::Result<(Vec<RawPost>, IngestReport)> {
    let mut posts = Vec::new();
    let mut report = IngestReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        report.lines += 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PostRecord>(&line) {
            Ok(r) => posts.push(RawPost::from(r)),
            Err(e) => {
                log::warn!("line {}: skipping malformed post: {e}", i + 1);
                report.malformed.push(i + 1);
            }
        }
    }
    report.posts = posts.len();
    Ok((posts, report))
}

pub fn read_posts(path: impl AsRef<Path>) -> Result<(Vec<RawPost>, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_posts(BufReader::new(file)).map_err(|e| Error::io(path, e))
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| Error::format(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_posts(path: impl AsRef<Path>, posts: &[RawPost]) -> Result<()> {
    write_lines(path.as_ref(), posts.iter().map(PostRecord::from))
}

pub fn write_clean_corpus(path: impl AsRef<Path>, corpus: &[CleanPost]) -> Result<()> {
    write_lines(
        path.as_ref(),
        corpus.iter().map(|p| CleanRecord {
            post: PostRecord::from(&p.post),
            language: p.language.code().into(),
            tokens: p.tokens.clone(),
        }),
    )
}

/// Reads a cleaned corpus. Unlike raw ingestion, any bad line is an error.
pub fn read_clean_corpus(path: impl AsRef<Path>) -> Result<Vec<CleanPost>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let r: CleanRecord =
            serde_json::from_str(line).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        let language = LanguageLabel::from_code(&r.language);
        if !language.is_kept() {
            return Err(Error::format(path, format!("line {}: language `{}` not in en/es/ca", i + 1, r.language)));
        }
        out.push(CleanPost { post: r.post.into(), language, tokens: r.tokens });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceRecord {
    canonical: String,
    display: String,
    kind: String,
    #[serde(default)]
    parent: Option<String>,
    #[serde(default)]
    aliases: Vec<String>,
}

pub fn parse_gazetteer(text: &str) -> Result<Gazetteer> {
    let mut places = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let r: PlaceRecord =
            serde_json::from_str(line).map_err(|e| Error::Format(format!("gazetteer line {}: {e}", i + 1)))?;
        let kind = PlaceKind::parse(&r.kind)
            .ok_or_else(|| Error::Format(format!("gazetteer line {}: unknown kind `{}`", i + 1, r.kind)))?;
        places.push(Place { canonical: r.canonical, display: r.display, kind, parent: r.parent, aliases: r.aliases });
    }
    Ok(Gazetteer::new(places)?)
}

pub fn read_gazetteer(path: impl AsRef<Path>) -> Result<Gazetteer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gazetteer(&text).map_err(|e| Error::format(path, e))
}

/// One term per line; `#` starts a comment line.
pub fn parse_term_list(text: &str) -> TermSet {
    TermSet::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
}

pub fn read_term_list(path: impl AsRef<Path>) -> Result<TermSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_term_list(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_lines_are_skipped() {
        let input = concat!(
            r#"{"post_id":"1","user_id":"u","caption":"a b c","image_feature_id":"i1"}"#,
            "\n{not json}\n\n",
            r#"{"post_id":"2","user_id":"u","caption":"x","image_feature_id":"i2","image_hash":"h","lang":"ca","extra":1}"#,
            "\n"
        );
        let (posts, report) = parse_posts(input.as_bytes()).unwrap();
        assert_eq!(posts.len(), 2);
        assert_eq!(report.malformed, [2]);
        assert_eq!(posts[1].image_hash.as_deref(), Some("h"));
        assert_eq!(posts[1].lang.as_deref(), Some("ca"));
    }

    #[test]
    fn bundled_gazetteer_has_82_places() {
        let g = barcelona();
        assert_eq!(g.len(), 82);
        assert_eq!(g.districts().count(), 10);
        let per_district: usize = g.districts().map(|d| g.neighborhoods_of(d).count()).sum();
        assert_eq!(per_district, 72);
        for p in g.places().iter().filter(|p| p.kind == PlaceKind::Neighborhood) {
            let parent = g.position(p.parent.as_deref().unwrap()).unwrap();
            assert_eq!(g.place(parent).kind, PlaceKind::District);
        }
    }

    #[test]
    fn term_lists_skip_comments() {
        let t = parse_term_list("# c\nmadrid\n\n new york \n");
        assert_eq!(t.len(), 2);
        assert!(t.contains("Madrid"));
        assert!(!t.contains("#"));
        assert!(parse_term_list(STOPLIST_EN).contains("the"));
        assert!(parse_term_list(STOPLIST_ES).contains("bcn"));
    }
}
