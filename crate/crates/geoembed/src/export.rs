//! CSV and JSON tables for external plotting.

use std::fs;
use std::path::Path;

use geoembed_core::embedhead::CurvePoint;
use geoembed_core::retrieval::Hit;
use geoembed_core::textstats::{FrequencyTable, MentionShares, ShareLevel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn create_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns: language, rank, token, count, rate.
pub fn write_frequency_csv(path: impl AsRef<Path>, tables: &[FrequencyTable]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::format(path, e);
    w.write_record(["language", "rank", "token", "count", "rate"]).map_err(err)?;
    for t in tables {
        for (i, row) in t.rows.iter().enumerate() {
            w.write_record([
                t.language.code(),
                &(i + 1).to_string(),
                &row.token,
                &row.count.to_string(),
                &row.rate.to_string(),
            ])
            .map_err(err)?;
        }
    }
    finish(path, w)
}

/// Columns: language, district, place, display, count, share. `district`
/// is empty for district-level rows.
pub fn write_shares_csv(path: impl AsRef<Path>, tables: &[MentionShares]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::format(path, e);
    w.write_record(["language", "district", "place", "display", "count", "share"]).map_err(err)?;
    for t in tables {
        let lang = t.language.map(|l| l.code()).unwrap_or("all");
        let district = match &t.level {
            ShareLevel::District => "",
            ShareLevel::Neighborhood { district } => district,
        };
        for row in &t.rows {
            w.write_record([lang, district, &row.place, &row.display, &row.count.to_string(), &row.share.to_string()])
                .map_err(err)?;
        }
    }
    finish(path, w)
}

/// Columns: iteration, train_loss, validation_accuracy.
pub fn write_curve_csv(path: impl AsRef<Path>, curve: &[CurvePoint]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| Error::format(path, e);
    w.write_record(["iteration", "train_loss", "validation_accuracy"]).map_err(err)?;
    for p in curve {
        w.write_record([p.iteration.to_string(), p.train_loss.to_string(), p.validation_accuracy.to_string()])
            .map_err(err)?;
    }
    finish(path, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankedHit {
    pub post_id: String,
    pub score: f64,
    pub rank: usize,
}

pub fn ranked(hits: Vec<Hit>) -> Vec<RankedHit> {
    hits.into_iter().enumerate().map(|(i, h)| RankedHit { post_id: h.post_id, score: h.score, rank: i + 1 }).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let curve = [CurvePoint { iteration: 10, train_loss: 0.5, validation_accuracy: 0.75 }];
        write_curve_csv(&path, &curve).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "iteration,train_loss,validation_accuracy\n10,0.5,0.75\n");
    }

    #[test]
    fn hits_get_one_based_ranks() {
        let hits = vec![Hit { post_id: "a".into(), score: 0.9 }, Hit { post_id: "b".into(), score: 0.1 }];
        let r = ranked(hits);
        assert_eq!((r[0].rank, r[1].rank), (1, 2));
        let text = serde_json::to_string(&r[0]).unwrap();
        assert_eq!(text, r#"{"post_id":"a","score":0.9,"rank":1}"#);
    }
}
