//! Exhaustive image retrieval over an embedded held-out split.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::embedhead::{EmbeddingHead, ImageFeatureStore, TargetKind};
use crate::gazetteer::Axes;
use crate::linalg::{dot, normalize_in_place, widen};
use crate::word2vec::WordEmbeddings;
use crate::{Error, Result};

/// Which space the index rows live in.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSpace {
    /// One axis per place, in the order of the carried labels.
    NeighCtx(Axes),
    Word {
        dim: usize,
    },
}

impl IndexSpace {
    pub fn dim(&self) -> usize {
        match self {
            IndexSpace::NeighCtx(axes) => axes.len(),
            IndexSpace::Word { dim } => *dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    pub space: IndexSpace,
    pub ids: Vec<String>,
    /// Row-major unit vectors, one per id.
    pub rows: Vec<f64>,
    pub head_digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub post_id: String,
    pub score: f64,
}

impl EmbeddingIndex {
    /// Checks shape and the unit-norm invariant of a deserialized index.
    pub fn new(space: IndexSpace, ids: Vec<String>, rows: Vec<f64>, head_digest: u64) -> Result<Self> {
        let dim = space.dim();
        if rows.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch { expected: ids.len() * dim, actual: rows.len() });
        }
        let index = EmbeddingIndex { space, ids, rows, head_digest };
        for i in 0..index.len() {
            let n = crate::linalg::norm(index.row(i));
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(alloc::format!("row {i} is not unit length")));
            }
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.rows[i * d..(i + 1) * d]
    }

    /// Scores every row against `query` and keeps the best `k`, ties broken
    /// by ascending post id.
    pub fn search(&self, query: &[f64], k: usize) -> Result<Vec<Hit>> {
        if self.is_empty() {
            return Err(Error::Empty("retrieval index"));
        }
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: query.len() });
        }
        let mut scored: Vec<(usize, f64)> =
            (0..self.len()).map(|i| (i, dot(self.row(i), query).clamp(-1.0, 1.0))).collect();
        scored.sort_by(|a, b| match b.1.total_cmp(&a.1) {
            Ordering::Equal => self.ids[a.0].cmp(&self.ids[b.0]),
            o => o,
        });
        scored.truncate(k);
        Ok(scored.into_iter().map(|(i, score)| Hit { post_id: self.ids[i].clone(), score }).collect())
    }
}

/// Embeds `ids` with `head` and stores the normalized rows. For a
/// neighborhood head, `axes` must be the labels it was trained against.
pub fn build_index(
    head: &EmbeddingHead,
    axes: Option<&Axes>,
    store: &ImageFeatureStore,
    ids: &[String],
    feature_ids: Option<&BTreeMap<String, String>>,
) -> Result<EmbeddingIndex> {
    head.validate()?;
    if store.dim() != head.input_dim {
        return Err(Error::DimensionMismatch { expected: head.input_dim, actual: store.dim() });
    }
    let space = match (head.kind, axes) {
        (TargetKind::NeighCtx, Some(axes)) => {
            if axes.len() != head.output_dim {
                return Err(Error::DimensionMismatch { expected: head.output_dim, actual: axes.len() });
            }
            if axes.digest() != head.axes_digest {
                return Err(Error::SpaceMismatch("head was trained against a different axis order"));
            }
            IndexSpace::NeighCtx(axes.clone())
        }
        (TargetKind::NeighCtx, None) => {
            return Err(Error::InvalidArgument("a neighborhood head needs its axes".into()))
        }
        (TargetKind::Word, _) => IndexSpace::Word { dim: head.output_dim },
    };

    let missing: Vec<String> = ids
        .iter()
        .filter(|id| {
            let fid = feature_ids.and_then(|m| m.get(*id)).map(String::as_str).unwrap_or(id);
            store.get(fid).is_none()
        })
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIds { what: "image features", ids: missing });
    }

    let mut rows = Vec::with_capacity(ids.len() * head.output_dim);
    for id in ids {
        let fid = feature_ids.and_then(|m| m.get(id)).map(String::as_str).unwrap_or(id);
        let mut row = head.pre_activation(&widen(store.get(fid).unwrap_or_default()))?;
        normalize_in_place(&mut row)?;
        rows.extend_from_slice(&row);
    }
    Ok(EmbeddingIndex { space, ids: ids.to_vec(), rows, head_digest: head.digest() })
}

/// Images closest to a one-hot vector on `place`'s axis.
pub fn query_neighborhood(index: &EmbeddingIndex, place: &str, k: usize) -> Result<Vec<Hit>> {
    let IndexSpace::NeighCtx(axes) = &index.space else {
        return Err(Error::SpaceMismatch("place queries need a neighborhood-space index"));
    };
    let j = axes.position(place).ok_or_else(|| Error::UnknownPlace(place.into()))?;
    let mut query = alloc::vec![0.0; axes.len()];
    query[j] = 1.0;
    index.search(&query, k)
}

/// Images closest to the unit embedding of `word`.
pub fn query_word(index: &EmbeddingIndex, word: &str, emb: &WordEmbeddings, k: usize) -> Result<Vec<Hit>> {
    if !matches!(index.space, IndexSpace::Word { .. }) {
        return Err(Error::SpaceMismatch("word queries need a word-space index"));
    }
    let query = emb.unit_vector(word).ok_or_else(|| Error::OutOfVocabulary(word.into()))?;
    index.search(query, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn axes() -> Axes {
        Axes::new(vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn identity_head() -> EmbeddingHead {
        let mut h = EmbeddingHead::zeros(TargetKind::NeighCtx, 3, 3, true);
        h.weights = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        h.axes_digest = axes().digest();
        h
    }

    fn store(rows: &[(&str, [f32; 3])]) -> ImageFeatureStore {
        let mut s = ImageFeatureStore::new(3);
        for (id, r) in rows {
            s.insert(*id, r).unwrap();
        }
        s
    }

    #[test]
    fn exact_axis_row_ranks_first() {
        let s = store(&[("x", [0.5, 0.5, 0.0]), ("y", [0.0, 2.0, 0.0]), ("z", [1.0, 0.0, 1.0])]);
        let ids: Vec<String> = s.ids().to_vec();
        let idx = build_index(&identity_head(), Some(&axes()), &s, &ids, None).unwrap();
        let hits = query_neighborhood(&idx, "b", 10).unwrap();
        assert_eq!(hits.len(), 3);
        assert_eq!(hits[0], Hit { post_id: "y".into(), score: 1.0 });
        assert_eq!(hits[2].post_id, "z");
        assert!(query_neighborhood(&idx, "nowhere", 1).is_err());
        assert_eq!(query_neighborhood(&idx, "b", 0).unwrap(), vec![]);
    }

    #[test]
    fn ties_break_by_post_id() {
        let s = store(&[("p2", [1.0, 0.0, 0.0]), ("p10", [1.0, 0.0, 0.0]), ("p1", [1.0, 0.0, 0.0])]);
        let ids: Vec<String> = s.ids().to_vec();
        let idx = build_index(&identity_head(), Some(&axes()), &s, &ids, None).unwrap();
        let order: Vec<_> = query_neighborhood(&idx, "a", 3).unwrap().into_iter().map(|h| h.post_id).collect();
        assert_eq!(order, ["p1", "p10", "p2"]);
    }

    #[test]
    fn errors() {
        let s = store(&[("x", [0.0, 0.0, 0.0])]);
        let h = identity_head();
        assert!(build_index(&h, Some(&axes()), &s, &["x".into()], None).is_err());
        let missing = build_index(&h, Some(&axes()), &s, &["q".into(), "r".into()], None).unwrap_err();
        assert_eq!(missing, Error::MissingIds { what: "image features", ids: vec!["q".into(), "r".into()] });
        let other = Axes::new(vec!["c".into(), "b".into(), "a".into()]).unwrap();
        assert!(matches!(build_index(&h, Some(&other), &s, &[], None), Err(Error::SpaceMismatch(_))));
        let empty = build_index(&h, Some(&axes()), &s, &[], None).unwrap();
        assert!(empty.is_empty());
        assert!(query_neighborhood(&empty, "a", 1).is_err());
    }

    #[test]
    fn new_checks_rows() {
        let ids = vec![String::from("a")];
        assert!(EmbeddingIndex::new(IndexSpace::Word { dim: 2 }, ids.clone(), vec![0.6, 0.8], 0).is_ok());
        assert!(EmbeddingIndex::new(IndexSpace::Word { dim: 2 }, ids.clone(), vec![1.0, 1.0], 0).is_err());
        assert!(EmbeddingIndex::new(IndexSpace::Word { dim: 2 }, ids, vec![1.0], 0).is_err());
    }

    #[test]
    fn scores_stay_in_range() {
        let s = store(&[("a", [1.0, 2.0, 3.0]), ("b", [-1.0, 0.5, 0.0])]);
        let ids: Vec<String> = vec!["a".into(), "b".into()];
        let idx = build_index(&identity_head(), Some(&axes()), &s, &ids, None).unwrap();
        for h in idx.search(&[-1.0, 0.0, 0.0], 5).unwrap() {
            assert!((-1.0..=1.0).contains(&h.score));
        }
    }
}
