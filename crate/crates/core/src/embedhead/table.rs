use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Fixed-width vectors keyed by id, kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable<T> {
    dim: usize,
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<T>,
}

/// Precomputed image features standing in for a frozen CNN backbone.
pub type ImageFeatureStore = VectorTable<f32>;

/// Caption targets (neighborhood contexts or mean word vectors).
pub type TargetSet = VectorTable<f64>;

impl<T: Copy> VectorTable<T> {
    pub fn new(dim: usize) -> Self {
        VectorTable { dim, ids: Vec::new(), index: BTreeMap::new(), data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: &[T]) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: vector.len() });
        }
        if self.index.contains_key(&id) {
            return Err(Error::InvalidArgument(format!("id `{id}` inserted twice")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[T]> {
        self.index.get(id).map(|&i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        (0..self.len()).map(move |i| (self.ids[i].as_str(), self.row(i)))
    }
}

/// Rows gathered for one split: widened features and targets side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_dim: usize,
    pub target_dim: usize,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    /// Joins targets (by caption id) with features. `feature_ids` maps a
    /// caption id to its image feature id; without it the ids must match.
    /// Every missing feature or target is reported at once.
    pub fn assemble(
        ids: &[String],
        store: &ImageFeatureStore,
        targets: &TargetSet,
        feature_ids: Option<&BTreeMap<String, String>>,
    ) -> Result<Dataset> {
        let mut missing_targets = Vec::new();
        let mut missing_features = Vec::new();
        let mut features = Vec::with_capacity(ids.len() * store.dim());
        let mut gathered = Vec::with_capacity(ids.len() * targets.dim());
        for id in ids {
            let fid = feature_ids.and_then(|m| m.get(id)).map(String::as_str).unwrap_or(id);
            match (targets.get(id), store.get(fid)) {
                (Some(t), Some(f)) => {
                    gathered.extend_from_slice(t);
                    features.extend(f.iter().map(|&x| f64::from(x)));
                }
                (t, f) => {
                    if t.is_none() {
                        missing_targets.push(id.clone());
                    }
                    if f.is_none() {
                        missing_features.push(id.clone());
                    }
                }
            }
        }
        if !missing_features.is_empty() {
            return Err(Error::MissingIds { what: "image features", ids: missing_features });
        }
        if !missing_targets.is_empty() {
            return Err(Error::MissingIds { what: "targets", ids: missing_targets });
        }
        if features.iter().any(|x| !x.is_finite()) || gathered.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature or target".into()));
        }
        Ok(Dataset {
            ids: ids.to_vec(),
            feature_dim: store.dim(),
            target_dim: targets.dim(),
            features,
            targets: gathered,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.target_dim..(i + 1) * self.target_dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_keeps_order_and_rejects_bad_rows() {
        let mut t = ImageFeatureStore::new(2);
        t.insert("b", &[1.0, 2.0]).unwrap();
        t.insert("a", &[3.0, 4.0]).unwrap();
        assert_eq!(t.ids(), ["b", "a"]);
        assert_eq!(t.get("a"), Some(&[3.0f32, 4.0][..]));
        assert!(t.insert("a", &[0.0, 0.0]).is_err());
        assert!(t.insert("c", &[0.0]).is_err());
    }

    #[test]
    fn assemble_lists_every_missing_id() {
        let mut store = ImageFeatureStore::new(1);
        store.insert("img1", &[1.0]).unwrap();
        let mut targets = TargetSet::new(1);
        targets.insert("p1", &[1.0]).unwrap();
        targets.insert("p2", &[1.0]).unwrap();
        let mut map = BTreeMap::new();
        map.insert("p1".into(), "img1".into());
        map.insert("p2".into(), "img2".into());
        let ids = vec!["p1".into(), "p2".into(), "p3".into()];
        let err = Dataset::assemble(&ids, &store, &targets, Some(&map)).unwrap_err();
        assert_eq!(err, Error::MissingIds { what: "image features", ids: vec!["p2".into(), "p3".into()] });
        let ok = Dataset::assemble(&ids[..1], &store, &targets, Some(&map)).unwrap();
        assert_eq!(ok.feature(0), [1.0]);
        assert!(Dataset::assemble(&ids[..1], &store, &targets, None).is_err());
    }
}
