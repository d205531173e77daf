//! Neighborhood Context vectors and caption mean-embeddings.
//!
//! A word's context is its cosine to every place-name vector; a caption's
//! context is the sum of its words' contexts, L2-normalized. Both serve as
//! ranking targets for the image heads, alongside the normalized mean word
//! vector of a caption.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::gazetteer::{Axes, Gazetteer};
use crate::linalg::{normalize_in_place, widen};
use crate::word2vec::WordEmbeddings;
use crate::{Error, Result};

/// Place-name vectors in axis order.
#[derive(Debug, Clone)]
pub struct NeighborhoodBasis {
    axes: Axes,
    dim: usize,
    /// Unit-normalized rows, `axes.len() × dim`.
    rows: Vec<f64>,
}

impl NeighborhoodBasis {
    /// Builds a basis from explicit vectors; rows must be non-zero.
    pub fn from_vectors(axes: Axes, dim: usize, vectors: &[f64]) -> Result<Self> {
        if vectors.len() != axes.len() * dim {
            return Err(Error::DimensionMismatch { expected: axes.len() * dim, actual: vectors.len() });
        }
        if axes.is_empty() {
            return Err(Error::Empty("basis"));
        }
        let mut rows = vectors.to_vec();
        for row in rows.chunks_exact_mut(dim) {
            normalize_in_place(row)?;
        }
        Ok(NeighborhoodBasis { axes, dim, rows })
    }

    pub fn axes(&self) -> &Axes {
        &self.axes
    }

    /// Number of axes (J).
    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit_row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.dim..(j + 1) * self.dim]
    }
}

/// Basis over every gazetteer place. Fails listing all places whose
/// canonical token has no vector.
pub fn build_basis(emb: &WordEmbeddings, g: &Gazetteer) -> Result<NeighborhoodBasis> {
    let missing: Vec<String> =
        g.places().iter().filter(|p| emb.vector(&p.canonical).is_none()).map(|p| p.canonical.clone()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingPlaces(missing));
    }
    basis_for(emb, g.axes())
}

/// Basis over the places that have vectors, plus the pruned place tokens.
pub fn build_basis_pruned(emb: &WordEmbeddings, g: &Gazetteer) -> Result<(NeighborhoodBasis, Vec<String>)> {
    let (present, missing): (Vec<String>, Vec<String>) =
        g.places().iter().map(|p| p.canonical.clone()).partition(|c| emb.vector(c).is_some());
    if present.is_empty() {
        return Err(Error::MissingPlaces(missing));
    }
    Ok((basis_for(emb, Axes::new(present)?)?, missing))
}

fn basis_for(emb: &WordEmbeddings, axes: Axes) -> Result<NeighborhoodBasis> {
    let mut vectors = Vec::with_capacity(axes.len() * emb.dim());
    for label in axes.labels() {
        let v = emb.vector(label).ok_or_else(|| Error::MissingPlaces(vec![label.clone()]))?;
        vectors.extend(widen(v));
    }
    NeighborhoodBasis::from_vectors(axes, emb.dim(), &vectors)
}

/// Cosine of `w` to each basis row. Not normalized across axes.
pub fn word_nc(w: &[f64], basis: &NeighborhoodBasis) -> Result<Vec<f64>> {
    if w.len() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, actual: w.len() });
    }
    let n = crate::linalg::norm(w);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((0..basis.len()).map(|j| crate::linalg::dot(w, basis.unit_row(j)) / n).collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TargetOptions {
    /// Count each distinct token once instead of once per occurrence.
    pub unique_words: bool,
}

/// A caption-level target vector with unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptionTarget {
    pub caption_id: String,
    pub vector: Vec<f64>,
    /// Tokens skipped because they have no embedding.
    pub oov_tokens: usize,
}

fn known_tokens<'a>(tokens: &'a [String], emb: &WordEmbeddings, options: TargetOptions) -> (Vec<&'a str>, usize) {
    let mut seen = BTreeSet::new();
    let mut known = Vec::new();
    let mut oov = 0;
    for t in tokens {
        if options.unique_words && !seen.insert(t.as_str()) {
            continue;
        }
        if emb.vector(t).is_some() {
            known.push(t.as_str());
        } else {
            oov += 1;
        }
    }
    (known, oov)
}

/// Normalized sum of the word contexts of the in-vocabulary tokens.
pub fn caption_nc(
    caption_id: &str,
    tokens: &[String],
    emb: &WordEmbeddings,
    basis: &NeighborhoodBasis,
    options: TargetOptions,
) -> Result<CaptionTarget> {
    if emb.dim() != basis.dim {
        return Err(Error::DimensionMismatch { expected: basis.dim, actual: emb.dim() });
    }
    let (known, oov_tokens) = known_tokens(tokens, emb, options);
    if known.is_empty() {
        return Err(Error::NoKnownTokens);
    }
    let mut sum = vec![0.0; basis.len()];
    for t in known {
        // Unit rows make the word-level cosine a plain dot product.
        let w = emb.unit_vector(t).unwrap_or_default();
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroVector);
        }
        for (j, s) in sum.iter_mut().enumerate() {
            *s += crate::linalg::dot(w, basis.unit_row(j));
        }
    }
    normalize_in_place(&mut sum)?;
    Ok(CaptionTarget { caption_id: caption_id.into(), vector: sum, oov_tokens })
}

/// Normalized mean of the in-vocabulary word vectors.
pub fn caption_w2v(
    caption_id: &str,
    tokens: &[String],
    emb: &WordEmbeddings,
    options: TargetOptions,
) -> Result<CaptionTarget> {
    let (known, oov_tokens) = known_tokens(tokens, emb, options);
    if known.is_empty() {
        return Err(Error::NoKnownTokens);
    }
    let mut mean = vec![0.0; emb.dim()];
    let inv = 1.0 / known.len() as f64;
    for t in &known {
        let v = emb.vector(t).unwrap_or_default();
        for (m, &x) in mean.iter_mut().zip(v) {
            *m += f64::from(x) * inv;
        }
    }
    normalize_in_place(&mut mean)?;
    Ok(CaptionTarget { caption_id: caption_id.into(), vector: mean, oov_tokens })
}
