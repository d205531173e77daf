//! In-batch negative selection.

use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::cosine;

/// How a negative caption target is chosen for an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativePolicy {
    /// Uniform over the most distant half of the other batch targets.
    FarHalf(DistanceReference),
    /// Uniform over all other batch targets.
    Uniform,
}

/// What "distant" is measured from in [`NegativePolicy::FarHalf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceReference {
    /// The anchor's own caption target.
    PositiveTarget,
    /// The anchor image's current embedding.
    ImageEmbedding,
}

/// `1 − cosine`; a zero vector counts as distance 1.
fn distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine(a, b).unwrap_or(0.0)
}

/// Indices of the `⌈(B−1)/2⌉` batch targets farthest from `reference`,
/// ordered by distance descending then batch index ascending.
pub fn far_half<T: AsRef<[f64]>>(targets: &[T], anchor: usize, reference: &[f64]) -> Vec<usize> {
    let mut others: Vec<(usize, f64)> =
        (0..targets.len()).filter(|&j| j != anchor).map(|j| (j, distance(reference, targets[j].as_ref()))).collect();
    others.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    others.truncate(others.len().div_ceil(2));
    others.into_iter().map(|(j, _)| j).collect()
}

/// Negative for Img2NeighCtx-style training: uniform over the far half of
/// the batch, measured from the anchor's positive target. Needs `B ≥ 2`.
pub fn sample_negative_neighctx<T: AsRef<[f64]>, R: Rng + ?Sized>(targets: &[T], anchor: usize, rng: &mut R) -> usize {
    sample_far_half(targets, anchor, targets[anchor].as_ref(), rng)
}

pub fn sample_far_half<T: AsRef<[f64]>, R: Rng + ?Sized>(
    targets: &[T],
    anchor: usize,
    reference: &[f64],
    rng: &mut R,
) -> usize {
    assert!(targets.len() >= 2, "negative sampling needs a batch of at least 2");
    let candidates = far_half(targets, anchor, reference);
    candidates[rng.random_range(0..candidates.len())]
}

/// Negative for Img2Word2Vec-style training: uniform over the other
/// `batch_len − 1` entries. Needs `batch_len ≥ 2`.
pub fn sample_negative_w2v<R: Rng + ?Sized>(batch_len: usize, anchor: usize, rng: &mut R) -> usize {
    assert!(batch_len >= 2, "negative sampling needs a batch of at least 2");
    let r = rng.random_range(0..batch_len - 1);
    if r >= anchor {
        r + 1
    } else {
        r
    }
}
