//! The trainable projection from image features into a target space and the
//! hinge ranking loss it is trained with.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::linalg::{dot, norm};
use crate::{fnv1a64, Error, Result};

/// Which space a head embeds into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    /// Neighborhood space, one axis per place.
    NeighCtx,
    /// Word-embedding space.
    Word,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::NeighCtx => "neighctx",
            TargetKind::Word => "word",
        }
    }

    pub fn parse(s: &str) -> Option<TargetKind> {
        match s {
            "neighctx" => Some(TargetKind::NeighCtx),
            "word" | "w2v" => Some(TargetKind::Word),
            _ => None,
        }
    }
}

/// Affine map `z = xᵀW + b`, optionally followed by L2 normalization.
///
/// `weights` is `input_dim × output_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingHead {
    pub kind: TargetKind,
    pub input_dim: usize,
    pub output_dim: usize,
    pub normalize: bool,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Digest of the axes the output is bound to (0 when unbound).
    pub axes_digest: u64,
}

impl EmbeddingHead {
    pub fn zeros(kind: TargetKind, input_dim: usize, output_dim: usize, normalize: bool) -> Self {
        EmbeddingHead {
            kind,
            input_dim,
            output_dim,
            normalize,
            weights: vec![0.0; input_dim * output_dim],
            bias: vec![0.0; output_dim],
            axes_digest: 0,
        }
    }

    /// Weights drawn from `N(0, std²)`, zero bias.
    pub fn random<R: Rng + ?Sized>(
        kind: TargetKind,
        input_dim: usize,
        output_dim: usize,
        normalize: bool,
        std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let gauss = Normal::new(0.0, std)
            .map_err(|_| Error::InvalidArgument("init std must be finite and non-negative".into()))?;
        let mut head = Self::zeros(kind, input_dim, output_dim, normalize);
        head.weights.iter_mut().for_each(|w| *w = gauss.sample(rng));
        Ok(head)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.input_dim * self.output_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim * self.output_dim,
                actual: self.weights.len(),
            });
        }
        if self.bias.len() != self.output_dim {
            return Err(Error::DimensionMismatch { expected: self.output_dim, actual: self.bias.len() });
        }
        if self.weights.iter().chain(&self.bias).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite head parameter".into()));
        }
        Ok(())
    }

    /// The affine part alone.
    pub fn pre_activation(&self, feature: &[f64]) -> Result<Vec<f64>> {
        if feature.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: feature.len() });
        }
        let mut z = self.bias.clone();
        for (f, &x) in feature.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = &self.weights[f * self.output_dim..(f + 1) * self.output_dim];
            for (zk, w) in z.iter_mut().zip(row) {
                *zk += x * w;
            }
        }
        Ok(z)
    }

    /// Embeds a feature vector. With normalization on, a zero
    /// pre-activation maps to the zero vector.
    pub fn forward(&self, feature: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.pre_activation(feature)?;
        if self.normalize {
            let n = norm(&z);
            if n > 0.0 {
                z.iter_mut().for_each(|v| *v /= n);
            }
        }
        Ok(z)
    }

    /// FNV-1a over kind, shape, flag and the parameters as `f32` bits, i.e.
    /// over what a checkpoint stores.
    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::with_capacity(4 * (self.weights.len() + self.bias.len()) + 24);
        bytes.push(self.kind as u8);
        bytes.extend_from_slice(&(self.input_dim as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.output_dim as u32).to_le_bytes());
        bytes.push(self.normalize as u8);
        for &p in self.weights.iter().chain(&self.bias) {
            bytes.extend_from_slice(&(p as f32).to_le_bytes());
        }
        bytes.extend_from_slice(&self.axes_digest.to_le_bytes());
        fnv1a64(&bytes)
    }
}

/// `½·max(0, m − ⟨φ, pos⟩ + ⟨φ, neg⟩)`.
pub fn ranking_loss(phi: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> f64 {
    0.5 * (margin - dot(phi, positive) + dot(phi, negative)).max(0.0)
}

/// Parameter gradients of one triple.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradients {
    pub loss: f64,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Adds one triple's loss gradient into `grad_w`/`grad_b` and returns the
/// loss. Zero contribution when the hinge is inactive.
pub(crate) fn accumulate_triple(
    head: &EmbeddingHead,
    feature: &[f64],
    positive: &[f64],
    negative: &[f64],
    margin: f64,
    grad_w: &mut [f64],
    grad_b: &mut [f64],
) -> Result<f64> {
    for t in [positive, negative] {
        if t.len() != head.output_dim {
            return Err(Error::DimensionMismatch { expected: head.output_dim, actual: t.len() });
        }
    }
    let z = head.pre_activation(feature)?;
    let n = norm(&z);
    let phi: Vec<f64> = if head.normalize && n > 0.0 { z.iter().map(|v| v / n).collect() } else { z };
    let slack = margin - dot(&phi, positive) + dot(&phi, negative);
    if slack <= 0.0 {
        return Ok(0.0);
    }
    // dL/dφ
    let mut g: Vec<f64> = negative.iter().zip(positive).map(|(n, p)| 0.5 * (n - p)).collect();
    if head.normalize && n > 0.0 {
        // dφ/dz = (I − φφᵀ)/‖z‖
        let proj = dot(&phi, &g);
        g.iter_mut().zip(&phi).for_each(|(gk, pk)| *gk = (*gk - pk * proj) / n);
    }
    for (f, &x) in feature.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let row = &mut grad_w[f * head.output_dim..(f + 1) * head.output_dim];
        for (gw, gk) in row.iter_mut().zip(&g) {
            *gw += x * gk;
        }
    }
    grad_b.iter_mut().zip(&g).for_each(|(b, gk)| *b += gk);
    Ok(0.5 * slack)
}

/// Subgradient of the ranking loss for one triple, plus `weight_decay · W`
/// on the weights.
pub fn loss_gradients(
    head: &EmbeddingHead,
    feature: &[f64],
    positive: &[f64],
    negative: &[f64],
    margin: f64,
    weight_decay: f64,
) -> Result<HeadGradients> {
    let mut weights = vec![0.0; head.weights.len()];
    let mut bias = vec![0.0; head.output_dim];
    let loss = accumulate_triple(head, feature, positive, negative, margin, &mut weights, &mut bias)?;
    weights.iter_mut().zip(&head.weights).for_each(|(g, w)| *g += weight_decay * w);
    Ok(HeadGradients { loss, weights, bias })
}
