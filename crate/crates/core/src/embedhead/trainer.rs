//! Minibatch SGD with momentum and weight decay for [`EmbeddingHead`].

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::head::{accumulate_triple, EmbeddingHead, TargetKind};
use super::sampling::{sample_far_half, sample_negative_w2v, DistanceReference, NegativePolicy};
use super::table::Dataset;
use crate::linalg::dot;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub kind: TargetKind,
    pub margin: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_iterations: usize,
    pub validation_interval: usize,
    /// Triples sampled per validation pass.
    pub validation_triples: usize,
    pub normalize_output: bool,
    /// Standard deviation of the Gaussian weight initialization.
    pub init_std: f64,
    pub negative_policy: NegativePolicy,
    pub seed: u64,
}

impl TrainerConfig {
    /// Default settings for a target kind: far-half negatives and 100k
    /// iterations for neighborhood contexts, uniform negatives and 150k for
    /// word targets.
    pub fn for_kind(kind: TargetKind) -> Self {
        let (max_iterations, negative_policy) = match kind {
            TargetKind::NeighCtx => (100_000, NegativePolicy::FarHalf(DistanceReference::PositiveTarget)),
            TargetKind::Word => (150_000, NegativePolicy::Uniform),
        };
        TrainerConfig {
            kind,
            margin: 0.4,
            learning_rate: 0.001,
            momentum: 0.9,
            weight_decay: 2e-4,
            batch_size: 120,
            max_iterations,
            validation_interval: 1_000,
            validation_triples: 1_000,
            normalize_output: true,
            init_std: 0.01,
            negative_policy,
            seed: 7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if self.batch_size < 2 {
            return bad("batch size must be at least 2");
        }
        if !(self.learning_rate >= 0.0) || !(0.0..1.0).contains(&self.momentum) || !(self.weight_decay >= 0.0) {
            return bad("learning rate and weight decay must be non-negative, momentum in [0, 1)");
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return bad("init std must be finite and non-negative");
        }
        if self.validation_interval == 0 || self.validation_triples == 0 {
            return bad("validation interval and triples must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub iteration: usize,
    /// Mean batch loss since the previous point.
    pub train_loss: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedHead {
    /// The checkpoint with the best validation accuracy.
    pub head: EmbeddingHead,
    pub best_iteration: usize,
    pub best_accuracy: f64,
    pub curve: Vec<CurvePoint>,
}

fn pick_negative<R: Rng + ?Sized>(
    policy: NegativePolicy,
    targets: &[&[f64]],
    embeddings: &[Vec<f64>],
    anchor: usize,
    rng: &mut R,
) -> usize {
    match policy {
        NegativePolicy::Uniform => sample_negative_w2v(targets.len(), anchor, rng),
        NegativePolicy::FarHalf(DistanceReference::PositiveTarget) => {
            sample_far_half(targets, anchor, targets[anchor], rng)
        }
        NegativePolicy::FarHalf(DistanceReference::ImageEmbedding) => {
            sample_far_half(targets, anchor, &embeddings[anchor], rng)
        }
    }
}

/// Fraction of sampled (anchor, positive, negative) triples where the image
/// scores strictly higher with its own target.
pub fn validate<R: Rng + ?Sized>(
    head: &EmbeddingHead,
    data: &Dataset,
    policy: NegativePolicy,
    triples: usize,
    rng: &mut R,
) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::Empty("validation set (need at least 2 items)"));
    }
    if triples == 0 {
        return Err(Error::InvalidArgument("need at least one validation triple".into()));
    }
    let embeddings = (0..data.len()).map(|i| head.forward(data.feature(i))).collect::<Result<Vec<_>>>()?;
    let targets: Vec<&[f64]> = (0..data.len()).map(|i| data.target(i)).collect();
    let mut correct = 0usize;
    for t in 0..triples {
        let anchor = t % data.len();
        let neg = pick_negative(policy, &targets, &embeddings, anchor, rng);
        let phi = &embeddings[anchor];
        if dot(phi, targets[anchor]) > dot(phi, targets[neg]) {
            correct += 1;
        }
    }
    Ok(correct as f64 / triples as f64)
}

/// Trains a head from scratch; see [`train_from`].
pub fn train_head(train: &Dataset, validation: &Dataset, config: &TrainerConfig) -> Result<TrainedHead> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let head = EmbeddingHead::random(
        config.kind,
        train.feature_dim,
        train.target_dim,
        config.normalize_output,
        config.init_std,
        &mut rng,
    )?;
    train_from(head, train, validation, config, &mut rng)
}

/// SGD over shuffled minibatches drawn without replacement within an
/// epoch. Validates every `validation_interval` iterations and at the end,
/// returning the best-scoring checkpoint.
pub fn train_from(
    mut head: EmbeddingHead,
    train: &Dataset,
    validation: &Dataset,
    config: &TrainerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainedHead> {
    config.validate()?;
    head.validate()?;
    if train.len() < 2 {
        return Err(Error::Empty("training set (need at least 2 items)"));
    }
    if validation.len() < 2 {
        return Err(Error::Empty("validation set (need at least 2 items)"));
    }
    for d in [train, validation] {
        if d.feature_dim != head.input_dim {
            return Err(Error::DimensionMismatch { expected: head.input_dim, actual: d.feature_dim });
        }
        if d.target_dim != head.output_dim {
            return Err(Error::DimensionMismatch { expected: head.output_dim, actual: d.target_dim });
        }
    }

    let batch = config.batch_size.min(train.len());
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);
    let mut cursor = 0;

    let mut vel_w = vec![0.0; head.weights.len()];
    let mut vel_b = vec![0.0; head.bias.len()];
    let mut grad_w = vec![0.0; head.weights.len()];
    let mut grad_b = vec![0.0; head.bias.len()];

    let val_seed = config.seed ^ 0x9e37_79b9_7f4a_7c15;
    let score = |h: &EmbeddingHead| {
        validate(
            h,
            validation,
            config.negative_policy,
            config.validation_triples,
            &mut ChaCha8Rng::seed_from_u64(val_seed),
        )
    };

    let mut curve = Vec::new();
    let mut best =
        TrainedHead { best_accuracy: score(&head)?, head: head.clone(), best_iteration: 0, curve: Vec::new() };
    let (mut loss_acc, mut loss_batches) = (0.0, 0usize);

    for iteration in 1..=config.max_iterations {
        if cursor + batch > order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        let members = &order[cursor..cursor + batch];
        cursor += batch;

        let targets: Vec<&[f64]> = members.iter().map(|&i| train.target(i)).collect();
        let embeddings = match config.negative_policy {
            NegativePolicy::FarHalf(DistanceReference::ImageEmbedding) => {
                members.iter().map(|&i| head.forward(train.feature(i))).collect::<Result<Vec<_>>>()?
            }
            _ => Vec::new(),
        };
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        let mut batch_loss = 0.0;
        for (a, &i) in members.iter().enumerate() {
            let neg = pick_negative(config.negative_policy, &targets, &embeddings, a, rng);
            batch_loss += accumulate_triple(
                &head,
                train.feature(i),
                targets[a],
                targets[neg],
                config.margin,
                &mut grad_w,
                &mut grad_b,
            )?;
        }
        let inv = 1.0 / batch as f64;
        for ((w, v), g) in head.weights.iter_mut().zip(vel_w.iter_mut()).zip(&grad_w) {
            *v = config.momentum * *v - config.learning_rate * (g * inv + config.weight_decay * *w);
            *w += *v;
        }
        for ((b, v), g) in head.bias.iter_mut().zip(vel_b.iter_mut()).zip(&grad_b) {
            *v = config.momentum * *v - config.learning_rate * g * inv;
            *b += *v;
        }
        loss_acc += batch_loss * inv;
        loss_batches += 1;

        if iteration % config.validation_interval == 0 || iteration == config.max_iterations {
            let accuracy = score(&head)?;
            curve.push(CurvePoint {
                iteration,
                train_loss: loss_acc / loss_batches as f64,
                validation_accuracy: accuracy,
            });
            (loss_acc, loss_batches) = (0.0, 0);
            if accuracy > best.best_accuracy {
                best.head = head.clone();
                best.best_accuracy = accuracy;
                best.best_iteration = iteration;
            }
        }
    }
    if head.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument("training diverged".into()));
    }
    best.curve = curve;
    Ok(best)
}
