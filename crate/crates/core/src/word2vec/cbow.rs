//! CBOW with negative sampling.
//!
//! The averaged context vector `h` predicts the center word against noise
//! words drawn from the unigram distribution raised to `noise_exponent`:
//!
//! `loss = -ln σ(h·o_center) - Σ_noise ln σ(-h·o_noise)`
//!
//! Updates follow the exact gradient of that loss, so each context row moves
//! by `1/|context|` of the hidden-layer gradient.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::embeddings::WordEmbeddings;
use super::vocab::{build_vocab, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CbowConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub noise_exponent: f64,
    pub initial_lr: f64,
    /// Floor of the linear decay, as a fraction of `initial_lr`.
    pub min_lr_fraction: f64,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    pub seed: u64,
}

impl Default for CbowConfig {
    fn default() -> Self {
        CbowConfig {
            dim: 300,
            window: 8,
            epochs: 25,
            min_count: 5,
            negatives: 5,
            noise_exponent: 0.75,
            initial_lr: 0.025,
            min_lr_fraction: 1e-4,
            subsample: None,
            seed: 7,
        }
    }
}

impl CbowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.initial_lr >= 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be finite and non-negative");
        }
        if !self.noise_exponent.is_finite() {
            return bad("noise_exponent must be finite");
        }
        if matches!(self.subsample, Some(t) if !(t > 0.0)) {
            return bad("subsample threshold must be positive");
        }
        Ok(())
    }
}

/// A parameter cell that tolerates shared mutation.
///
/// `Cell<f64>` serves sequential training; [`AtomicParam`] lets several
/// threads update one matrix without locks (updates may interleave).
pub trait SharedParam {
    fn get(&self) -> f64;
    fn set(&self, value: f64);
    fn add(&self, delta: f64) {
        self.set(self.get() + delta);
    }
}

impl SharedParam for Cell<f64> {
    fn get(&self) -> f64 {
        Cell::get(self)
    }
    fn set(&self, value: f64) {
        Cell::set(self, value)
    }
}

#[derive(Debug, Default)]
#[repr(transparent)]
pub struct AtomicParam(AtomicU64);

impl AtomicParam {
    pub fn new(value: f64) -> Self {
        AtomicParam(AtomicU64::new(value.to_bits()))
    }
}

impl SharedParam for AtomicParam {
    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
    fn set(&self, value: f64) {
        self.0.store(value.to_bits(), Ordering::Relaxed)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `-ln σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + libm::log1p(libm::exp(-libm::fabs(x)))
}

/// Loss and exact gradients for one (context, center, noise) example.
#[derive(Debug, Clone, PartialEq)]
pub struct NsGradients {
    pub loss: f64,
    /// Gradient for each context input row (identical across rows).
    pub context: Vec<f64>,
    pub center: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
}

/// Reference objective for one example, on explicit vectors.
pub fn negative_sampling_gradients(context: &[&[f64]], center: &[f64], noise: &[&[f64]]) -> Result<NsGradients> {
    let dim = center.len();
    if context.is_empty() {
        return Err(Error::Empty("context"));
    }
    for row in context.iter().chain(noise) {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: row.len() });
        }
    }
    let inv = 1.0 / context.len() as f64;
    let mut h = vec![0.0; dim];
    for row in context {
        for (a, b) in h.iter_mut().zip(row.iter()) {
            *a += b * inv;
        }
    }
    let mut grad_h = vec![0.0; dim];
    let mut loss = 0.0;
    let mut score = |out: &[f64], label: f64, grad_h: &mut [f64]| -> Vec<f64> {
        let s: f64 = h.iter().zip(out).map(|(a, b)| a * b).sum();
        loss += if label > 0.5 { neg_log_sigmoid(s) } else { neg_log_sigmoid(-s) };
        // d loss / d s
        let coeff = sigmoid(s) - label;
        for (g, o) in grad_h.iter_mut().zip(out) {
            *g += coeff * o;
        }
        h.iter().map(|x| coeff * x).collect()
    };
    let center_grad = score(center, 1.0, &mut grad_h);
    let noise_grads = noise.iter().map(|o| score(o, 0.0, &mut grad_h)).collect();
    Ok(NsGradients { loss, context: grad_h.iter().map(|g| g * inv).collect(), center: center_grad, noise: noise_grads })
}

/// One SGD step on shared parameter rows. Returns the example's loss.
///
/// Output rows are updated as soon as their score is used; with distinct
/// targets this equals a step along [`negative_sampling_gradients`].
pub fn cbow_step<P: SharedParam>(
    input: &[P],
    output: &[P],
    dim: usize,
    context: &[usize],
    targets: &[(usize, f64)],
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let Scratch { hidden, grad_h } = scratch;
    hidden.clear();
    hidden.resize(dim, 0.0);
    grad_h.clear();
    grad_h.resize(dim, 0.0);
    let inv = 1.0 / context.len() as f64;
    for &c in context {
        let row = &input[c * dim..(c + 1) * dim];
        for (h, p) in hidden.iter_mut().zip(row) {
            *h += p.get() * inv;
        }
    }
    let mut loss = 0.0;
    for &(t, label) in targets {
        let row = &output[t * dim..(t + 1) * dim];
        let s: f64 = hidden.iter().zip(row).map(|(h, p)| h * p.get()).sum();
        loss += if label > 0.5 { neg_log_sigmoid(s) } else { neg_log_sigmoid(-s) };
        let coeff = sigmoid(s) - label;
        for ((g, p), h) in grad_h.iter_mut().zip(row).zip(hidden.iter()) {
            *g += coeff * p.get();
            p.add(-lr * coeff * h);
        }
    }
    for &c in context {
        let row = &input[c * dim..(c + 1) * dim];
        for (p, g) in row.iter().zip(grad_h.iter()) {
            p.add(-lr * g * inv);
        }
    }
    loss
}

/// Reusable buffers for [`cbow_step`].
#[derive(Debug, Default)]
pub struct Scratch {
    hidden: Vec<f64>,
    grad_h: Vec<f64>,
}

/// Unigram^exponent noise distribution sampled by inverse CDF.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    pub fn new(counts: &[u64], exponent: f64) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += libm::pow(c as f64, exponent);
                acc
            })
            .collect();
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Empty("noise distribution"));
        }
        Ok(NoiseDistribution { cumulative })
    }

    pub fn probability(&self, index: usize) -> f64 {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let prev = if index == 0 { 0.0 } else { self.cumulative[index - 1] };
        (self.cumulative[index] - prev) / total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpochStats {
    pub loss_sum: f64,
    pub examples: u64,
}

impl EpochStats {
    pub fn merge(&mut self, other: EpochStats) {
        self.loss_sum += other.loss_sum;
        self.examples += other.examples;
    }

    pub fn mean_loss(&self) -> f64 {
        if self.examples == 0 {
            0.0
        } else {
            self.loss_sum / self.examples as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    /// Mean per-example loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub training_tokens: u64,
}

/// Prepared CBOW run: vocabulary, encoded sentences and noise table.
///
/// [`CbowTrainer::train`] is the sequential, bit-reproducible path. A caller
/// with threads can instead share [`AtomicParam`] matrices and call
/// [`CbowTrainer::train_sentences`] on disjoint shards.
#[derive(Debug, Clone)]
pub struct CbowTrainer {
    config: CbowConfig,
    vocab: Vocabulary,
    sentences: Vec<Vec<usize>>,
    noise: NoiseDistribution,
    training_tokens: u64,
}

impl CbowTrainer {
    pub fn new<S: AsRef<[String]>>(corpus: &[S], config: CbowConfig) -> Result<Self> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::Empty("corpus"));
        }
        let vocab = build_vocab(corpus, config.min_count)?;
        let sentences: Vec<Vec<usize>> =
            corpus.iter().map(|s| s.as_ref().iter().filter_map(|t| vocab.index_of(t)).collect()).collect();
        let training_tokens = sentences.iter().map(|s| s.len() as u64).sum();
        let noise = NoiseDistribution::new(vocab.counts(), config.noise_exponent)?;
        Ok(CbowTrainer { config, vocab, sentences, noise, training_tokens })
    }

    pub fn config(&self) -> &CbowConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn sentences(&self) -> &[Vec<usize>] {
        &self.sentences
    }

    pub fn training_tokens(&self) -> u64 {
        self.training_tokens
    }

    /// Seeded initial (input, output) matrices: input uniform in
    /// `±0.5/dim`, output zero.
    pub fn initial_parameters(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = self.config.dim;
        let n = self.vocab.len() * dim;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let input = (0..n).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
        (input, vec![0.0; n])
    }

    /// Learning rate after `done` of the total planned positions.
    pub fn learning_rate(&self, done: u64) -> f64 {
        let planned = (self.config.epochs as u64 * self.training_tokens).max(1) as f64;
        let frac = (1.0 - done as f64 / planned).max(self.config.min_lr_fraction);
        self.config.initial_lr * frac
    }

    fn keep_probability(&self, word: usize) -> f64 {
        match self.config.subsample {
            None => 1.0,
            Some(t) => {
                let f = self.vocab.counts()[word] as f64;
                let threshold = t * self.training_tokens as f64;
                ((libm::sqrt(f / threshold) + 1.0) * threshold / f).min(1.0)
            }
        }
    }

    /// Trains over the given sentence indices once. `progress` counts
    /// processed positions across all workers and drives the decay.
    pub fn train_sentences<P: SharedParam, R: Rng + ?Sized>(
        &self,
        input: &[P],
        output: &[P],
        sentence_ids: impl IntoIterator<Item = usize>,
        progress: &AtomicU64,
        rng: &mut R,
    ) -> EpochStats {
        let dim = self.config.dim;
        let window = self.config.window;
        let mut stats = EpochStats::default();
        let mut scratch = Scratch::default();
        let mut context = Vec::with_capacity(2 * window);
        let mut targets = Vec::with_capacity(self.config.negatives + 1);
        let mut kept = Vec::new();
        for sid in sentence_ids {
            let sentence = &self.sentences[sid];
            let done = progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let lr = self.learning_rate(done);
            kept.clear();
            if self.config.subsample.is_some() {
                for &w in sentence {
                    if rng.random::<f64>() < self.keep_probability(w) {
                        kept.push(w);
                    }
                }
            } else {
                kept.extend_from_slice(sentence);
            }
            for pos in 0..kept.len() {
                context.clear();
                let lo = pos.saturating_sub(window);
                let hi = (pos + window + 1).min(kept.len());
                context.extend((lo..hi).filter(|&j| j != pos).map(|j| kept[j]));
                if context.is_empty() {
                    continue;
                }
                let center = kept[pos];
                targets.clear();
                targets.push((center, 1.0));
                for _ in 0..self.config.negatives {
                    let w = self.noise.sample(rng);
                    if w != center {
                        targets.push((w, 0.0));
                    }
                }
                stats.loss_sum += cbow_step(input, output, dim, &context, &targets, lr, &mut scratch);
                stats.examples += 1;
            }
        }
        stats
    }

    /// Sequential training: sentences in corpus order, one seeded stream.
    pub fn train(self) -> Result<(WordEmbeddings, TrainingLog)> {
        let (mut input, mut output) = self.initial_parameters();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(1));
        let progress = AtomicU64::new(0);
        let mut epoch_losses = Vec::with_capacity(self.config.epochs);
        {
            let input_cells = Cell::from_mut(input.as_mut_slice()).as_slice_of_cells();
            let output_cells = Cell::from_mut(output.as_mut_slice()).as_slice_of_cells();
            for _ in 0..self.config.epochs {
                let stats =
                    self.train_sentences(input_cells, output_cells, 0..self.sentences.len(), &progress, &mut rng);
                epoch_losses.push(stats.mean_loss());
            }
        }
        Ok(self.finish(&input, &output, epoch_losses))
    }

    /// Packages trained matrices as embeddings plus a log.
    pub fn finish(self, input: &[f64], output: &[f64], epoch_losses: Vec<f64>) -> (WordEmbeddings, TrainingLog) {
        let log = TrainingLog { epoch_losses, vocab_size: self.vocab.len(), training_tokens: self.training_tokens };
        let narrow = |m: &[f64]| m.iter().map(|&x| x as f32).collect();
        let emb = WordEmbeddings::new(self.vocab, self.config.dim, narrow(input), narrow(output), None)
            .expect("trainer matrices match the vocabulary");
        (emb, log)
    }
}

/// Builds the vocabulary and trains sequentially.
pub fn train_cbow<S: AsRef<[String]>>(corpus: &[S], config: CbowConfig) -> Result<(WordEmbeddings, TrainingLog)> {
    CbowTrainer::new(corpus, config)?.train()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    fn repeated(sentence: &str, times: usize) -> Vec<Vec<String>> {
        let s: Vec<String> = sentence.split(' ').map(ToString::to_string).collect();
        vec![s; times]
    }

    fn lcg_vec(seed: &mut u64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0
            })
            .collect()
    }

    #[test]
    fn defaults_match_published_settings() {
        let c = CbowConfig::default();
        assert_eq!((c.dim, c.window, c.epochs), (300, 8, 25));
        assert_eq!((c.negatives, c.min_count), (5, 5));
        assert_eq!((c.noise_exponent, c.initial_lr), (0.75, 0.025));
        assert!(c.subsample.is_none());
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            CbowConfig { dim: 0, ..Default::default() },
            CbowConfig { window: 0, ..Default::default() },
            CbowConfig { epochs: 0, ..Default::default() },
            CbowConfig { initial_lr: f64::NAN, ..Default::default() },
            CbowConfig { subsample: Some(0.0), ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut seed = 17u64;
        let dim = 6;
        let step = 1e-4;
        for _ in 0..20 {
            let ctx: Vec<Vec<f64>> = (0..3).map(|_| lcg_vec(&mut seed, dim)).collect();
            let center = lcg_vec(&mut seed, dim);
            let noise: Vec<Vec<f64>> = (0..2).map(|_| lcg_vec(&mut seed, dim)).collect();
            let loss_of = |ctx: &[Vec<f64>], center: &[f64], noise: &[Vec<f64>]| {
                let c: Vec<&[f64]> = ctx.iter().map(Vec::as_slice).collect();
                let n: Vec<&[f64]> = noise.iter().map(Vec::as_slice).collect();
                negative_sampling_gradients(&c, center, &n).unwrap()
            };
            let g = loss_of(&ctx, &center, &noise);
            let check = |analytic: f64, plus: f64, minus: f64| {
                let numeric = (plus - minus) / (2.0 * step);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-5 || (analytic - numeric).abs() < 1e-9, "{analytic} vs {numeric}");
            };
            for k in 0..dim {
                let mut p = ctx.clone();
                let mut m = ctx.clone();
                p[1][k] += step;
                m[1][k] -= step;
                check(g.context[k], loss_of(&p, &center, &noise).loss, loss_of(&m, &center, &noise).loss);
                let (mut p, mut m) = (center.clone(), center.clone());
                p[k] += step;
                m[k] -= step;
                check(g.center[k], loss_of(&ctx, &p, &noise).loss, loss_of(&ctx, &m, &noise).loss);
                let (mut p, mut m) = (noise.clone(), noise.clone());
                p[0][k] += step;
                m[0][k] -= step;
                check(g.noise[0][k], loss_of(&ctx, &center, &p).loss, loss_of(&ctx, &center, &m).loss);
            }
        }
    }

    #[test]
    fn step_moves_along_reference_gradient() {
        let dim = 4;
        let mut seed = 3u64;
        let mut input = lcg_vec(&mut seed, 5 * dim);
        let mut output = lcg_vec(&mut seed, 5 * dim);
        let (in0, out0) = (input.clone(), output.clone());
        let row = |m: &[f64], i: usize| m[i * dim..(i + 1) * dim].to_vec();
        let ctx = [0usize, 2];
        let targets = [(1usize, 1.0), (3, 0.0), (4, 0.0)];
        let c: Vec<Vec<f64>> = ctx.iter().map(|&i| row(&in0, i)).collect();
        let cr: Vec<&[f64]> = c.iter().map(Vec::as_slice).collect();
        let n: Vec<Vec<f64>> = [3, 4].iter().map(|&i| row(&out0, i)).collect();
        let nr: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
        let reference = negative_sampling_gradients(&cr, &row(&out0, 1), &nr).unwrap();
        let lr = 0.1;
        let loss = cbow_step(
            Cell::from_mut(input.as_mut_slice()).as_slice_of_cells(),
            Cell::from_mut(output.as_mut_slice()).as_slice_of_cells(),
            dim,
            &ctx,
            &targets,
            lr,
            &mut Scratch::default(),
        );
        assert!((loss - reference.loss).abs() < 1e-12);
        for k in 0..dim {
            for &i in &ctx {
                assert!((input[i * dim + k] - (in0[i * dim + k] - lr * reference.context[k])).abs() < 1e-12);
            }
            assert!((output[dim + k] - (out0[dim + k] - lr * reference.center[k])).abs() < 1e-12);
            assert!((output[3 * dim + k] - (out0[3 * dim + k] - lr * reference.noise[0][k])).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_distribution_follows_powered_counts() {
        let noise = NoiseDistribution::new(&[16, 1, 0], 0.5).unwrap();
        assert!((noise.probability(0) - 0.8).abs() < 1e-12);
        assert!((noise.probability(1) - 0.2).abs() < 1e-12);
        assert_eq!(noise.probability(2), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0usize; 3];
        for _ in 0..20_000 {
            hits[noise.sample(&mut rng)] += 1;
        }
        assert_eq!(hits[2], 0);
        assert!((hits[0] as f64 / 20_000.0 - 0.8).abs() < 0.02);
    }

    #[test]
    fn loss_decreases_on_repeated_sentence() {
        let corpus = repeated("the cat sat on the warm mat by the door", 50);
        let cfg = CbowConfig { dim: 8, min_count: 1, epochs: 25, ..Default::default() };
        let (_, log) = train_cbow(&corpus, cfg).unwrap();
        assert_eq!(log.epoch_losses.len(), 25);
        for w in log.epoch_losses[..5].windows(2) {
            assert!(w[1] < w[0], "{:?}", &log.epoch_losses[..5]);
        }
    }

    #[test]
    fn sequential_training_is_bit_reproducible() {
        let corpus: Vec<Vec<String>> =
            (0..40).map(|i| (0..6).map(|j| format!("w{}", (i * 7 + j * 3) % 13)).collect()).collect();
        let cfg = CbowConfig { dim: 10, min_count: 1, epochs: 3, subsample: Some(1e-2), ..Default::default() };
        let (a, la) = train_cbow(&corpus, cfg.clone()).unwrap();
        let (b, lb) = train_cbow(&corpus, cfg).unwrap();
        assert_eq!(la, lb);
        assert!(a.input().iter().zip(b.input()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.output().iter().zip(b.output()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn zero_learning_rate_keeps_initial_parameters() {
        let corpus = repeated("a b c d", 5);
        let cfg = CbowConfig { dim: 4, min_count: 1, epochs: 2, initial_lr: 0.0, ..Default::default() };
        let trainer = CbowTrainer::new(&corpus, cfg).unwrap();
        let (init, _) = trainer.initial_parameters();
        let (emb, _) = trainer.train().unwrap();
        let expect: Vec<f32> = init.iter().map(|&x| x as f32).collect();
        assert_eq!(emb.input(), expect.as_slice());
        assert!(emb.output().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn learning_rate_decays_linearly_to_floor() {
        let corpus = repeated("a b c d", 5);
        let cfg = CbowConfig { dim: 4, min_count: 1, epochs: 2, ..Default::default() };
        let t = CbowTrainer::new(&corpus, cfg).unwrap();
        assert_eq!(t.training_tokens(), 20);
        assert!((t.learning_rate(0) - 0.025).abs() < 1e-15);
        assert!((t.learning_rate(20) - 0.0125).abs() < 1e-15);
        assert!((t.learning_rate(40) - 0.025e-4).abs() < 1e-15);
    }
}
