//! Lock-free multi-threaded CBOW.

use std::sync::atomic::AtomicU64;

use geoembed_core::word2vec::{
    AtomicParam, CbowConfig, CbowTrainer, EpochStats, SharedParam, TrainingLog, WordEmbeddings,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Trains CBOW with `threads` workers sharing the parameter matrices
/// without locks. Each epoch splits the sentences into contiguous shards.
///
/// With one thread this is the sequential trainer and bit-reproducible;
/// with more, update interleaving makes runs differ slightly.
pub fn train_cbow_threads<S: AsRef<[String]>>(
    corpus: &[S],
    config: CbowConfig,
    threads: usize,
) -> Result<(WordEmbeddings, TrainingLog)> {
    let trainer = CbowTrainer::new(corpus, config)?;
    if threads <= 1 {
        return Ok(trainer.train()?);
    }
    let (input, output) = trainer.initial_parameters();
    let input: Vec<AtomicParam> = input.into_iter().map(AtomicParam::new).collect();
    let output: Vec<AtomicParam> = output.into_iter().map(AtomicParam::new).collect();
    let progress = AtomicU64::new(0);
    let n = trainer.sentences().len();
    let shard = n.div_ceil(threads);
    let seed = trainer.config().seed;
    let mut epoch_losses = Vec::with_capacity(trainer.config().epochs);

    for epoch in 0..trainer.config().epochs {
        let stats = std::thread::scope(|s| {
            let workers: Vec<_> = (0..threads)
                .map(|t| {
                    let (trainer, input, output, progress) = (&trainer, &input, &output, &progress);
                    s.spawn(move || {
                        let stream = (epoch * threads + t) as u64;
                        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1).wrapping_add(stream));
                        let ids = (t * shard).min(n)..((t + 1) * shard).min(n);
                        trainer.train_sentences(input, output, ids, progress, &mut rng)
                    })
                })
                .collect();
            let mut total = EpochStats::default();
            for w in workers {
                total.merge(w.join().expect("training worker panicked"));
            }
            total
        });
        epoch_losses.push(stats.mean_loss());
        log::info!("cbow epoch {}: mean loss {:.4}", epoch + 1, stats.mean_loss());
    }
    let input: Vec<f64> = input.iter().map(SharedParam::get).collect();
    let output: Vec<f64> = output.iter().map(SharedParam::get).collect();
    Ok(trainer.finish(&input, &output, epoch_losses))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<Vec<String>> {
        (0..400)
            .map(|i| {
                let c = if i % 2 == 0 { "a" } else { "b" };
                (0..8).map(|j| format!("{c}{}", (i * 7 + j * 3) % 10)).collect()
            })
            .collect()
    }

    #[test]
    fn single_thread_matches_sequential() {
        let config = CbowConfig { dim: 8, epochs: 2, min_count: 1, ..CbowConfig::default() };
        let (a, _) = train_cbow_threads(&corpus(), config.clone(), 1).unwrap();
        let (b, _) = geoembed_core::word2vec::train_cbow(&corpus(), config).unwrap();
        assert_eq!(a.input(), b.input());
    }

    #[test]
    fn threaded_training_separates_groups() {
        let config = CbowConfig { dim: 16, window: 4, epochs: 10, min_count: 1, ..CbowConfig::default() };
        let (emb, log) = train_cbow_threads(&corpus(), config, 4).unwrap();
        assert_eq!(log.epoch_losses.len(), 10);
        assert!(emb.input().iter().all(|x| x.is_finite()));
        let same = emb.similarity("a0", "a2").unwrap();
        let cross = emb.similarity("a0", "b1").unwrap();
        assert!(same > cross, "{same} vs {cross}");
    }
}
