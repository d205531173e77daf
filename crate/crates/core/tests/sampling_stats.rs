//! Goodness-of-fit of the in-batch negative samplers.

use geoembed_core::embedhead::{far_half, sample_negative_neighctx, sample_negative_w2v};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi2_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn batch(rng: &mut ChaCha8Rng, b: usize, d: usize) -> Vec<Vec<f64>> {
    (0..b)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

#[test]
fn neighctx_sampler_is_uniform_over_far_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let targets = batch(&mut rng, 120, 8);
    for anchor in [0, 57, 119] {
        let far = far_half(&targets, anchor, &targets[anchor]);
        assert_eq!(far.len(), 60);
        let mut slot = vec![usize::MAX; 120];
        for (s, &j) in far.iter().enumerate() {
            slot[j] = s;
        }
        let mut counts = vec![0u64; far.len()];
        for _ in 0..10_000 {
            let j = sample_negative_neighctx(&targets, anchor, &mut rng);
            assert_ne!(slot[j], usize::MAX, "drew {j} from the near half");
            counts[slot[j]] += 1;
        }
        let p = chi2_p(&counts);
        assert!(p > 0.01, "anchor {anchor}: p = {p}");
    }
}

#[test]
fn w2v_sampler_is_uniform_over_others() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for anchor in [0, 60, 119] {
        let mut counts = vec![0u64; 120];
        for _ in 0..10_000 {
            counts[sample_negative_w2v(120, anchor, &mut rng)] += 1;
        }
        assert_eq!(counts[anchor], 0);
        counts.remove(anchor);
        let p = chi2_p(&counts);
        assert!(p > 0.01, "anchor {anchor}: p = {p}");
    }
}

#[test]
fn far_half_is_brute_force_top_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for b in [2, 3, 7, 120] {
        let targets = batch(&mut rng, b, 5);
        let anchor = rng.random_range(0..b);
        let a = &targets[anchor];
        let dist = |j: usize| 1.0 - targets[j].iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
        let mut far = far_half(&targets, anchor, a);
        let cutoff = far.iter().map(|&j| dist(j)).fold(f64::INFINITY, f64::min);
        assert_eq!(far.len(), (b - 1).div_ceil(2));
        for j in (0..b).filter(|&j| j != anchor && !far.contains(&j)) {
            assert!(dist(j) <= cutoff + 1e-12);
        }
        far.sort_unstable();
        far.dedup();
        assert_eq!(far.len(), (b - 1).div_ceil(2));
        assert!(!far.contains(&anchor));
    }
}
