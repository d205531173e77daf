use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub retrieval: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train: 0.80, validation: 0.05, retrieval: 0.15, seed: 7 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.retrieval];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("split fractions must lie in [0, 1]".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub retrieval: Vec<String>,
}

/// Seeded random partition. The ids are sorted before shuffling, so the
/// result depends only on the id set and the seed.
pub fn split_dataset(ids: &[String], spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let unique: BTreeSet<&String> = ids.iter().collect();
    if unique.len() != ids.len() {
        return Err(Error::InvalidArgument("duplicate ids in split input".into()));
    }
    if ids.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 posts to split".into()));
    }
    let mut order: Vec<String> = unique.into_iter().cloned().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let n = order.len() as f64;
    let n_train = libm::round(n * spec.train) as usize;
    let n_val = (libm::round(n * spec.validation) as usize).min(order.len() - n_train);
    let retrieval = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(Splits { train: order, validation, retrieval })
}
