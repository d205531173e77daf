//! Toy image features for desk-scale runs.

use std::fs;
use std::path::Path;

use geoembed_core::embedhead::ImageFeatureStore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 64;

/// Uniform `[-1, 1)` features, one row per id in the given order.
pub fn random_features(ids: &[String], dim: usize, seed: u64) -> Result<ImageFeatureStore> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ImageFeatureStore::new(dim);
    for id in ids {
        let row: Vec<f32> = (0..dim).map(|_| rng.random::<f32>() * 2.0 - 1.0).collect();
        store.insert(id.clone(), &row)?;
    }
    Ok(store)
}

/// 4×4×4 RGB histogram normalized to sum 1.
pub fn color_histogram(path: &Path) -> Result<[f32; HISTOGRAM_BINS]> {
    let img = image::open(path).map_err(|e| Error::format(path, e))?.to_rgb8();
    let mut bins = [0u64; HISTOGRAM_BINS];
    for px in img.pixels() {
        let [r, g, b] = px.0;
        bins[(usize::from(r >> 6) << 4) | (usize::from(g >> 6) << 2) | usize::from(b >> 6)] += 1;
    }
    let total = bins.iter().sum::<u64>().max(1) as f32;
    Ok(bins.map(|c| c as f32 / total))
}

/// Histograms for every PNG or JPEG in `dir`, keyed by file stem and sorted
/// by name.
pub fn histogram_features(dir: &Path) -> Result<ImageFeatureStore> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        })
        .collect();
    paths.sort();
    let mut store = ImageFeatureStore::new(HISTOGRAM_BINS);
    for p in paths {
        let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        store.insert(id, &color_histogram(&p)?)?;
    }
    Ok(store)
}
