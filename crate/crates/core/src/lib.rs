//! Core algorithms for learning relations between caption words, images and
//! city neighborhoods from caption+image social-media posts.
//!
//! The crate only needs `alloc`. Everything that touches files, the process
//! environment or threads lives in the `geoembed` companion crate.
//!
//! Pipeline, in dependency order:
//!
//! - [`corpus`]: tokenization, user blacklist and the cleaning rules that turn
//!   raw posts into per-language corpora.
//! - [`gazetteer`]: districts/neighborhoods with aliases, mention matching and
//!   phrase merging.
//! - [`textstats`]: frequent-word rates and mention shares.
//! - [`word2vec`]: CBOW with negative sampling and nearest-word queries.
//! - [`neighctx`]: neighborhood-context and caption mean-embedding targets.
//! - [`embedhead`]: the image-feature projection head, ranking loss, negative
//!   sampling, SGD trainer and dataset splits.
//! - [`retrieval`]: exhaustive image-by-place and image-by-word search.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod corpus;
pub mod embedhead;
mod error;
pub mod gazetteer;
pub mod langid;
pub mod linalg;
pub mod neighctx;
pub mod retrieval;
pub mod text;
pub mod textstats;
pub mod word2vec;

pub use error::{Error, Result};

/// 64-bit FNV-1a, used to bind artifacts to an axis order or parameter set.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
