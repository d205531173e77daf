//! Binary artifact files: round trips and rejection of damaged input.

use geoembed::formats::{self, basis_to_table, table_to_basis};
use geoembed::synth;
use geoembed_core::embedhead::{EmbeddingHead, ImageFeatureStore, TargetKind, TargetSet};
use geoembed_core::gazetteer::Axes;
use geoembed_core::neighctx::NeighborhoodBasis;
use geoembed_core::word2vec::{train_cbow, CbowConfig, WordEmbeddings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn embeddings() -> WordEmbeddings {
    let corpus = synth::two_cluster_corpus(6, 100, 6, 3);
    train_cbow(&corpus, CbowConfig { dim: 8, epochs: 1, min_count: 1, ..CbowConfig::default() }).unwrap().0
}

#[test]
fn embeddings_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/w.gemb");
    let emb = embeddings();
    formats::save(&path, &emb).unwrap();
    let back: WordEmbeddings = formats::load(&path).unwrap();
    assert_eq!(back.input(), emb.input());
    assert_eq!(back.output(), emb.output());
    assert_eq!(back.vocab().tokens(), emb.vocab().tokens());
}

#[test]
fn head_keeps_kind_and_digest() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut head = EmbeddingHead::random(TargetKind::Word, 5, 3, false, 0.1, &mut rng).unwrap();
    head.axes_digest = 0xfeed;
    formats::save(dir.path().join("h.ghed"), &head).unwrap();
    let back: EmbeddingHead = formats::load(dir.path().join("h.ghed")).unwrap();
    // Parameters are stored as f32.
    head.weights.iter_mut().for_each(|w| *w = f64::from(*w as f32));
    assert_eq!(back, head);
}

#[test]
fn basis_round_trips_through_a_target_table() {
    let axes = Axes::new(vec!["north".into(), "south".into()]).unwrap();
    let basis = NeighborhoodBasis::from_vectors(axes, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]).unwrap();
    let back = table_to_basis(&basis_to_table(&basis)).unwrap();
    assert_eq!(back.axes(), basis.axes());
    assert_eq!(back.len(), 2);
}

#[test]
fn damaged_files_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.gfea");
    let mut store = ImageFeatureStore::new(2);
    store.insert("a", &[1.0, 2.0]).unwrap();
    formats::save(&path, &store).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    let err = formats::load::<ImageFeatureStore>(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    std::fs::write(&path, &bytes).unwrap();
    assert!(formats::load::<TargetSet>(&path).is_err(), "magic of another format accepted");
    assert!(formats::load::<ImageFeatureStore>(dir.path().join("absent.gfea")).is_err());
}
