//! Acceptance checks. Prints one PASS, FAIL or SKIP line per check and
//! exits nonzero if any check fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use geoembed::formats::{self, Artifact};
use geoembed::pipeline::{run_pipeline, PipelineConfig, RunOptions, Stage};
use geoembed::{records, synth};
use geoembed_core::corpus::{build_user_blacklist, clean_corpus, CleaningOptions, LanguageLabel};
use geoembed_core::embedhead::{
    far_half, loss_gradients, ranking_loss, sample_negative_neighctx, sample_negative_w2v, split_dataset, train_head,
    Dataset, EmbeddingHead, SplitSpec, TargetKind, TargetSet, TrainerConfig,
};
use geoembed_core::gazetteer::{Axes, PlaceKind};
use geoembed_core::langid::StopwordDetector;
use geoembed_core::neighctx::{caption_nc, NeighborhoodBasis, TargetOptions};
use geoembed_core::retrieval::{build_index, query_neighborhood};
use geoembed_core::textstats::{district_mention_shares, neighborhood_mention_shares, MentionCounting};
use geoembed_core::word2vec::{train_cbow, CbowConfig, Vocabulary, WordEmbeddings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Environment variable naming the published corpus as posts JSONL.
const DATASET_VAR: &str = "GEOEMBED_INSTABARCELONA";

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = Result<Outcome, String>;

type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let checks: [Criterion; 10] = [
        ("cleaning rules on a planted 100-post fixture", Some(Duration::from_secs(1)), cleaning_exactness),
        ("neighborhood context targets against a double loop", Some(Duration::from_secs(1)), target_oracle),
        ("ranking loss formula and finite-difference gradients", Some(Duration::from_secs(10)), loss_and_gradients),
        ("negative samplers are uniform over their support", None, negative_sampling),
        ("CBOW separates two clusters and is reproducible", Some(Duration::from_secs(60)), cbow_sanity),
        ("head learns a planted linear map", Some(Duration::from_secs(120)), planted_head),
        ("train, validation and retrieval split", None, split_contract),
        ("artifact files round-trip byte for byte", None, round_trips),
        ("district and neighborhood mention shares", None, mention_statistics),
        ("published corpus district ordering", None, dataset_reproduction),
    ];
    let mut failed = 0;
    for (name, budget, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(Outcome::Pass(_)), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:.0?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(Outcome::Pass(detail)) => println!("PASS  {name} ({elapsed:.2?}): {detail}"),
            Ok(Outcome::Skip(reason)) => println!("SKIP  {name}: {reason}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name} ({elapsed:.2?}): {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}

fn cleaning_exactness() -> Check {
    let mut kept_total = 0;
    for seed in 1..=5 {
        let fx = synth::cleaning_fixture(seed);
        let blacklist = build_user_blacklist(&fx.posts, fx.user_threshold).map_err(|e| e.to_string())?;
        let options = CleaningOptions {
            min_caption_words: fx.min_words,
            other_cities: fx.other_cities.clone(),
            trust_declared_language: false,
        };
        let out =
            clean_corpus(&fx.posts, &blacklist, &options, &StopwordDetector::default()).map_err(|e| e.to_string())?;
        ensure(fx.posts.len() == 100, || format!("fixture has {} posts", fx.posts.len()))?;
        let want = fx.expected_discards();
        ensure(out.report.discarded == want, || {
            format!("seed {seed}: discards {:?}, want {want:?}", out.report.discarded)
        })?;
        let got: BTreeMap<LanguageLabel, Vec<String>> = out
            .corpora
            .iter()
            .map(|(l, posts)| (*l, posts.iter().map(|p| p.post.post_id.clone()).collect()))
            .filter(|(_, ids): &(_, Vec<String>)| !ids.is_empty())
            .collect();
        let want = fx.expected_kept();
        ensure(got == want, || format!("seed {seed}: kept {got:?}, want {want:?}"))?;
        kept_total = want.values().map(Vec::len).sum();
    }
    Ok(Outcome::Pass(format!("5 seeds, per-rule counts and {kept_total} kept ids exact")))
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v = uniform(rng, n);
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / s).collect()
}

fn target_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (vocab, j, d) = (40, 5, 16);
    let tokens: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let v = Vocabulary::from_parts(tokens, vec![5; vocab], 1).map_err(|e| e.to_string())?;
    let input: Vec<f32> = (0..vocab * d).map(|_| rng.random::<f32>() * 2.0 - 1.0).collect();
    let emb = WordEmbeddings::new(v, d, input, vec![0.0; vocab * d], None).map_err(|e| e.to_string())?;
    let places: Vec<Vec<f64>> = (0..j).map(|_| uniform(&mut rng, d)).collect();
    let axes = Axes::new((0..j).map(|i| format!("n{i}")).collect()).map_err(|e| e.to_string())?;
    let basis = NeighborhoodBasis::from_vectors(axes, d, &places.concat()).map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    for c in 0..50 {
        let len = rng.random_range(1..15);
        let caption: Vec<String> = (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect();
        let got = caption_nc("c", &caption, &emb, &basis, TargetOptions::default()).map_err(|e| e.to_string())?;
        let mut want = vec![0.0; j];
        for t in &caption {
            let w = emb.vector(t).ok_or("missing vector")?;
            for (k, n) in places.iter().enumerate() {
                let (mut num, mut ww, mut nn) = (0.0, 0.0, 0.0);
                for i in 0..d {
                    let wi = f64::from(w[i]);
                    num += wi * n[i];
                    ww += wi * wi;
                    nn += n[i] * n[i];
                }
                want[k] += num / (ww.sqrt() * nn.sqrt());
            }
        }
        let s = want.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (g, w) in got.vector.iter().zip(&want) {
            worst = worst.max((g - w / s).abs());
        }
        let norm = got.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        ensure((norm - 1.0).abs() < 1e-9, || format!("caption {c}: norm {norm}"))?;
    }
    ensure(worst < 1e-10, || format!("max component error {worst:e}"))?;
    Ok(Outcome::Pass(format!("50 captions, max component error {worst:.1e}")))
}

fn objective(head: &EmbeddingHead, x: &[f64], p: &[f64], n: &[f64], m: f64, wd: f64) -> f64 {
    let phi = head.forward(x).expect("forward");
    let w2: f64 = head.weights.iter().map(|w| w * w).sum();
    ranking_loss(&phi, p, n, m) + 0.5 * wd * w2
}

fn loss_and_gradients() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_loss = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..32);
        let (phi, p, n) = (uniform(&mut rng, d), uniform(&mut rng, d), uniform(&mut rng, d));
        let m = rng.random::<f64>();
        let sp: f64 = phi.iter().zip(&p).map(|(a, b)| a * b).sum();
        let sn: f64 = phi.iter().zip(&n).map(|(a, b)| a * b).sum();
        worst_loss = worst_loss.max((ranking_loss(&phi, &p, &n, m) - 0.5 * f64::max(0.0, m - sp + sn)).abs());
    }
    ensure(worst_loss < 1e-12, || format!("loss error {worst_loss:e}"))?;

    let (mut checked, mut worst_rel) = (0, 0.0f64);
    while checked < 100 {
        let (f, d) = (rng.random_range(2..10), rng.random_range(2..8));
        let normalize = rng.random::<bool>();
        let mut head =
            EmbeddingHead::random(TargetKind::NeighCtx, f, d, normalize, 0.5, &mut rng).map_err(|e| e.to_string())?;
        head.bias = uniform(&mut rng, d);
        let x = uniform(&mut rng, f);
        let (p, n) = (unit(&mut rng, d), unit(&mut rng, d));
        let (m, wd) = (0.4, 2e-4);
        let phi = head.forward(&x).map_err(|e| e.to_string())?;
        let slack = m - phi.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>()
            + phi.iter().zip(&n).map(|(a, b)| a * b).sum::<f64>();
        if slack.abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let g = loss_gradients(&head, &x, &p, &n, m, wd).map_err(|e| e.to_string())?;
        let h = 1e-5;
        for i in 0..f * d + d {
            let bump = |delta: f64| {
                let mut hh = head.clone();
                if i < f * d {
                    hh.weights[i] += delta
                } else {
                    hh.bias[i - f * d] += delta
                }
                objective(&hh, &x, &p, &n, m, wd)
            };
            let numeric = (bump(h) - bump(-h)) / (2.0 * h);
            let analytic = if i < f * d { g.weights[i] } else { g.bias[i - f * d] };
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
            worst_rel = worst_rel.max(rel);
        }
    }
    ensure(worst_rel < 1e-4, || format!("gradient relative error {worst_rel:e}"))?;
    Ok(Outcome::Pass(format!(
        "loss error {worst_loss:.1e} on 1000 triples, gradient error {worst_rel:.1e} on 100 heads"
    )))
}

fn chi2_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).expect("dof").cdf(stat)
}

fn negative_sampling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let b = 120;
    let targets: Vec<Vec<f64>> = (0..b).map(|_| unit(&mut rng, 10)).collect();
    let mut min_p = f64::INFINITY;
    for anchor in [0, 41, 119] {
        let far = far_half(&targets, anchor, &targets[anchor]);
        ensure(far.len() == 60, || format!("far half has {} items", far.len()))?;
        let mut slot = vec![usize::MAX; b];
        for (s, &j) in far.iter().enumerate() {
            slot[j] = s;
        }
        let mut counts = vec![0u64; far.len()];
        for _ in 0..10_000 {
            let j = sample_negative_neighctx(&targets, anchor, &mut rng);
            ensure(slot[j] != usize::MAX, || format!("anchor {anchor}: drew {j} from the near half"))?;
            counts[slot[j]] += 1;
        }
        min_p = min_p.min(chi2_p(&counts));

        let mut counts = vec![0u64; b];
        for _ in 0..10_000 {
            counts[sample_negative_w2v(b, anchor, &mut rng)] += 1;
        }
        ensure(counts[anchor] == 0, || format!("anchor {anchor} drawn as its own negative"))?;
        counts.remove(anchor);
        min_p = min_p.min(chi2_p(&counts));
    }
    ensure(min_p > 0.01, || format!("smallest chi-squared p = {min_p:.4}"))?;
    Ok(Outcome::Pass(format!("3 anchors x 2 samplers x 10000 draws, smallest p = {min_p:.3}")))
}

fn cbow_sanity() -> Check {
    let corpus = synth::two_cluster_corpus(20, 5_000, 10, 105);
    let config = CbowConfig { dim: 32, epochs: 25, min_count: 1, seed: 105, ..CbowConfig::default() };
    let (emb, _) = train_cbow(&corpus, config.clone()).map_err(|e| e.to_string())?;
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for i in 0..20 {
        for j in 0..20 {
            let sim = |x: String, y: String| emb.similarity(&x, &y).map_err(|e| e.to_string());
            if i < j {
                intra.push(sim(format!("a{i}"), format!("a{j}"))?);
                intra.push(sim(format!("b{i}"), format!("b{j}"))?);
            }
            inter.push(sim(format!("a{i}"), format!("b{j}"))?);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let gap = mean(&intra) - mean(&inter);
    ensure(gap >= 0.2, || format!("intra {:.3} inter {:.3}", mean(&intra), mean(&inter)))?;
    let (again, _) = train_cbow(&corpus, config).map_err(|e| e.to_string())?;
    ensure(emb.input() == again.input() && emb.output() == again.output(), || "runs differ".into())?;
    Ok(Outcome::Pass(format!(
        "intra {:.3}, inter {:.3}, gap {gap:.3}; two runs bit-identical",
        mean(&intra),
        mean(&inter)
    )))
}

fn planted_head() -> Check {
    let task = synth::planted_task(2_000, 64, 10, 0.05, 106).map_err(|e| e.to_string())?;
    let splits =
        split_dataset(&task.ids, &SplitSpec { seed: 106, ..SplitSpec::default() }).map_err(|e| e.to_string())?;
    let train = Dataset::assemble(&splits.train, &task.store, &task.targets, None).map_err(|e| e.to_string())?;
    let val = Dataset::assemble(&splits.validation, &task.store, &task.targets, None).map_err(|e| e.to_string())?;
    let config = TrainerConfig {
        max_iterations: 2_000,
        validation_interval: 100,
        seed: 106,
        ..TrainerConfig::for_kind(TargetKind::NeighCtx)
    };
    let mut trained = train_head(&train, &val, &config).map_err(|e| e.to_string())?;
    ensure(trained.best_accuracy >= 0.95, || format!("validation accuracy {:.3}", trained.best_accuracy))?;

    trained.head.axes_digest = task.axes.digest();
    let index = build_index(&trained.head, Some(&task.axes), &task.store, &splits.retrieval, None)
        .map_err(|e| e.to_string())?;
    let j = task.axes.len();
    let position: BTreeMap<&str, usize> = splits.retrieval.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut score = vec![vec![0.0; j]; splits.retrieval.len()];
    for (k, label) in task.axes.labels().iter().enumerate() {
        for hit in query_neighborhood(&index, label, index.len()).map_err(|e| e.to_string())? {
            score[position[hit.post_id.as_str()]][k] = hit.score;
        }
    }
    let hits = splits
        .retrieval
        .iter()
        .enumerate()
        .filter(|(i, id)| {
            let dominant = task.dominant(id).expect("planted target");
            (0..j).filter(|&k| score[*i][k] > score[*i][dominant]).count() < 5
        })
        .count();
    let recall = hits as f64 / splits.retrieval.len() as f64;
    ensure(recall >= 0.8, || format!("recall@5 {recall:.3}"))?;
    Ok(Outcome::Pass(format!(
        "validation accuracy {:.3} at iteration {}, recall@5 {recall:.3} over {} images",
        trained.best_accuracy,
        trained.best_iteration,
        splits.retrieval.len()
    )))
}

fn split_contract() -> Check {
    let ids: Vec<String> = (0..1000).map(|i| format!("post{i:04}")).collect();
    let spec = SplitSpec { train: 0.80, validation: 0.05, retrieval: 0.15, seed: 107 };
    let s = split_dataset(&ids, &spec).map_err(|e| e.to_string())?;
    let sizes = (s.train.len(), s.validation.len(), s.retrieval.len());
    ensure(sizes == (800, 50, 150), || format!("sizes {sizes:?}"))?;
    let mut all: Vec<&String> = s.train.iter().chain(&s.validation).chain(&s.retrieval).collect();
    all.sort();
    all.dedup();
    ensure(all.len() == 1000, || format!("{} distinct ids across parts", all.len()))?;
    let again = split_dataset(&ids, &spec).map_err(|e| e.to_string())?;
    ensure(again == s, || "re-run differs".into())?;
    Ok(Outcome::Pass("800/50/150, a partition, identical on re-run".into()))
}

fn rewrite<A: Artifact>(dir: &Path, name: &str, value: &A) -> Result<usize, String> {
    let (a, b) = (dir.join(format!("{name}.1")), dir.join(format!("{name}.2")));
    formats::save(&a, value).map_err(|e| e.to_string())?;
    let loaded: A = formats::load(&a).map_err(|e| e.to_string())?;
    formats::save(&b, &loaded).map_err(|e| e.to_string())?;
    let (x, y) = (std::fs::read(&a).map_err(|e| e.to_string())?, std::fs::read(&b).map_err(|e| e.to_string())?);
    ensure(x == y, || format!("{name}: bytes differ after a round trip"))?;
    Ok(x.len())
}

fn round_trips() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = synth::two_cluster_corpus(10, 200, 8, 108);
    let config = CbowConfig { dim: 12, epochs: 2, min_count: 1, ..CbowConfig::default() };
    let (emb, _) = train_cbow(&corpus, config).map_err(|e| e.to_string())?;
    let task = synth::planted_task(300, 24, 6, 0.05, 108).map_err(|e| e.to_string())?;
    let splits = split_dataset(&task.ids, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let train = Dataset::assemble(&splits.train, &task.store, &task.targets, None).map_err(|e| e.to_string())?;
    let val = Dataset::assemble(&splits.validation, &task.store, &task.targets, None).map_err(|e| e.to_string())?;
    let config = TrainerConfig {
        batch_size: 16,
        max_iterations: 50,
        validation_interval: 25,
        ..TrainerConfig::for_kind(TargetKind::NeighCtx)
    };
    let mut head = train_head(&train, &val, &config).map_err(|e| e.to_string())?.head;
    head.axes_digest = task.axes.digest();
    let index =
        build_index(&head, Some(&task.axes), &task.store, &splits.retrieval, None).map_err(|e| e.to_string())?;
    let targets: TargetSet = task.targets.clone();

    let sizes = [
        rewrite(dir.path(), "w2v.gemb", &emb)?,
        rewrite(dir.path(), "features.gfea", &task.store)?,
        rewrite(dir.path(), "targets.gncx", &targets)?,
        rewrite(dir.path(), "head.ghed", &head)?,
        rewrite(dir.path(), "index.gidx", &index)?,
    ];
    Ok(Outcome::Pass(format!("embeddings, features, targets, head, index ({sizes:?} bytes)")))
}

fn mention_statistics() -> Check {
    let g = records::barcelona();
    let district_of = |canonical: &str| -> Result<String, String> {
        let p = g.place(g.position(canonical).ok_or(format!("unknown place {canonical}"))?);
        Ok(match p.kind {
            PlaceKind::District => p.canonical.clone(),
            PlaceKind::Neighborhood => p.parent.clone().ok_or(format!("{canonical} has no district"))?,
        })
    };
    let mut tables = 0;
    for (seed, lang) in [(109, LanguageLabel::En), (110, LanguageLabel::Es), (111, LanguageLabel::Ca)] {
        let fx = synth::mention_fixture(200, lang, seed);
        for (counting, planted) in
            [(MentionCounting::Occurrences, &fx.occurrences), (MentionCounting::PerPost, &fx.per_post)]
        {
            let mut by_district: BTreeMap<String, u64> = BTreeMap::new();
            for (place, &c) in planted {
                *by_district.entry(district_of(place)?).or_default() += c;
            }
            let total: u64 = by_district.values().sum();
            let d = district_mention_shares(&fx.posts, &g, counting).map_err(|e| e.to_string())?;
            ensure(d.rows.len() == 10, || format!("{} district rows", d.rows.len()))?;
            ensure(d.total == total, || format!("{lang:?}: district total {} want {total}", d.total))?;
            for row in &d.rows {
                let want = by_district.get(&row.place).copied().unwrap_or(0);
                ensure(row.count == want, || format!("{lang:?} {}: {} want {want}", row.place, row.count))?;
                let share = 100.0 * want as f64 / total as f64;
                ensure(row.share == share, || format!("{}: share {} want {share}", row.place, row.share))?;
            }
            let sum: f64 = d.rows.iter().map(|r| r.share).sum();
            ensure((sum - 100.0).abs() <= 1e-9, || format!("district shares sum to {sum}"))?;
            tables += 1;

            for row in &d.rows {
                let n = neighborhood_mention_shares(&fx.posts, &g, &row.place, counting).map_err(|e| e.to_string())?;
                let direct = planted.get(&row.place).copied().unwrap_or(0);
                ensure(n.district_direct == direct, || {
                    format!("{}: direct {} want {direct}", row.place, n.district_direct)
                })?;
                for nrow in &n.rows {
                    let want = planted.get(&nrow.place).copied().unwrap_or(0);
                    ensure(nrow.count == want, || format!("{}: {} want {want}", nrow.place, nrow.count))?;
                }
                ensure(n.district_total() == row.count, || {
                    format!(
                        "{}: neighborhoods {} + direct {} != district {}",
                        row.place, n.total, n.district_direct, row.count
                    )
                })?;
                if n.total > 0 {
                    let sum: f64 = n.rows.iter().map(|r| r.share).sum();
                    ensure((sum - 100.0).abs() <= 1e-9, || format!("{}: shares sum to {sum}", row.place))?;
                }
                tables += 1;
            }
        }
    }
    Ok(Outcome::Pass(format!("3 languages x 200 captions, {tables} share tables exact and rolled up")))
}

fn dataset_reproduction() -> Check {
    let Some(posts) = std::env::var_os(DATASET_VAR).map(PathBuf::from) else {
        return Ok(Outcome::Skip(format!("set {DATASET_VAR} to the published posts JSONL to run")));
    };
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut config = PipelineConfig::default();
    config.paths.posts = posts;
    config.paths.output = out.path().to_path_buf();
    let base = std::env::current_dir().map_err(|e| e.to_string())?;
    run_pipeline(&config, &base, RunOptions { force: true, until: Some(Stage::Stats) }).map_err(|e| e.to_string())?;

    let stats = out.path().join("stats");
    let mut by_lang: BTreeMap<String, Vec<(String, u64)>> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(stats.join("districts.csv")).map_err(|e| e.to_string())?;
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let count = row[4].parse::<u64>().map_err(|e| e.to_string())?;
        by_lang.entry(row[0].to_string()).or_default().push((row[2].to_string(), count));
    }
    let mut words: BTreeMap<String, usize> = BTreeMap::new();
    for row in csv::Reader::from_path(stats.join("words.csv")).map_err(|e| e.to_string())?.records() {
        *words.entry(row.map_err(|e| e.to_string())?[0].to_string()).or_default() += 1;
    }
    let mut summary = Vec::new();
    for lang in ["en", "es", "ca"] {
        let rows = by_lang.get_mut(lang).ok_or(format!("no {lang} district table"))?;
        ensure(rows.len() == 10, || format!("{lang}: {} districts", rows.len()))?;
        ensure(words.get(lang).copied().unwrap_or(0) > 0, || format!("{lang}: empty frequency table"))?;
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut top: Vec<&str> = rows[..2].iter().map(|r| r.0.as_str()).collect();
        top.sort_unstable();
        ensure(top == ["ciutat_vella", "eixample"], || format!("{lang}: top districts {top:?}"))?;
        summary.push(format!("{lang} {}/{}", rows[0].0, rows[1].0));
    }
    Ok(Outcome::Pass(format!("top two districts: {}", summary.join(", "))))
}
