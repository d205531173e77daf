//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geoembed_core::corpus::{CleanPost, CleaningOptions};
use geoembed_core::embedhead::{
    split_dataset, train_head, Dataset, EmbeddingHead, ImageFeatureStore, SplitSpec, TargetKind, TargetSet,
    TrainerConfig,
};
use geoembed_core::gazetteer::Gazetteer;
use geoembed_core::neighctx::{build_basis, build_basis_pruned, TargetOptions};
use geoembed_core::retrieval::{build_index, query_neighborhood, query_word, EmbeddingIndex};
use geoembed_core::textstats::{
    district_mention_shares, neighborhood_mention_shares, word_frequencies_per, MentionCounting,
};
use geoembed_core::word2vec::WordEmbeddings;

use crate::error::{Error, Result};
use crate::export;
use crate::features::{histogram_features, random_features};
use crate::formats::{self, basis_to_table, table_to_basis};
use crate::parallel::train_cbow_threads;
use crate::pipeline::{
    self, build_target_set, clean_posts_to_dir, feature_ids, merged_sentences, FarHalfReference, PipelineConfig,
    RunOptions, SplitFile, Stage,
};
use crate::records;
use crate::synth;

const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "geoembed", version, about = "Words, images and city neighborhoods from captioned photos")]
pub struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Re-run completed stages and overwrite existing files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a configuration with the default settings.
    InitConfig,
    /// Filter raw posts and split them by language.
    Clean(CleanArgs),
    /// Word frequency and place mention tables.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Train CBOW word embeddings on one language corpus.
    TrainW2v(TrainW2vArgs),
    /// Nearest words to a query word.
    Nearest(NearestArgs),
    /// Place-token vectors spanning the neighborhood space.
    BuildBasis(BuildBasisArgs),
    /// Caption targets for head training.
    BuildTargets(BuildTargetsArgs),
    /// Train, validation and retrieval id lists.
    Split(SplitArgs),
    /// Train an image embedding head with the ranking loss.
    TrainHead(TrainHeadArgs),
    /// Embed retrieval images with a trained head.
    BuildIndex(BuildIndexArgs),
    /// Query an index with a place or a word.
    Retrieve(RetrieveArgs),
    /// Run the full pipeline from a configuration file.
    Run(RunArgs),
    /// Toy image features: seeded random or color histograms.
    GenFeatures(GenFeaturesArgs),
    /// Write the bundled synthetic posts, features and a small config.
    GenFixture(GenFixtureArgs),
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub min_words: usize,
    #[arg(long, default_value_t = 50)]
    pub user_threshold: usize,
    /// Other-city names, one per line; defaults to the bundled list.
    #[arg(long)]
    pub city_list: Option<PathBuf>,
    /// Use each post's `lang` field instead of detection.
    #[arg(long)]
    pub trust_lang: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Most frequent non-stoplist words.
    Words(WordsArgs),
    /// District or neighborhood mention shares.
    Mentions(MentionsArgs),
}

#[derive(Debug, Args)]
pub struct WordsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Defaults to the bundled list for the corpus language.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub top: usize,
    /// Rates are per this many tokens.
    #[arg(long, default_value_t = 10_000.0)]
    pub unit: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Level {
    District,
    Neighborhood,
}

#[derive(Debug, Args)]
pub struct MentionsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub level: Level,
    /// District whose neighborhoods to report; all districts when omitted.
    #[arg(long)]
    pub district: Option<String>,
    /// Count a place at most once per post.
    #[arg(long)]
    pub per_post: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainW2vArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Aliases in the captions are merged into place tokens first.
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    #[arg(long, default_value_t = 25)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// More than one thread is faster but not reproducible.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NearestArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub query: String,
    #[arg(short, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct BuildBasisArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    /// Leave out places without a vector instead of failing.
    #[arg(long)]
    pub prune: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildTargetsArgs {
    /// `neighctx` or `w2v`.
    #[arg(long, value_parser = parse_kind)]
    pub kind: TargetKind,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Required for neighborhood targets.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    /// Count each distinct caption word once.
    #[arg(long)]
    pub unique_words: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Target file whose ids are split.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value_t = 0.80)]
    pub train: f64,
    #[arg(long, default_value_t = 0.05)]
    pub validation: f64,
    #[arg(long, default_value_t = 0.15)]
    pub retrieval: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FarHalfFrom {
    PositiveTarget,
    ImageEmbedding,
}

#[derive(Debug, Args)]
pub struct TrainHeadArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// `neighctx` or `w2v`.
    #[arg(long, value_parser = parse_kind)]
    pub target_kind: TargetKind,
    /// Basis the neighborhood targets were built on; binds the head's axes.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Split file; a fresh default split is drawn when omitted.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Cleaned corpus mapping post ids to image feature ids.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 0.4)]
    pub margin: f64,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 120)]
    pub batch: usize,
    /// Defaults to 100000 for neighborhood and 150000 for word targets.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub validation_interval: usize,
    #[arg(long, default_value_t = 1000)]
    pub validation_triples: usize,
    #[arg(long, default_value_t = 0.01)]
    pub init_std: f64,
    /// Score with the raw affine output instead of its unit vector.
    #[arg(long)]
    pub no_normalize_output: bool,
    #[arg(long, value_enum, default_value = "positive-target")]
    pub far_half_from: FarHalfFrom,
    /// Training curve CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub head: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Split file; its retrieval ids are indexed.
    #[arg(long)]
    pub split: PathBuf,
    /// Required for a neighborhood head.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("query").required(true).args(["query_place", "query_word"])))]
pub struct RetrieveArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Canonical place token.
    #[arg(long)]
    pub query_place: Option<String>,
    #[arg(long, requires = "model")]
    pub query_word: Option<String>,
    /// Word embeddings for word queries.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(short, default_value_t = 10)]
    pub k: usize,
    /// Results JSON; printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Stop after this stage.
    #[arg(long, value_parser = parse_stage)]
    pub until: Option<Stage>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["posts", "images"])))]
pub struct GenFeaturesArgs {
    /// Random features for every image id in these posts.
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// 64-bin color histograms of the PNG and JPEG files here.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenFixtureArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_kind(s: &str) -> std::result::Result<TargetKind, String> {
    TargetKind::parse(s).ok_or_else(|| format!("unknown target kind `{s}` (expected neighctx or w2v)"))
}

fn parse_stage(s: &str) -> std::result::Result<Stage, String> {
    s.parse()
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn gazetteer(path: Option<&Path>) -> Result<Gazetteer> {
    path.map_or_else(|| Ok(records::barcelona()), records::read_gazetteer)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(std::io::stdout(), "{text}").map_err(|e| Error::io("stdout", e))
}

fn load_corpus_map(path: Option<&Path>) -> Result<Option<BTreeMap<String, String>>> {
    path.map(|p| records::read_clean_corpus(p).map(|c| feature_ids(&c))).transpose()
}

fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::InitConfig => init_config(cli),
        Command::Clean(a) => {
            let other_cities = match &a.city_list {
                Some(p) => records::read_term_list(p)?,
                None => records::parse_term_list(records::OTHER_CITIES),
            };
            let options =
                CleaningOptions { min_caption_words: a.min_words, other_cities, trust_declared_language: a.trust_lang };
            let report = clean_posts_to_dir(&a.input, &options, a.user_threshold, &a.out_dir)?;
            print_json(&report)
        }
        Command::Stats(StatsCommand::Words(a)) => {
            let corpus = records::read_clean_corpus(&a.corpus)?;
            let first = corpus.first().ok_or_else(|| Error::format(&a.corpus, "corpus is empty"))?;
            let stoplist = match &a.stoplist {
                Some(p) => records::read_term_list(p)?,
                None => records::parse_term_list(records::bundled_stoplist(first.language).unwrap_or_default()),
            };
            let table = word_frequencies_per(&corpus, &stoplist, a.top, a.unit)?;
            export::write_frequency_csv(&a.out, &[table])
        }
        Command::Stats(StatsCommand::Mentions(a)) => stats_mentions(a),
        Command::TrainW2v(a) => {
            let corpus = records::read_clean_corpus(&a.corpus)?;
            let g = gazetteer(a.gazetteer.as_deref())?;
            let config = pipeline::Word2VecConfig {
                dim: a.dim,
                window: a.window,
                epochs: a.epochs,
                min_count: a.min_count,
                negatives: a.negatives,
                initial_lr: a.lr,
                subsample: a.subsample,
                threads: a.threads,
                ..Default::default()
            };
            let (emb, log) = train_cbow_threads(&merged_sentences(&corpus, &g), config.cbow(seed), a.threads)?;
            let emb = match corpus.first() {
                Some(p) => emb.with_language(p.language),
                None => emb,
            };
            formats::save(&a.out, &emb)?;
            log::info!("vocabulary {} words, final epoch loss {:?}", log.vocab_size, log.epoch_losses.last());
            Ok(())
        }
        Command::Nearest(a) => {
            let emb: WordEmbeddings = formats::load(&a.model)?;
            let mut out = std::io::stdout().lock();
            for (word, score) in emb.nearest_words(&a.query, a.k)? {
                writeln!(out, "{word}\t{score:.4}").map_err(|e| Error::io("stdout", e))?;
            }
            Ok(())
        }
        Command::BuildBasis(a) => {
            let emb: WordEmbeddings = formats::load(&a.model)?;
            let g = gazetteer(a.gazetteer.as_deref())?;
            let basis = if a.prune {
                let (basis, pruned) = build_basis_pruned(&emb, &g)?;
                if !pruned.is_empty() {
                    log::warn!("left out {} places: {}", pruned.len(), pruned.join(", "));
                }
                basis
            } else {
                build_basis(&emb, &g)?
            };
            formats::save(&a.out, &basis_to_table(&basis))
        }
        Command::BuildTargets(a) => {
            let corpus = records::read_clean_corpus(&a.corpus)?;
            let emb: WordEmbeddings = formats::load(&a.model)?;
            let g = gazetteer(a.gazetteer.as_deref())?;
            let basis = match (a.kind, &a.basis) {
                (TargetKind::NeighCtx, Some(p)) => Some(table_to_basis(&formats::load(p)?)?),
                (TargetKind::NeighCtx, None) => {
                    return Err(Error::Usage("--basis is required for neighctx targets".into()))
                }
                (TargetKind::Word, _) => None,
            };
            let options = TargetOptions { unique_words: a.unique_words };
            let (set, summary) = build_target_set(&corpus, &g, &emb, basis.as_ref(), options)?;
            formats::save(&a.out, &set)?;
            print_json(&summary)
        }
        Command::Split(a) => {
            let targets: TargetSet = formats::load(&a.targets)?;
            let spec = SplitSpec { train: a.train, validation: a.validation, retrieval: a.retrieval, seed };
            let s = split_dataset(targets.ids(), &spec)?;
            let file = SplitFile { seed, train: s.train, validation: s.validation, retrieval: s.retrieval };
            export::write_json(&a.out, &file)
        }
        Command::TrainHead(a) => train_head_command(a, seed),
        Command::BuildIndex(a) => {
            let head: EmbeddingHead = formats::load(&a.head)?;
            let store: ImageFeatureStore = formats::load(&a.features)?;
            let split: SplitFile = export::read_json(&a.split)?;
            let axes = match (head.kind, &a.basis) {
                (TargetKind::NeighCtx, Some(p)) => Some(table_to_basis(&formats::load(p)?)?.axes().clone()),
                (TargetKind::NeighCtx, None) => {
                    return Err(Error::Usage("--basis is required for a neighctx head".into()))
                }
                (TargetKind::Word, _) => None,
            };
            let map = load_corpus_map(a.corpus.as_deref())?;
            let index = build_index(&head, axes.as_ref(), &store, &split.retrieval, map.as_ref())?;
            formats::save(&a.out, &index)
        }
        Command::Retrieve(a) => {
            let index: EmbeddingIndex = formats::load(&a.index)?;
            let hits = match (&a.query_place, &a.query_word, &a.model) {
                (Some(place), _, _) => query_neighborhood(&index, place, a.k)?,
                (None, Some(word), Some(model)) => {
                    let emb: WordEmbeddings = formats::load(model)?;
                    query_word(&index, word, &emb, a.k)?
                }
                _ => return Err(Error::Usage("give --query-place, or --query-word with --model".into())),
            };
            let ranked = export::ranked(hits);
            match &a.out {
                Some(p) => export::write_json(p, &ranked),
                None => print_json(&ranked),
            }
        }
        Command::Run(a) => run_command(cli, a),
        Command::GenFeatures(a) => {
            let store = match (&a.posts, &a.images) {
                (Some(posts), _) => {
                    let (posts, _) = records::read_posts(posts)?;
                    let mut ids: Vec<String> = posts.iter().map(|p| p.image_feature_id.clone()).collect();
                    ids.sort();
                    ids.dedup();
                    random_features(&ids, a.dim, seed)?
                }
                (None, Some(dir)) => histogram_features(dir)?,
                (None, None) => return Err(Error::Usage("give --posts or --images".into())),
            };
            formats::save(&a.out, &store)
        }
        Command::GenFixture(a) => gen_fixture(&a.out_dir, seed, cli.force),
    }
}

fn init_config(cli: &Cli) -> Result<()> {
    let text = pipeline::init_config_text();
    match &cli.config {
        Some(path) => {
            if path.exists() && !cli.force {
                return Err(Error::Usage(format!("{} exists; pass --force to overwrite", path.display())));
            }
            fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        None => write!(std::io::stdout(), "{text}").map_err(|e| Error::io("stdout", e)),
    }
}

fn stats_mentions(a: &MentionsArgs) -> Result<()> {
    let corpus: Vec<CleanPost> = records::read_clean_corpus(&a.corpus)?;
    let g = gazetteer(a.gazetteer.as_deref())?;
    let counting = if a.per_post { MentionCounting::PerPost } else { MentionCounting::Occurrences };
    let tables = match (a.level, &a.district) {
        (Level::District, None) => vec![district_mention_shares(&corpus, &g, counting)?],
        (Level::District, Some(_)) => {
            return Err(Error::Usage("--district only applies to --level neighborhood".into()))
        }
        (Level::Neighborhood, Some(d)) => vec![neighborhood_mention_shares(&corpus, &g, d, counting)?],
        (Level::Neighborhood, None) => g
            .districts()
            .map(|d| neighborhood_mention_shares(&corpus, &g, &g.place(d).canonical, counting))
            .collect::<geoembed_core::Result<_>>()?,
    };
    export::write_shares_csv(&a.out, &tables)
}

fn train_head_command(a: &TrainHeadArgs, seed: u64) -> Result<()> {
    let store: ImageFeatureStore = formats::load(&a.features)?;
    let targets: TargetSet = formats::load(&a.targets)?;
    let axes_digest = match (a.target_kind, &a.basis) {
        (TargetKind::NeighCtx, Some(p)) => table_to_basis(&formats::load(p)?)?.axes().digest(),
        (TargetKind::NeighCtx, None) => return Err(Error::Usage("--basis is required for neighctx targets".into())),
        (TargetKind::Word, _) => 0,
    };
    let split = match &a.split {
        Some(p) => export::read_json::<SplitFile>(p)?,
        None => {
            let s = split_dataset(targets.ids(), &SplitSpec { seed, ..SplitSpec::default() })?;
            SplitFile { seed, train: s.train, validation: s.validation, retrieval: s.retrieval }
        }
    };
    let map = load_corpus_map(a.corpus.as_deref())?;
    let train = Dataset::assemble(&split.train, &store, &targets, map.as_ref())?;
    let validation = Dataset::assemble(&split.validation, &store, &targets, map.as_ref())?;
    let head_config = pipeline::HeadConfig {
        margin: a.margin,
        learning_rate: a.lr,
        momentum: a.momentum,
        weight_decay: a.weight_decay,
        batch_size: a.batch,
        validation_interval: a.validation_interval,
        validation_triples: a.validation_triples,
        normalize_output: !a.no_normalize_output,
        init_std: a.init_std,
        far_half_reference: match a.far_half_from {
            FarHalfFrom::PositiveTarget => FarHalfReference::PositiveTarget,
            FarHalfFrom::ImageEmbedding => FarHalfReference::ImageEmbedding,
        },
        ..Default::default()
    };
    let mut config: TrainerConfig = head_config.trainer(a.target_kind, seed);
    if let Some(iters) = a.iters {
        config.max_iterations = iters;
    }
    let mut trained = train_head(&train, &validation, &config)?;
    trained.head.axes_digest = axes_digest;
    formats::save(&a.out, &trained.head)?;
    if let Some(curve) = &a.curve {
        export::write_curve_csv(curve, &trained.curve)?;
    }
    log::info!("best validation accuracy {:.4} at iteration {}", trained.best_accuracy, trained.best_iteration);
    Ok(())
}

fn run_command(cli: &Cli, a: &RunArgs) -> Result<()> {
    let path = cli.config.clone().unwrap_or_else(|| PathBuf::from("geoembed.toml"));
    let mut config = PipelineConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let outcomes = pipeline::run_pipeline(&config, &base, RunOptions { force: cli.force, until: a.until })?;
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        let lang = o.report.language.as_deref().map(|l| format!("[{l}]")).unwrap_or_default();
        let status = if o.skipped { "skipped" } else { "done" };
        writeln!(out, "{}{lang}\t{status}\t{:.2}s", o.report.stage, o.report.wall_seconds)
            .map_err(|e| Error::io("stdout", e))?;
    }
    Ok(())
}

/// Writes `posts.jsonl`, `features.gfea` and `geoembed.toml`.
pub fn gen_fixture(dir: &Path, seed: u64, force: bool) -> Result<()> {
    let config_path = dir.join("geoembed.toml");
    if config_path.exists() && !force {
        return Err(Error::Usage(format!("{} exists; pass --force to overwrite", config_path.display())));
    }
    let fixture = synth::pipeline_fixture(seed)?;
    records::write_posts(dir.join("posts.jsonl"), &fixture.posts)?;
    formats::save(dir.join("features.gfea"), &fixture.features)?;
    let config = PipelineConfig { seed, ..PipelineConfig::desk_scale() };
    fs::write(&config_path, config.to_toml()).map_err(|e| Error::io(&config_path, e))
}
