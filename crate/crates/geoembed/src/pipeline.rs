//! Config-driven end-to-end runs with a JSON report per stage.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use geoembed_core::corpus::{
    build_user_blacklist, clean_corpus, CleanPost, CleaningOptions, CleaningRule, LanguageLabel,
};
use geoembed_core::embedhead::{
    split_dataset, train_head, Dataset, DistanceReference, EmbeddingHead, ImageFeatureStore, NegativePolicy, SplitSpec,
    TargetKind, TargetSet, TrainerConfig,
};
use geoembed_core::gazetteer::Gazetteer;
use geoembed_core::langid::StopwordDetector;
use geoembed_core::neighctx::{
    build_basis, build_basis_pruned, caption_nc, caption_w2v, NeighborhoodBasis, TargetOptions,
};
use geoembed_core::retrieval::{build_index, query_neighborhood, query_word, EmbeddingIndex};
use geoembed_core::text::TermSet;
use geoembed_core::textstats::{
    district_mention_shares, neighborhood_mention_shares, word_frequencies_per, MentionCounting,
};
use geoembed_core::word2vec::{CbowConfig, WordEmbeddings};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::export::{self, RankedHit};
use crate::formats::{self, basis_to_table, table_to_basis};
use crate::parallel::train_cbow_threads;
use crate::records::{self, IngestReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Subset of `en`, `es`, `ca`.
    pub languages: Vec<String>,
    pub paths: PathsConfig,
    pub clean: CleanConfig,
    pub stats: StatsConfig,
    pub word2vec: Word2VecConfig,
    pub targets: TargetsConfig,
    pub split: SplitConfig,
    pub head: HeadConfig,
    pub retrieval: RetrievalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 7,
            languages: vec!["en".into(), "es".into(), "ca".into()],
            paths: PathsConfig::default(),
            clean: CleanConfig::default(),
            stats: StatsConfig::default(),
            word2vec: Word2VecConfig::default(),
            targets: TargetsConfig::default(),
            split: SplitConfig::default(),
            head: HeadConfig::default(),
            retrieval: RetrievalConfig::default(),
        }
    }
}

/// Relative paths resolve against the config file's directory. Omitted
/// gazetteer, city list and stoplists fall back to the bundled Barcelona
/// data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub posts: PathBuf,
    pub features: PathBuf,
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gazetteer: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_cities: Option<PathBuf>,
    /// Language code to stoplist file.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub stoplists: BTreeMap<String, PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            posts: "posts.jsonl".into(),
            features: "features.gfea".into(),
            output: "out".into(),
            gazetteer: None,
            other_cities: None,
            stoplists: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleanConfig {
    pub min_words: usize,
    /// Users with strictly more posts than this are dropped.
    pub user_threshold: usize,
    pub trust_declared_language: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig { min_words: 3, user_threshold: 50, trust_declared_language: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsConfig {
    pub top: usize,
    /// Frequencies are reported per this many tokens.
    pub unit: f64,
    /// Count a place at most once per post instead of per occurrence.
    pub per_post: bool,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig { top: 30, unit: 10_000.0, per_post: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Word2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub noise_exponent: f64,
    pub initial_lr: f64,
    pub min_lr_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<f64>,
    /// More than one thread trains lock-free and is not bit-reproducible.
    pub threads: usize,
}

impl Default for Word2VecConfig {
    fn default() -> Self {
        let c = CbowConfig::default();
        Word2VecConfig {
            dim: c.dim,
            window: c.window,
            epochs: c.epochs,
            min_count: c.min_count,
            negatives: c.negatives,
            noise_exponent: c.noise_exponent,
            initial_lr: c.initial_lr,
            min_lr_fraction: c.min_lr_fraction,
            subsample: c.subsample,
            threads: 1,
        }
    }
}

impl Word2VecConfig {
    pub fn cbow(&self, seed: u64) -> CbowConfig {
        CbowConfig {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            min_count: self.min_count,
            negatives: self.negatives,
            noise_exponent: self.noise_exponent,
            initial_lr: self.initial_lr,
            min_lr_fraction: self.min_lr_fraction,
            subsample: self.subsample,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetsConfig {
    /// Any of `neighctx`, `word`.
    pub kinds: Vec<String>,
    pub unique_words: bool,
    /// Drop places without a word vector from the axes instead of failing.
    pub prune_missing_places: bool,
}

impl Default for TargetsConfig {
    fn default() -> Self {
        TargetsConfig { kinds: vec!["neighctx".into()], unique_words: false, prune_missing_places: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train: f64,
    pub validation: f64,
    pub retrieval: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let s = SplitSpec::default();
        SplitConfig { train: s.train, validation: s.validation, retrieval: s.retrieval }
    }
}

impl SplitConfig {
    pub fn spec(&self, seed: u64) -> SplitSpec {
        SplitSpec { train: self.train, validation: self.validation, retrieval: self.retrieval, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarHalfReference {
    PositiveTarget,
    ImageEmbedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub neighctx_iterations: usize,
    pub word_iterations: usize,
    pub validation_interval: usize,
    pub validation_triples: usize,
    pub normalize_output: bool,
    pub init_std: f64,
    /// What far-half negatives are measured from (neighborhood heads only).
    pub far_half_reference: FarHalfReference,
}

impl Default for HeadConfig {
    fn default() -> Self {
        let n = TrainerConfig::for_kind(TargetKind::NeighCtx);
        let w = TrainerConfig::for_kind(TargetKind::Word);
        HeadConfig {
            margin: n.margin,
            learning_rate: n.learning_rate,
            momentum: n.momentum,
            weight_decay: n.weight_decay,
            batch_size: n.batch_size,
            neighctx_iterations: n.max_iterations,
            word_iterations: w.max_iterations,
            validation_interval: n.validation_interval,
            validation_triples: n.validation_triples,
            normalize_output: n.normalize_output,
            init_std: n.init_std,
            far_half_reference: FarHalfReference::PositiveTarget,
        }
    }
}

impl HeadConfig {
    pub fn trainer(&self, kind: TargetKind, seed: u64) -> TrainerConfig {
        let (max_iterations, negative_policy) = match kind {
            TargetKind::NeighCtx => (
                self.neighctx_iterations,
                NegativePolicy::FarHalf(match self.far_half_reference {
                    FarHalfReference::PositiveTarget => DistanceReference::PositiveTarget,
                    FarHalfReference::ImageEmbedding => DistanceReference::ImageEmbedding,
                }),
            ),
            TargetKind::Word => (self.word_iterations, NegativePolicy::Uniform),
        };
        TrainerConfig {
            kind,
            margin: self.margin,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
            max_iterations,
            validation_interval: self.validation_interval,
            validation_triples: self.validation_triples,
            normalize_output: self.normalize_output,
            init_std: self.init_std,
            negative_policy,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrievalConfig {
    pub k: usize,
    /// Place queries; empty means every axis of the neighborhood space.
    pub places: Vec<String>,
    /// Word queries for word-space indexes.
    pub words: Vec<String>,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig { k: 10, places: Vec::new(), words: Vec::new() }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Small settings for the bundled synthetic fixture.
    pub fn desk_scale() -> Self {
        let mut c = PipelineConfig::default();
        c.word2vec.dim = 16;
        c.word2vec.window = 5;
        c.word2vec.epochs = 10;
        c.targets.kinds = vec!["neighctx".into(), "word".into()];
        c.head.batch_size = 16;
        c.head.neighctx_iterations = 300;
        c.head.word_iterations = 300;
        c.head.validation_interval = 50;
        c.head.validation_triples = 200;
        c.retrieval.k = 5;
        c.retrieval.words = vec!["beach".into(), "playa".into(), "platja".into()];
        c
    }

    pub fn language_labels(&self) -> Result<Vec<LanguageLabel>> {
        if self.languages.is_empty() {
            return Err(Error::Config("languages: at least one of en, es, ca is required".into()));
        }
        let mut seen = BTreeSet::new();
        self.languages
            .iter()
            .map(|code| {
                let l = LanguageLabel::from_code(code);
                if !l.is_kept() || l.code() != code {
                    return Err(Error::Config(format!("languages: `{code}` is not one of en, es, ca")));
                }
                if !seen.insert(l) {
                    return Err(Error::Config(format!("languages: `{code}` listed twice")));
                }
                Ok(l)
            })
            .collect()
    }

    pub fn target_kinds(&self) -> Result<Vec<TargetKind>> {
        if self.targets.kinds.is_empty() {
            return Err(Error::Config("targets.kinds: at least one of neighctx, word is required".into()));
        }
        let mut kinds = Vec::new();
        for k in &self.targets.kinds {
            let kind =
                TargetKind::parse(k).ok_or_else(|| Error::Config(format!("targets.kinds: unknown kind `{k}`")))?;
            if kinds.contains(&kind) {
                return Err(Error::Config(format!("targets.kinds: `{k}` listed twice")));
            }
            kinds.push(kind);
        }
        Ok(kinds)
    }

    /// Checks every parameter block without touching the file system.
    pub fn validate(&self) -> Result<()> {
        self.language_labels()?;
        let kinds = self.target_kinds()?;
        let block = |name: &str, r: geoembed_core::Result<()>| r.map_err(|e| Error::Config(format!("{name}: {e}")));
        block("word2vec", self.word2vec.cbow(self.seed).validate())?;
        block("split", self.split.spec(self.seed).validate())?;
        for kind in kinds {
            block("head", self.head.trainer(kind, self.seed).validate())?;
        }
        if self.clean.min_words == 0 || self.clean.user_threshold == 0 {
            return Err(Error::Config("clean: min_words and user_threshold must be at least 1".into()));
        }
        if self.stats.unit.is_nan() || self.stats.unit <= 0.0 {
            return Err(Error::Config("stats.unit must be positive".into()));
        }
        for code in self.paths.stoplists.keys() {
            if !LanguageLabel::from_code(code).is_kept() {
                return Err(Error::Config(format!("paths.stoplists: `{code}` is not one of en, es, ca")));
            }
        }
        Ok(())
    }
}

/// Text written by `init-config`.
pub fn init_config_text() -> String {
    format!(
        "# geoembed pipeline configuration. Relative paths resolve against this file.\n\
         # Optional: paths.gazetteer, paths.other_cities and paths.stoplists.<lang>\n\
         # replace the bundled Barcelona data; word2vec.subsample enables\n\
         # frequent-word subsampling.\n\n{}",
        PipelineConfig::default().to_toml()
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Clean,
    Stats,
    TrainW2v,
    BuildBasis,
    BuildTargets,
    Split,
    TrainHead,
    BuildIndex,
    Retrieve,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Clean,
        Stage::Stats,
        Stage::TrainW2v,
        Stage::BuildBasis,
        Stage::BuildTargets,
        Stage::Split,
        Stage::TrainHead,
        Stage::BuildIndex,
        Stage::Retrieve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Clean => "clean",
            Stage::Stats => "stats",
            Stage::TrainW2v => "train-w2v",
            Stage::BuildBasis => "build-basis",
            Stage::BuildTargets => "build-targets",
            Stage::Split => "split",
            Stage::TrainHead => "train-head",
            Stage::BuildIndex => "build-index",
            Stage::Retrieve => "retrieve",
        }
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageReport {
    pub stage: String,
    pub language: Option<String>,
    /// Digest of the effective configuration the stage ran with.
    pub config_digest: String,
    pub wall_seconds: f64,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<PathBuf>,
    pub metrics: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub report: StageReport,
    pub skipped: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub force: bool,
    /// Last stage to run.
    pub until: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanReportFile {
    pub lines: usize,
    pub malformed_lines: Vec<usize>,
    pub ingested: usize,
    pub blacklisted_users: usize,
    pub discarded: BTreeMap<String, usize>,
    pub kept: BTreeMap<String, usize>,
}

/// Reads raw posts, cleans them and writes `<lang>.jsonl` for en, es and ca
/// plus `report.json` into `out_dir`.
pub fn clean_posts_to_dir(
    input: &Path,
    options: &CleaningOptions,
    user_threshold: usize,
    out_dir: &Path,
) -> Result<CleanReportFile> {
    let (posts, ingest): (_, IngestReport) = records::read_posts(input)?;
    let blacklist = build_user_blacklist(&posts, user_threshold)?;
    let out = clean_corpus(&posts, &blacklist, options, &StopwordDetector::default())?;
    for lang in LanguageLabel::KEPT {
        records::write_clean_corpus(out_dir.join(format!("{}.jsonl", lang.code())), out.corpus(lang))?;
    }
    let report = CleanReportFile {
        lines: ingest.lines,
        malformed_lines: ingest.malformed,
        ingested: out.report.ingested,
        blacklisted_users: blacklist.len(),
        discarded: CleaningRule::ALL.iter().map(|&r| (r.name().into(), out.report.discarded_by(r))).collect(),
        kept: LanguageLabel::KEPT.iter().map(|&l| (l.code().into(), out.report.kept_in(l))).collect(),
    };
    export::write_json(out_dir.join("report.json"), &report)?;
    Ok(report)
}

/// Caption tokens with gazetteer aliases merged into canonical place tokens.
pub fn merged_sentences(corpus: &[CleanPost], g: &Gazetteer) -> Vec<Vec<String>> {
    corpus.iter().map(|p| g.merge_phrases(&p.tokens)).collect()
}

/// Post id to image feature id.
pub fn feature_ids(corpus: &[CleanPost]) -> BTreeMap<String, String> {
    corpus.iter().map(|p| (p.post.post_id.clone(), p.post.image_feature_id.clone())).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub built: usize,
    /// Captions with no known token or a zero sum.
    pub unusable: usize,
    pub tokens: usize,
    pub oov_tokens: usize,
}

/// Neighborhood-context targets when `basis` is given, otherwise mean word
/// vectors. Unusable captions are counted and left out.
pub fn build_target_set(
    corpus: &[CleanPost],
    g: &Gazetteer,
    emb: &WordEmbeddings,
    basis: Option<&NeighborhoodBasis>,
    options: TargetOptions,
) -> Result<(TargetSet, TargetSummary)> {
    let mut set = TargetSet::new(basis.map_or(emb.dim(), NeighborhoodBasis::len));
    let mut summary = TargetSummary::default();
    for post in corpus {
        let tokens = g.merge_phrases(&post.tokens);
        let id = &post.post.post_id;
        let target = match basis {
            Some(b) => caption_nc(id, &tokens, emb, b, options),
            None => caption_w2v(id, &tokens, emb, options),
        };
        match target {
            Ok(t) => {
                summary.built += 1;
                summary.tokens += tokens.len();
                summary.oov_tokens += t.oov_tokens;
                set.insert(id.clone(), &t.vector)?;
            }
            Err(geoembed_core::Error::NoKnownTokens | geoembed_core::Error::ZeroVector) => {
                summary.unusable += 1;
                summary.tokens += tokens.len();
                summary.oov_tokens += tokens.len();
            }
            Err(e) => return Err(e.into()),
        }
    }
    if summary.unusable > 0 {
        log::warn!("{} captions have no usable target", summary.unusable);
    }
    Ok((set, summary))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFile {
    pub seed: u64,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub retrieval: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryResult {
    pub query: String,
    pub results: Vec<RankedHit>,
}

struct Paths {
    posts: PathBuf,
    features: PathBuf,
    output: PathBuf,
    gazetteer: Option<PathBuf>,
    other_cities: Option<PathBuf>,
    stoplists: BTreeMap<String, PathBuf>,
}

impl Paths {
    fn resolve(p: &PathsConfig, base: &Path) -> Self {
        let r = |x: &Path| if x.is_absolute() { x.to_path_buf() } else { base.join(x) };
        Paths {
            posts: r(&p.posts),
            features: r(&p.features),
            output: r(&p.output),
            gazetteer: p.gazetteer.as_deref().map(r),
            other_cities: p.other_cities.as_deref().map(r),
            stoplists: p.stoplists.iter().map(|(k, v)| (k.clone(), r(v))).collect(),
        }
    }

    fn corpus(&self, lang: LanguageLabel) -> PathBuf {
        self.output.join("corpus").join(format!("{}.jsonl", lang.code()))
    }

    fn lang(&self, lang: LanguageLabel, file: &str) -> PathBuf {
        self.output.join(lang.code()).join(file)
    }
}

struct Output {
    artifacts: Vec<PathBuf>,
    metrics: Map<String, Value>,
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    paths: Paths,
    gazetteer: Gazetteer,
    other_cities: TermSet,
    stoplists: BTreeMap<LanguageLabel, TermSet>,
    kinds: Vec<TargetKind>,
    digest: String,
    options: RunOptions,
    outcomes: Vec<StageOutcome>,
}

impl Runner<'_> {
    fn report_path(&self, stage: Stage, lang: Option<LanguageLabel>) -> PathBuf {
        let dir = self.paths.output.join("reports");
        match lang {
            Some(l) => dir.join(l.code()).join(format!("{}.json", stage.name())),
            None => dir.join(format!("{}.json", stage.name())),
        }
    }

    fn wanted(&self, stage: Stage) -> bool {
        self.options.until.is_none_or(|u| stage <= u)
    }

    /// Runs `body` unless an up-to-date report exists. `dirty` records that
    /// an upstream stage ran, which forces the rest to run too.
    fn stage(
        &mut self,
        stage: Stage,
        lang: Option<LanguageLabel>,
        dirty: &mut bool,
        body: impl FnOnce(&Self) -> Result<Output>,
    ) -> Result<()> {
        if !self.wanted(stage) {
            return Ok(());
        }
        let label = match lang {
            Some(l) => format!("{}[{}]", stage.name(), l.code()),
            None => stage.name().to_string(),
        };
        let report_path = self.report_path(stage, lang);
        if !self.options.force && !*dirty {
            if let Ok(report) = export::read_json::<StageReport>(&report_path) {
                let complete = report.artifacts.iter().all(|a| self.paths.output.join(a).is_file());
                if report.config_digest == self.digest && complete {
                    log::info!("{label}: up to date, skipped");
                    self.outcomes.push(StageOutcome { report, skipped: true });
                    return Ok(());
                }
            }
        }
        log::info!("{label}: running");
        let start = Instant::now();
        let output = body(self).map_err(|e| Error::Stage { stage: label.clone(), source: Box::new(e) })?;
        let artifacts =
            output.artifacts.iter().map(|a| a.strip_prefix(&self.paths.output).unwrap_or(a).to_path_buf()).collect();
        let report = StageReport {
            stage: stage.name().into(),
            language: lang.map(|l| l.code().into()),
            config_digest: self.digest.clone(),
            wall_seconds: start.elapsed().as_secs_f64(),
            artifacts,
            metrics: output.metrics,
        };
        export::write_json(&report_path, &report).map_err(|e| Error::Stage { stage: label, source: Box::new(e) })?;
        *dirty = true;
        self.outcomes.push(StageOutcome { report, skipped: false });
        Ok(())
    }

    fn corpus(&self, lang: LanguageLabel) -> Result<Vec<CleanPost>> {
        records::read_clean_corpus(self.paths.corpus(lang))
    }

    fn clean(&self) -> Result<Output> {
        let options = CleaningOptions {
            min_caption_words: self.config.clean.min_words,
            other_cities: self.other_cities.clone(),
            trust_declared_language: self.config.clean.trust_declared_language,
        };
        let dir = self.paths.output.join("corpus");
        let report = clean_posts_to_dir(&self.paths.posts, &options, self.config.clean.user_threshold, &dir)?;
        let mut artifacts: Vec<PathBuf> = LanguageLabel::KEPT.iter().map(|&l| self.paths.corpus(l)).collect();
        artifacts.push(dir.join("report.json"));
        let metrics = match serde_json::to_value(&report).expect("report serializes") {
            Value::Object(m) => m,
            _ => unreachable!("report is a struct"),
        };
        Ok(Output { artifacts, metrics })
    }

    fn stats(&self, languages: &[LanguageLabel]) -> Result<Output> {
        let counting = if self.config.stats.per_post { MentionCounting::PerPost } else { MentionCounting::Occurrences };
        let g = &self.gazetteer;
        let (mut words, mut districts, mut neighborhoods) = (Vec::new(), Vec::new(), Vec::new());
        let mut metrics = Map::new();
        for &lang in languages {
            let corpus = self.corpus(lang)?;
            if corpus.is_empty() {
                log::warn!("stats: no {lang} posts");
                metrics.insert(lang.code().into(), json!({ "posts": 0 }));
                continue;
            }
            words.push(word_frequencies_per(
                &corpus,
                &self.stoplists[&lang],
                self.config.stats.top,
                self.config.stats.unit,
            )?);
            let d = district_mention_shares(&corpus, g, counting)?;
            let top: Vec<&str> = {
                let mut rows: Vec<_> = d.rows.iter().collect();
                rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.place.cmp(&b.place)));
                rows.iter().take(3).map(|r| r.place.as_str()).collect()
            };
            metrics.insert(
                lang.code().into(),
                json!({ "posts": corpus.len(), "district_mentions": d.total, "top_districts": top }),
            );
            districts.push(d);
            for district in g.districts() {
                neighborhoods.push(neighborhood_mention_shares(&corpus, g, &g.place(district).canonical, counting)?);
            }
        }
        let dir = self.paths.output.join("stats");
        let artifacts = vec![dir.join("words.csv"), dir.join("districts.csv"), dir.join("neighborhoods.csv")];
        export::write_frequency_csv(&artifacts[0], &words)?;
        export::write_shares_csv(&artifacts[1], &districts)?;
        export::write_shares_csv(&artifacts[2], &neighborhoods)?;
        Ok(Output { artifacts, metrics })
    }

    fn train_w2v(&self, lang: LanguageLabel) -> Result<Output> {
        let sentences = merged_sentences(&self.corpus(lang)?, &self.gazetteer);
        let cbow = self.config.word2vec.cbow(self.config.seed);
        let (emb, log) = train_cbow_threads(&sentences, cbow, self.config.word2vec.threads)?;
        let emb = emb.with_language(lang);
        let path = self.paths.lang(lang, "w2v.gemb");
        formats::save(&path, &emb)?;
        let places = self.gazetteer.places().iter().filter(|p| emb.vector(&p.canonical).is_some()).count();
        let metrics = json!({
            "vocab_size": log.vocab_size,
            "training_tokens": log.training_tokens,
            "epoch_losses": log.epoch_losses,
            "places_in_vocab": places,
        });
        Ok(Output { artifacts: vec![path], metrics: object(metrics) })
    }

    fn build_basis(&self, lang: LanguageLabel) -> Result<Output> {
        let emb: WordEmbeddings = formats::load(self.paths.lang(lang, "w2v.gemb"))?;
        let (basis, pruned) = if self.config.targets.prune_missing_places {
            build_basis_pruned(&emb, &self.gazetteer)?
        } else {
            (build_basis(&emb, &self.gazetteer)?, Vec::new())
        };
        if !pruned.is_empty() {
            log::warn!("{lang}: {} places without a vector left out of the axes", pruned.len());
        }
        let path = self.paths.lang(lang, "basis.gncx");
        formats::save(&path, &basis_to_table(&basis))?;
        let metrics = json!({ "axes": basis.len(), "pruned": pruned });
        Ok(Output { artifacts: vec![path], metrics: object(metrics) })
    }

    fn basis(&self, lang: LanguageLabel) -> Result<NeighborhoodBasis> {
        table_to_basis(&formats::load::<TargetSet>(self.paths.lang(lang, "basis.gncx"))?)
    }

    fn build_targets(&self, lang: LanguageLabel) -> Result<Output> {
        let corpus = self.corpus(lang)?;
        let emb: WordEmbeddings = formats::load(self.paths.lang(lang, "w2v.gemb"))?;
        let options = TargetOptions { unique_words: self.config.targets.unique_words };
        let mut artifacts = Vec::new();
        let mut metrics = Map::new();
        for &kind in &self.kinds {
            let basis = match kind {
                TargetKind::NeighCtx => Some(self.basis(lang)?),
                TargetKind::Word => None,
            };
            let (set, summary) = build_target_set(&corpus, &self.gazetteer, &emb, basis.as_ref(), options)?;
            let path = self.paths.lang(lang, &format!("targets_{}.gncx", kind.name()));
            formats::save(&path, &set)?;
            artifacts.push(path);
            metrics.insert(kind.name().into(), serde_json::to_value(summary).expect("summary serializes"));
        }
        Ok(Output { artifacts, metrics })
    }

    fn targets(&self, lang: LanguageLabel, kind: TargetKind) -> Result<TargetSet> {
        formats::load(self.paths.lang(lang, &format!("targets_{}.gncx", kind.name())))
    }

    fn split(&self, lang: LanguageLabel) -> Result<Output> {
        let mut ids: Option<BTreeSet<String>> = None;
        for &kind in &self.kinds {
            let these: BTreeSet<String> = self.targets(lang, kind)?.ids().iter().cloned().collect();
            ids = Some(match ids {
                None => these,
                Some(prev) => prev.intersection(&these).cloned().collect(),
            });
        }
        let ids: Vec<String> = ids.unwrap_or_default().into_iter().collect();
        let s = split_dataset(&ids, &self.config.split.spec(self.config.seed))?;
        let file =
            SplitFile { seed: self.config.seed, train: s.train, validation: s.validation, retrieval: s.retrieval };
        let path = self.paths.lang(lang, "split.json");
        export::write_json(&path, &file)?;
        let metrics = json!({
            "train": file.train.len(),
            "validation": file.validation.len(),
            "retrieval": file.retrieval.len(),
        });
        Ok(Output { artifacts: vec![path], metrics: object(metrics) })
    }

    fn train_head(&self, lang: LanguageLabel, store: &ImageFeatureStore) -> Result<Output> {
        let split: SplitFile = export::read_json(self.paths.lang(lang, "split.json"))?;
        let map = feature_ids(&self.corpus(lang)?);
        let mut artifacts = Vec::new();
        let mut metrics = Map::new();
        for &kind in &self.kinds {
            let targets = self.targets(lang, kind)?;
            let train = Dataset::assemble(&split.train, store, &targets, Some(&map))?;
            let validation = Dataset::assemble(&split.validation, store, &targets, Some(&map))?;
            let config = self.config.head.trainer(kind, self.config.seed);
            let mut trained = train_head(&train, &validation, &config)?;
            if kind == TargetKind::NeighCtx {
                trained.head.axes_digest = self.basis(lang)?.axes().digest();
            }
            let name = kind.name();
            let head_path = self.paths.lang(lang, &format!("head_{name}.ghed"));
            let curve_path = self.paths.lang(lang, &format!("curve_{name}.csv"));
            formats::save(&head_path, &trained.head)?;
            export::write_curve_csv(&curve_path, &trained.curve)?;
            artifacts.extend([head_path, curve_path]);
            metrics.insert(
                name.into(),
                json!({
                    "best_iteration": trained.best_iteration,
                    "best_validation_accuracy": trained.best_accuracy,
                    "final_train_loss": trained.curve.last().map(|p| p.train_loss),
                }),
            );
        }
        Ok(Output { artifacts, metrics })
    }

    fn build_index(&self, lang: LanguageLabel, store: &ImageFeatureStore) -> Result<Output> {
        let split: SplitFile = export::read_json(self.paths.lang(lang, "split.json"))?;
        let map = feature_ids(&self.corpus(lang)?);
        let mut artifacts = Vec::new();
        let mut metrics = Map::new();
        for &kind in &self.kinds {
            let name = kind.name();
            let head: EmbeddingHead = formats::load(self.paths.lang(lang, &format!("head_{name}.ghed")))?;
            let axes = match kind {
                TargetKind::NeighCtx => Some(self.basis(lang)?.axes().clone()),
                TargetKind::Word => None,
            };
            let index = build_index(&head, axes.as_ref(), store, &split.retrieval, Some(&map))?;
            let path = self.paths.lang(lang, &format!("index_{name}.gidx"));
            formats::save(&path, &index)?;
            artifacts.push(path);
            metrics.insert(name.into(), json!({ "rows": index.len() }));
        }
        Ok(Output { artifacts, metrics })
    }

    fn retrieve(&self, lang: LanguageLabel) -> Result<Output> {
        let k = self.config.retrieval.k;
        let mut artifacts = Vec::new();
        let mut metrics = Map::new();
        for &kind in &self.kinds {
            let name = kind.name();
            let index: EmbeddingIndex = formats::load(self.paths.lang(lang, &format!("index_{name}.gidx")))?;
            let mut results = Vec::new();
            let mut skipped = Vec::new();
            match kind {
                TargetKind::NeighCtx => {
                    let basis = self.basis(lang)?;
                    let places: Vec<String> = if self.config.retrieval.places.is_empty() {
                        basis.axes().labels().to_vec()
                    } else {
                        self.config.retrieval.places.clone()
                    };
                    for place in places {
                        if basis.axes().position(&place).is_none() {
                            skipped.push(place);
                            continue;
                        }
                        let hits = query_neighborhood(&index, &place, k)?;
                        results.push(QueryResult { query: place, results: export::ranked(hits) });
                    }
                }
                TargetKind::Word => {
                    let emb: WordEmbeddings = formats::load(self.paths.lang(lang, "w2v.gemb"))?;
                    for word in &self.config.retrieval.words {
                        match query_word(&index, word, &emb, k) {
                            Ok(hits) => {
                                results.push(QueryResult { query: word.clone(), results: export::ranked(hits) })
                            }
                            Err(geoembed_core::Error::OutOfVocabulary(_)) => skipped.push(word.clone()),
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
            }
            if !skipped.is_empty() {
                log::warn!("{lang} {name}: skipped queries not in this space: {}", skipped.join(", "));
            }
            let path = self.paths.lang(lang, &format!("retrieval_{name}.json"));
            export::write_json(&path, &results)?;
            artifacts.push(path);
            metrics.insert(name.into(), json!({ "queries": results.len(), "skipped": skipped }));
        }
        Ok(Output { artifacts, metrics })
    }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn require_file(what: &str, path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what}: {} does not exist", path.display())))
    }
}

/// Runs every stage in order for each configured language. Configuration
/// and input files are checked before the first stage starts.
pub fn run_pipeline(config: &PipelineConfig, base_dir: &Path, options: RunOptions) -> Result<Vec<StageOutcome>> {
    config.validate()?;
    let languages = config.language_labels()?;
    let kinds = config.target_kinds()?;
    let paths = Paths::resolve(&config.paths, base_dir);

    require_file("paths.posts", &paths.posts)?;
    if options.until.is_none_or(|u| u >= Stage::TrainHead) {
        require_file("paths.features", &paths.features)?;
    }
    let gazetteer = match &paths.gazetteer {
        Some(p) => {
            require_file("paths.gazetteer", p)?;
            records::read_gazetteer(p)?
        }
        None => records::barcelona(),
    };
    let other_cities = match &paths.other_cities {
        Some(p) => {
            require_file("paths.other_cities", p)?;
            records::read_term_list(p)?
        }
        None => records::parse_term_list(records::OTHER_CITIES),
    };
    let mut stoplists = BTreeMap::new();
    for &lang in &languages {
        let list = match paths.stoplists.get(lang.code()) {
            Some(p) => {
                require_file(&format!("paths.stoplists.{}", lang.code()), p)?;
                records::read_term_list(p)?
            }
            None => records::parse_term_list(records::bundled_stoplist(lang).unwrap_or_default()),
        };
        stoplists.insert(lang, list);
    }

    let digest = format!("{:016x}", geoembed_core::fnv1a64(config.to_toml().as_bytes()));
    let mut runner =
        Runner { config, paths, gazetteer, other_cities, stoplists, kinds, digest, options, outcomes: Vec::new() };

    let mut dirty = false;
    runner.stage(Stage::Clean, None, &mut dirty, Runner::clean)?;
    runner.stage(Stage::Stats, None, &mut dirty, |r| r.stats(&languages))?;
    let needs_features = runner.wanted(Stage::TrainHead);
    let store: Option<ImageFeatureStore> = if needs_features {
        Some(
            formats::load(&runner.paths.features)
                .map_err(|e| Error::Stage { stage: "load-features".into(), source: Box::new(e) })?,
        )
    } else {
        None
    };
    for &lang in &languages {
        let mut lang_dirty = dirty;
        let d = &mut lang_dirty;
        runner.stage(Stage::TrainW2v, Some(lang), d, |r| r.train_w2v(lang))?;
        runner.stage(Stage::BuildBasis, Some(lang), d, |r| r.build_basis(lang))?;
        runner.stage(Stage::BuildTargets, Some(lang), d, |r| r.build_targets(lang))?;
        runner.stage(Stage::Split, Some(lang), d, |r| r.split(lang))?;
        if let Some(store) = &store {
            runner.stage(Stage::TrainHead, Some(lang), d, |r| r.train_head(lang, store))?;
            runner.stage(Stage::BuildIndex, Some(lang), d, |r| r.build_index(lang, store))?;
            runner.stage(Stage::Retrieve, Some(lang), d, |r| r.retrieve(lang))?;
        }
    }
    Ok(runner.outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(PipelineConfig::from_toml(&init_config_text()).unwrap(), c);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), c);
    }

    #[test]
    fn defaults_are_the_published_settings() {
        let c = PipelineConfig::default();
        assert_eq!((c.word2vec.dim, c.word2vec.window, c.word2vec.epochs), (300, 8, 25));
        let h = &c.head;
        assert_eq!((h.margin, h.learning_rate, h.momentum, h.weight_decay, h.batch_size), (0.4, 0.001, 0.9, 2e-4, 120));
        assert_eq!((c.split.train, c.split.validation, c.split.retrieval), (0.80, 0.05, 0.15));
        assert_eq!((h.neighctx_iterations, h.word_iterations), (100_000, 150_000));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(PipelineConfig::from_toml("[head]\nmargn = 0.4\n").is_err());
        let c = PipelineConfig { languages: vec!["fr".into()], ..Default::default() };
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.head.batch_size = 1;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.targets.kinds = vec!["neighctx".into(), "neighctx".into()];
        assert!(c.validate().is_err());
    }

    #[test]
    fn stage_names_parse_back() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("train".parse::<Stage>().is_err());
    }
}
