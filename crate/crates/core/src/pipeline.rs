//! Config-driven runs behind the `lyrix` binary.
//!
//! One TOML file names the inputs and holds every module's settings; a
//! single global seed feeds all seeded stages through [`crate::seed`].
//! Command-line flags override the `seed` and `out_dir` keys.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, write_rejects, CleaningRules, Region, Song};
use crate::error::{Error, Result};
use crate::lexical::{lexical_features, load_word_set, FrequencyTable, LexicalConfig, LexicalFeatures};
use crate::phonetics::{DictSource, Dictionaries, PronouncingDictionary};
use crate::rhyme::{detect_rhymes, rhyme_positions, RhymeAnalysis, RhymeConfig, RhymePositions};
use crate::seed;
use crate::semantics::{
    coherence_cv, fit_lda, grid_search_k, topic_entropy, CoherenceReport, GridSearchResult, LdaConfig,
    DEFAULT_K_TOLERANCE, DEFAULT_TOP_N, DEFAULT_WINDOW,
};
use crate::sentiment::{profile_song, ArcConfig, SentimentLexicon, SentimentProfile};
use crate::stats::{
    contingency, correlation_matrix, kmeans_elbow, ols, pca, quadratic_optimum, temporal_folds_by_key,
    ContingencyTable, CorrelationMatrix, FeatureMatrix, FoldStratum, OlsFit, QuadraticOptimum, StratumMerge,
};
use crate::trends::{
    aggregate, bocpd, event_windows, month_label, standardize, BocpdConfig, ChangepointReport, EventTimeline,
    EventWindow, Granularity, Observation, TimeSeries,
};

pub const FEATURES_FILE: &str = "features.csv";

/// Identification columns at the start of `features.csv`.
pub const ID_COLUMNS: [&str; 6] = ["id", "artist", "year", "month", "region", "gender"];

/// Per-song feature columns, in file order. Topic columns `topic_0 ..`
/// follow, then the optional success metrics.
pub const FEATURE_COLUMNS: [&str; 18] = [
    "ttr_windowed",
    "vocab_size",
    "rare_word_rate",
    "mean_word_length",
    "mean_syllables_per_word",
    "slang_rate",
    "rhyme_density_pairs",
    "rhyme_density_syllables",
    "internal_rhymes_per_line",
    "multisyllabic_fraction",
    "end_rhyme_fraction",
    "rhyme_end_position_fraction",
    "rhyme_distributed_fraction",
    "sentiment_polarity",
    "sentiment_variability",
    "sentiment_coverage",
    "emotional_arc",
    "topic_entropy",
];

pub const SUCCESS_COLUMNS: [&str; 3] = ["chart_peak", "critic_score", "sales_units"];

/// Columns that hold labels rather than numbers.
const TEXT_COLUMNS: [&str; 5] = ["id", "artist", "region", "gender", "emotional_arc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub base_dictionary: PathBuf,
    pub slang_dictionary: Option<PathBuf>,
    pub slang_normalization: Option<PathBuf>,
    pub slang_lexicon: Option<PathBuf>,
    pub sentiment_lexicon: PathBuf,
    pub frequency_table: PathBuf,
    pub events: Option<PathBuf>,
}

impl Paths {
    fn entries(&self) -> Vec<(&'static str, &PathBuf)> {
        let mut v = vec![
            ("paths.corpus", &self.corpus),
            ("paths.base_dictionary", &self.base_dictionary),
            ("paths.sentiment_lexicon", &self.sentiment_lexicon),
            ("paths.frequency_table", &self.frequency_table),
        ];
        let optional = [
            ("paths.slang_dictionary", &self.slang_dictionary),
            ("paths.slang_normalization", &self.slang_normalization),
            ("paths.slang_lexicon", &self.slang_lexicon),
            ("paths.events", &self.events),
        ];
        v.extend(optional.into_iter().filter_map(|(k, p)| p.as_ref().map(|p| (k, p))));
        v
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.base_dictionary);
        fix(&mut self.sentiment_lexicon);
        fix(&mut self.frequency_table);
        for p in [
            &mut self.slang_dictionary,
            &mut self.slang_normalization,
            &mut self.slang_lexicon,
            &mut self.events,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSettings {
    pub top_n: usize,
    pub coherence_window: usize,
    /// When both are set, K is chosen by coherence grid search over the
    /// range and `lda.num_topics` is ignored.
    pub grid_k_min: Option<usize>,
    pub grid_k_max: Option<usize>,
    pub grid_tolerance: f64,
}

impl Default for TopicSettings {
    fn default() -> Self {
        TopicSettings {
            top_n: DEFAULT_TOP_N,
            coherence_window: DEFAULT_WINDOW,
            grid_k_min: None,
            grid_k_max: None,
            grid_tolerance: DEFAULT_K_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendSettings {
    pub granularities: Vec<Granularity>,
    /// z-score each series before changepoint detection.
    pub standardize: bool,
    /// Months on each side of an event.
    pub event_window: usize,
}

impl Default for TrendSettings {
    fn default() -> Self {
        TrendSettings {
            granularities: vec![Granularity::Yearly, Granularity::FiveYear],
            standardize: true,
            event_window: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Song,
    Artist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    pub response: String,
    pub predictors: Vec<String>,
    #[serde(default)]
    pub quadratic: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSettings {
    /// Rows are songs, or per-artist means.
    pub level: Level,
    pub features: Vec<String>,
    pub n_components: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub folds: usize,
    pub regressions: Vec<RegressionSpec>,
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings {
            level: Level::Song,
            features: [
                "ttr_windowed",
                "rare_word_rate",
                "mean_syllables_per_word",
                "rhyme_density_pairs",
                "multisyllabic_fraction",
                "internal_rhymes_per_line",
                "sentiment_polarity",
                "sentiment_variability",
                "topic_entropy",
            ]
            .map(String::from)
            .to_vec(),
            n_components: 4,
            k_min: 1,
            k_max: 8,
            folds: 5,
            regressions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub paths: Paths,
    #[serde(default)]
    pub rhyme: RhymeConfig,
    #[serde(default)]
    pub lexical: LexicalConfig,
    /// `lda.seed` is replaced by one derived from the global seed.
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub topics: TopicSettings,
    #[serde(default)]
    pub sentiment: ArcConfig,
    #[serde(default)]
    pub bocpd: BocpdConfig,
    #[serde(default)]
    pub trends: TrendSettings,
    #[serde(default)]
    pub stats: StatsSettings,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    /// Parses a TOML config. Relative paths, including `out_dir`, are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingPath {
                key: "--config".into(),
                path: path.to_path_buf(),
            });
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve(base);
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, path) in self.paths.entries() {
            if !path.exists() {
                return Err(Error::MissingPath {
                    key: key.into(),
                    path: path.clone(),
                });
            }
        }
        self.rhyme.validate()?;
        self.lda.validate()?;
        self.sentiment.validate()?;
        self.bocpd.validate()?;
        if self.lexical.ttr_window == 0 {
            return Err(Error::param("lexical.ttr_window must be >= 1"));
        }
        if !(self.lexical.rare_cutoff > 0.0 && self.lexical.rare_cutoff <= 1.0) {
            return Err(Error::param("lexical.rare_cutoff must be in (0, 1]"));
        }
        match (self.topics.grid_k_min, self.topics.grid_k_max) {
            (Some(a), Some(b)) if a >= 1 && a <= b => {}
            (None, None) => {}
            _ => return Err(Error::param("topics.grid_k_min/grid_k_max must both be set with 1 <= min <= max")),
        }
        if self.topics.top_n == 0 || self.topics.coherence_window == 0 {
            return Err(Error::param("topics.top_n and topics.coherence_window must be >= 1"));
        }
        if self.trends.granularities.is_empty() {
            return Err(Error::param("trends.granularities must not be empty"));
        }
        if self.trends.event_window < 2 {
            return Err(Error::param("trends.event_window must be >= 2"));
        }
        let s = &self.stats;
        if s.features.is_empty() || s.n_components == 0 {
            return Err(Error::param("stats.features must be nonempty and stats.n_components >= 1"));
        }
        if s.k_min < 1 || s.k_min > s.k_max {
            return Err(Error::param("stats.k_min must be in [1, k_max]"));
        }
        if s.folds < 2 {
            return Err(Error::param("stats.folds must be >= 2"));
        }
        Ok(())
    }

    fn lda_config(&self) -> LdaConfig {
        LdaConfig {
            seed: seed::derive(self.seed, "lda"),
            ..self.lda.clone()
        }
    }
}

/// Process exit code for an error: 2 missing path, 3 empty corpus,
/// 4 unknown feature, 5 constant column, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MissingPath { .. } => 2,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
        Error::EmptyCorpus(_) => 3,
        Error::UnknownFeature { .. } => 4,
        Error::ConstantColumn(_) => 5,
        Error::Fit { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn flush_csv(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Resources {
    rules: CleaningRules,
    dicts: Dictionaries,
    frequencies: FrequencyTable,
    slang: HashSet<String>,
    lexicon: SentimentLexicon,
}

impl Resources {
    fn load(paths: &Paths) -> Result<Self> {
        let rules = match &paths.slang_normalization {
            Some(p) => CleaningRules::from_tsv(p)?,
            None => CleaningRules::default(),
        };
        let (base, _) = PronouncingDictionary::parse_file(&paths.base_dictionary, DictSource::Base)?;
        let slang_dict = match &paths.slang_dictionary {
            Some(p) => PronouncingDictionary::parse_file(p, DictSource::Slang)?.0,
            None => PronouncingDictionary::empty(DictSource::Slang),
        };
        let slang = match &paths.slang_lexicon {
            Some(p) => load_word_set(p)?,
            None => HashSet::new(),
        };
        Ok(Resources {
            rules,
            dicts: Dictionaries::new(slang_dict, base),
            frequencies: FrequencyTable::from_tsv(&paths.frequency_table)?,
            slang,
            lexicon: SentimentLexicon::from_tsv(&paths.sentiment_lexicon)?,
        })
    }
}

/// Features of one song that do not depend on the rest of the corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SongFeatures {
    pub lexical: LexicalFeatures,
    pub rhyme: RhymeAnalysis,
    pub positions: RhymePositions,
    pub sentiment: SentimentProfile,
}

fn song_features(song: &Song, res: &Resources, cfg: &PipelineConfig) -> Result<SongFeatures> {
    let tokens = song.tokens();
    let rhyme = detect_rhymes(&song.lines, &res.dicts, &cfg.rhyme)?;
    let positions = rhyme_positions(&rhyme, &song.lines)?;
    Ok(SongFeatures {
        lexical: lexical_features(&tokens, &res.frequencies, &res.slang, &res.dicts, &cfg.lexical)?,
        rhyme,
        positions,
        sentiment: profile_song(&song.lines, &res.lexicon, &cfg.sentiment)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicReport {
    pub num_topics: usize,
    pub grid: Option<GridSearchResult>,
    pub coherence: CoherenceReport,
    pub trace_improved: bool,
    pub top_words: Vec<Vec<(String, f64)>>,
    pub log_likelihood_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturesOutput {
    pub features_path: PathBuf,
    pub songs: usize,
    pub rejects: usize,
    pub num_topics: usize,
}

/// Builds `features.csv`, `rejects.jsonl` and `topics.json` in the output
/// directory. Rows are ordered by song id.
pub fn run_features(cfg: &PipelineConfig) -> Result<FeaturesOutput> {
    cfg.validate()?;
    let res = Resources::load(&cfg.paths)?;
    let loaded = load_corpus(&cfg.paths.corpus, &res.rules)?;
    create_dir(&cfg.out_dir)?;
    let rejects_path = cfg.out_dir.join("rejects.jsonl");
    let f = File::create(&rejects_path).map_err(|e| Error::io(&rejects_path, e))?;
    write_rejects(BufWriter::new(f), &loaded.rejects).map_err(|e| Error::io(&rejects_path, e))?;
    if loaded.corpus.is_empty() {
        return Err(Error::EmptyCorpus(cfg.paths.corpus.clone()));
    }
    let mut songs = loaded.corpus.songs;
    songs.sort_by(|a, b| a.id.cmp(&b.id));

    let per_song: Vec<SongFeatures> = songs
        .par_iter()
        .map(|s| song_features(s, &res, cfg).map_err(|e| Error::Config(format!("song `{}`: {e}", s.id))))
        .collect::<Result<_>>()?;

    let docs: Vec<Vec<String>> = songs.iter().map(Song::tokens).collect();
    let mut lda = cfg.lda_config();
    let grid = match (cfg.topics.grid_k_min, cfg.topics.grid_k_max) {
        (Some(lo), Some(hi)) => {
            let g = grid_search_k(
                &docs,
                lo,
                hi,
                &lda,
                cfg.topics.top_n,
                cfg.topics.coherence_window,
                cfg.topics.grid_tolerance,
            )?;
            lda.num_topics = g.best_k;
            Some(g)
        }
        _ => None,
    };
    let model = fit_lda(&docs, &lda)?;
    let top_n = cfg.topics.top_n.min(model.vocabulary.len());
    let coherence = coherence_cv(&model, &docs, top_n, cfg.topics.coherence_window)?;
    let k = model.num_topics();
    write_json(
        &cfg.out_dir.join("topics.json"),
        &TopicReport {
            num_topics: k,
            grid,
            coherence,
            trace_improved: model.trace_improved(),
            top_words: (0..k).map(|t| model.top_words(t, top_n)).collect(),
            log_likelihood_trace: model.log_likelihood_trace.clone(),
        },
    )?;

    let path = cfg.out_dir.join(FEATURES_FILE);
    let mut w = csv_writer(&path)?;
    let mut header: Vec<String> = ID_COLUMNS.iter().chain(&FEATURE_COLUMNS).map(|s| s.to_string()).collect();
    header.extend((0..k).map(|t| format!("topic_{t}")));
    header.extend(SUCCESS_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for ((song, f), theta) in songs.iter().zip(&per_song).zip(&model.doc_topic) {
        let mut rec = vec![
            song.id.clone(),
            song.artist.clone(),
            song.year.to_string(),
            opt(song.month),
            song.region.to_string(),
            song.gender.to_string(),
        ];
        let l = &f.lexical;
        let r = &f.rhyme;
        let s = &f.sentiment;
        rec.extend([
            l.ttr_windowed.to_string(),
            l.vocab_size.to_string(),
            l.rare_word_rate.to_string(),
            l.mean_word_length.to_string(),
            l.mean_syllables_per_word.to_string(),
            l.slang_rate.to_string(),
            r.density_pairs.to_string(),
            r.density_syllables.to_string(),
            r.internal_per_line.to_string(),
            r.multisyllabic_fraction.to_string(),
            r.end_rhyme_fraction.to_string(),
            f.positions.end_fraction.to_string(),
            f.positions.distributed_fraction.to_string(),
            s.song_polarity.to_string(),
            s.variability.to_string(),
            s.coverage.to_string(),
            s.arc.as_str().to_string(),
            topic_entropy(theta)?.to_string(),
        ]);
        rec.extend(theta.iter().map(f64::to_string));
        rec.extend([opt(song.chart_peak), opt(song.critic_score), opt(song.sales_units)]);
        w.write_record(&rec)?;
    }
    flush_csv(w, &path)?;
    Ok(FeaturesOutput {
        features_path: path,
        songs: songs.len(),
        rejects: loaded.rejects.len(),
        num_topics: k,
    })
}

/// `features.csv` read back as strings, with typed column access.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FeatureTable {
    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingPath {
                key: FEATURES_FILE.into(),
                path: path.to_path_buf(),
            });
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(FeatureTable { columns, rows })
    }

    /// Columns that hold per-song numeric features (ids, dates and labels
    /// excluded).
    pub fn numeric_features(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| !TEXT_COLUMNS.contains(&c.as_str()) && *c != "year" && *c != "month")
            .cloned()
            .collect()
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::UnknownFeature {
            name: name.into(),
            available: self.numeric_features(),
        })
    }

    pub fn text(&self, name: &str) -> Result<Vec<&str>> {
        let j = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Parses a column; empty cells are `None`.
    pub fn numeric(&self, name: &str) -> Result<Vec<Option<f64>>> {
        if TEXT_COLUMNS.contains(&name) {
            return Err(Error::UnknownFeature {
                name: name.into(),
                available: self.numeric_features(),
            });
        }
        let j = self.index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[j].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                    path: PathBuf::from(FEATURES_FILE),
                    line_no: i + 2,
                    reason: format!("column `{name}`: `{cell}` is not a number"),
                })
            })
            .collect()
    }
}

fn read_or_build_features(cfg: &PipelineConfig) -> Result<FeatureTable> {
    let path = cfg.out_dir.join(FEATURES_FILE);
    if !path.exists() {
        run_features(cfg)?;
    }
    FeatureTable::read(&path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub series: TimeSeries,
    pub standardized: bool,
    /// `None` when the series has fewer than two periods.
    pub changepoints: Option<ChangepointReport>,
    pub changepoint_periods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRow {
    pub event: String,
    pub month: String,
    pub result: Option<EventWindow>,
    /// Why the window could not be computed.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendsReport {
    pub feature: String,
    pub series: Vec<SeriesReport>,
    pub events: Vec<EventRow>,
}

/// Aggregates one feature over time at every configured granularity, runs
/// changepoint detection on each series and compares monthly means around
/// each listed event. Writes `trends/<feature>.json` plus one plot-ready CSV
/// per granularity and `trends/<feature>_events.csv`.
pub fn run_trends(cfg: &PipelineConfig, feature: &str) -> Result<TrendsReport> {
    cfg.validate()?;
    let table = read_or_build_features(cfg)?;
    let values = table.numeric(feature)?;
    let ids = table.text("id")?;
    let years = table.numeric("year")?;
    let months = table.numeric("month")?;
    let observations: Vec<Observation> = (0..table.rows.len())
        .filter_map(|i| {
            Some(Observation {
                id: ids[i].to_string(),
                year: years[i]? as i32,
                month: months[i].map(|m| m as u8),
                value: values[i]?,
            })
        })
        .collect();

    let dir = cfg.out_dir.join("trends");
    create_dir(&dir)?;
    let mut series_reports = Vec::new();
    for &g in &cfg.trends.granularities {
        let series = aggregate(feature, &observations, g)?;
        let means = series.means();
        let input = if cfg.trends.standardize { standardize(&means) } else { means };
        let changepoints = if input.len() >= 2 { Some(bocpd(&input, &cfg.bocpd)?) } else { None };
        let changepoint_periods = changepoints
            .iter()
            .flat_map(|c| c.detections.iter().map(|d| series.points[d.index].label.clone()))
            .collect();

        let path = dir.join(format!("{feature}_{g}.csv"));
        let mut w = csv_writer(&path)?;
        w.write_record([
            "period_start",
            "label",
            "mean",
            "count",
            "std",
            "changepoint_probability",
            "detected",
        ])?;
        for (i, p) in series.points.iter().enumerate() {
            let (prob, hit) = match &changepoints {
                Some(c) => (
                    c.changepoint_probability[i].to_string(),
                    c.detections.iter().any(|d| d.index == i).to_string(),
                ),
                None => (String::new(), "false".into()),
            };
            w.write_record([
                p.period_start.to_string(),
                p.label.clone(),
                p.mean.to_string(),
                p.count.to_string(),
                p.std.to_string(),
                prob,
                hit,
            ])?;
        }
        flush_csv(w, &path)?;
        series_reports.push(SeriesReport {
            series,
            standardized: cfg.trends.standardize,
            changepoints,
            changepoint_periods,
        });
    }

    let mut events = Vec::new();
    if let Some(p) = &cfg.paths.events {
        let timeline = EventTimeline::from_csv(p)?;
        let monthly = aggregate(feature, &observations, Granularity::Monthly)?;
        for e in &timeline.events {
            let (result, skipped) = match event_windows(&monthly, &timeline, &e.name, cfg.trends.event_window) {
                Ok(w) => (Some(w), None),
                Err(err @ Error::Coverage { .. }) => (None, Some(err.to_string())),
                Err(err) => return Err(err),
            };
            events.push(EventRow {
                event: e.name.clone(),
                month: month_label(e.month),
                result,
                skipped,
            });
        }
    }
    let path = dir.join(format!("{feature}_events.csv"));
    let mut w = csv_writer(&path)?;
    w.write_record(["event", "month", "pre_n", "post_n", "pre_mean", "post_mean", "pct_change", "p_value", "skipped"])?;
    for e in &events {
        let r = e.result.as_ref();
        w.write_record([
            e.event.clone(),
            e.month.clone(),
            opt(r.map(|x| x.pre_n)),
            opt(r.map(|x| x.post_n)),
            opt(r.map(|x| x.pre_mean)),
            opt(r.map(|x| x.post_mean)),
            opt(r.and_then(|x| x.pct_change)),
            opt(r.map(|x| x.p_value)),
            e.skipped.clone().unwrap_or_default(),
        ])?;
    }
    flush_csv(w, &path)?;

    let report = TrendsReport {
        feature: feature.to_string(),
        series: series_reports,
        events,
    };
    write_json(&dir.join(format!("{feature}.json")), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaSummary {
    pub columns: Vec<String>,
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub cumulative_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub k: usize,
    pub elbow_curve: Vec<(usize, f64)>,
    pub inertia: f64,
    /// Centroids in z-score units.
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub region_table: ContingencyTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub spec: RegressionSpec,
    pub rows_used: usize,
    pub fit: OlsFit,
    pub optima: BTreeMap<String, QuadraticOptimum>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub merges: Vec<StratumMerge>,
    pub strata: Vec<(FoldStratum, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultivariateReport {
    pub level: Level,
    pub rows: usize,
    pub pca: PcaSummary,
    pub clusters: ClusterSummary,
    pub correlation: CorrelationMatrix,
    pub regressions: Vec<RegressionReport>,
    /// Song level only.
    pub folds: Option<FoldReport>,
}

/// Most frequent label (the smallest on ties).
fn mode<'a>(labels: impl Iterator<Item = &'a str>) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .map(|(l, _)| l.to_string())
        .unwrap_or_default()
}

/// Rows of the analysis: ids, regions and the named numeric columns. At
/// artist level each row is the mean over the artist's songs (cells that
/// are empty for every song stay empty) and the region is the artist's most
/// frequent one.
struct AnalysisRows {
    ids: Vec<String>,
    regions: Vec<String>,
    columns: BTreeMap<String, Vec<Option<f64>>>,
}

fn analysis_rows(table: &FeatureTable, names: &[String], level: Level) -> Result<AnalysisRows> {
    let mut columns = BTreeMap::new();
    for n in names {
        columns.insert(n.clone(), table.numeric(n)?);
    }
    let ids: Vec<String> = table.text("id")?.into_iter().map(String::from).collect();
    let regions: Vec<String> = table.text("region")?.into_iter().map(String::from).collect();
    if level == Level::Song {
        return Ok(AnalysisRows { ids, regions, columns });
    }
    let artists = table.text("artist")?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, a) in artists.iter().enumerate() {
        groups.entry(a).or_default().push(i);
    }
    let mean = |col: &[Option<f64>], idx: &[usize]| {
        let v: Vec<f64> = idx.iter().filter_map(|&i| col[i]).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(AnalysisRows {
        ids: groups.keys().map(|a| a.to_string()).collect(),
        regions: groups.values().map(|idx| mode(idx.iter().map(|&i| regions[i].as_str()))).collect(),
        columns: columns
            .iter()
            .map(|(n, col)| (n.clone(), groups.values().map(|idx| mean(col, idx)).collect()))
            .collect(),
    })
}

/// Builds a matrix over the rows where every named column is present.
fn complete_cases(rows: &AnalysisRows, names: &[&str]) -> Result<(FeatureMatrix, Vec<usize>)> {
    let keep: Vec<usize> = (0..rows.ids.len())
        .filter(|&i| names.iter().all(|n| rows.columns[*n][i].is_some()))
        .collect();
    let values = keep
        .iter()
        .map(|&i| names.iter().map(|n| rows.columns[*n][i].expect("complete")).collect())
        .collect();
    let m = FeatureMatrix::new(
        keep.iter().map(|&i| rows.ids[i].clone()).collect(),
        names.iter().map(|n| n.to_string()).collect(),
        values,
    )?;
    Ok((m, keep))
}

/// PCA, k-means with the elbow curve, the correlation matrix, configured
/// regressions, a cluster-by-region table and (at song level) the
/// stratified folds. Writes `multivariate.json`, `pca_projections.csv`,
/// `elbow.csv` and `clusters.csv`.
pub fn run_multivariate(cfg: &PipelineConfig) -> Result<MultivariateReport> {
    cfg.validate()?;
    let table = read_or_build_features(cfg)?;
    let s = &cfg.stats;
    let mut wanted: Vec<String> = s.features.clone();
    for r in &s.regressions {
        wanted.push(r.response.clone());
        wanted.extend(r.predictors.iter().cloned());
        wanted.extend(r.quadratic.iter().cloned());
    }
    wanted.sort();
    wanted.dedup();
    let rows = analysis_rows(&table, &wanted, s.level)?;
    let names: Vec<&str> = s.features.iter().map(String::as_str).collect();
    let (m, kept) = complete_cases(&rows, &names)?;
    if m.n_rows() < 2 {
        return Err(Error::Precondition(format!("{} complete rows; need at least 2", m.n_rows())));
    }
    let z = m.standardize()?;

    let n_components = s.n_components.min(m.n_cols());
    let p = pca(&m, n_components)?;
    let k_max = s.k_max.min(z.n_rows());
    let k_min = s.k_min.min(k_max);
    let clusters = kmeans_elbow(&z, k_min, k_max, seed::derive(cfg.seed, "kmeans"))?;
    let regions: Vec<&str> = kept.iter().map(|&i| rows.regions[i].as_str()).collect();
    let mut sizes = vec![0; clusters.k];
    for &c in &clusters.assignments {
        sizes[c] += 1;
    }
    let region_table = contingency(&clusters.assignments, &regions)?;
    let correlation = correlation_matrix(&m)?;

    let mut regressions = Vec::new();
    for spec in &s.regressions {
        let mut cols: Vec<&str> = vec![spec.response.as_str()];
        cols.extend(spec.predictors.iter().map(String::as_str));
        let (rm, _) = complete_cases(&rows, &cols)?;
        let y = rm.column(0);
        let x = rm.select(&cols[1..])?;
        let quad: Vec<&str> = spec.quadratic.iter().map(String::as_str).collect();
        let fit = ols(&y, &x, &quad)?;
        let optima = quad
            .iter()
            .filter_map(|q| quadratic_optimum(&fit, q).map(|o| (q.to_string(), o)))
            .collect();
        regressions.push(RegressionReport {
            spec: spec.clone(),
            rows_used: rm.n_rows(),
            fit,
            optima,
        });
    }

    let folds = if s.level == Level::Song {
        let years = table.numeric("year")?;
        let keys = kept
            .iter()
            .map(|&i| {
                let year = years[i].ok_or_else(|| Error::param(format!("row {i} has no year")))? as i32;
                let region: Region = rows.regions[i].parse().map_err(Error::Parameter)?;
                Ok(FoldStratum {
                    decade: year.div_euclid(10) * 10,
                    region,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if keys.len() >= s.folds {
            let f = temporal_folds_by_key(&keys, s.folds, seed::derive(cfg.seed, "folds"))?;
            let path = cfg.out_dir.join("folds.csv");
            let mut w = csv_writer(&path)?;
            w.write_record(["id", "fold"])?;
            for (id, fold) in m.row_ids.iter().zip(&f.folds) {
                w.write_record([id.clone(), fold.to_string()])?;
            }
            flush_csv(w, &path)?;
            Some(FoldReport {
                k: f.k,
                sizes: (0..f.k).map(|i| f.fold_members(i).len()).collect(),
                merges: f.merges,
                strata: f.strata,
            })
        } else {
            None
        }
    } else {
        None
    };

    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("pca_projections.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["id".to_string()];
    header.extend((1..=n_components).map(|c| format!("pc{c}")));
    header.push("cluster".into());
    w.write_record(&header)?;
    for (i, proj) in p.projections.iter().enumerate() {
        let mut rec = vec![m.row_ids[i].clone()];
        rec.extend(proj.iter().map(f64::to_string));
        rec.push(clusters.assignments[i].to_string());
        w.write_record(&rec)?;
    }
    flush_csv(w, &path)?;

    let path = cfg.out_dir.join("elbow.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["k", "inertia"])?;
    for (k, inertia) in &clusters.elbow_curve {
        w.write_record([k.to_string(), inertia.to_string()])?;
    }
    flush_csv(w, &path)?;

    let path = cfg.out_dir.join("clusters.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["id", "region", "cluster"])?;
    for (i, c) in clusters.assignments.iter().enumerate() {
        w.write_record([m.row_ids[i].clone(), regions[i].to_string(), c.to_string()])?;
    }
    flush_csv(w, &path)?;

    let report = MultivariateReport {
        level: s.level,
        rows: m.n_rows(),
        pca: PcaSummary {
            cumulative_ratio: p.explained_variance_ratio.iter().sum(),
            columns: p.columns,
            components: p.components,
            eigenvalues: p.eigenvalues,
            explained_variance_ratio: p.explained_variance_ratio,
        },
        clusters: ClusterSummary {
            k: clusters.k,
            elbow_curve: clusters.elbow_curve,
            inertia: clusters.inertia,
            centroids: clusters.centroids,
            sizes,
            region_table,
        },
        correlation,
        regressions,
        folds,
    };
    write_json(&cfg.out_dir.join("multivariate.json"), &report)?;
    Ok(report)
}
