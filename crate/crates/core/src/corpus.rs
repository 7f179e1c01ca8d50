//! Corpus loading, cleaning, stratification and weighted sampling.
//!
//! The on-disk corpus is JSONL, one song per line:
//!
//! ```text
//! {"id":"s1","artist":"A","title":"T","year":1994,"region":"east","gender":"male","lyrics":"..."}
//! ```
//!
//! Optional keys: `chart_peak`, `critic_score`, `sales_units` and `month`
//! (1-12, used for monthly time series). Records that fail validation are
//! collected as [`Reject`]s instead of aborting the load.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

pub const MIN_YEAR: i32 = 1970;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    #[serde(rename = "east")]
    EastCoast,
    #[serde(rename = "west")]
    WestCoast,
    #[serde(rename = "south")]
    Southern,
    Midwest,
    #[serde(rename = "intl")]
    International,
}

impl Region {
    pub const ALL: [Region; 5] = [
        Region::EastCoast,
        Region::WestCoast,
        Region::Southern,
        Region::Midwest,
        Region::International,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::EastCoast => "east",
            Region::WestCoast => "west",
            Region::Southern => "south",
            Region::Midwest => "midwest",
            Region::International => "intl",
        }
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown region `{s}` (expected east|west|south|midwest|intl)"))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
    Other,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Other => "other",
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            "other" | "unknown" => Ok(Gender::Other),
            _ => Err(format!(
                "unknown gender `{s}` (expected female|male|other|unknown)"
            )),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One cleaned song admitted to analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Song {
    pub id: String,
    pub artist: String,
    pub title: String,
    pub year: i32,
    pub month: Option<u8>,
    pub region: Region,
    pub gender: Gender,
    pub raw_lyrics: String,
    pub lines: Vec<String>,
    pub chart_peak: Option<u32>,
    pub critic_score: Option<f64>,
    pub sales_units: Option<f64>,
}

impl Song {
    pub fn decade(&self) -> i32 {
        self.year.div_euclid(10) * 10
    }

    pub fn tokens(&self) -> Vec<String> {
        text::tokens(&self.lines)
    }
}

/// Stratum key used for corpus balancing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Stratum {
    pub region: Region,
    pub decade: i32,
    pub gender: Gender,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub songs: Vec<Song>,
    pub strata_summary: BTreeMap<Stratum, usize>,
}

impl Corpus {
    pub fn new(songs: Vec<Song>) -> Self {
        let strata_summary = stratify(&songs);
        Corpus {
            songs,
            strata_summary,
        }
    }

    pub fn len(&self) -> usize {
        self.songs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.songs.is_empty()
    }
}

/// A record that was not admitted, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_no: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
    /// Number of non-blank lines seen in the input.
    pub records: usize,
}

/// Text cleaning configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CleaningRules {
    pub slang_normalization: BTreeMap<String, String>,
    pub strip_bracketed: bool,
    pub strip_parenthesized_adlibs: bool,
    /// Parentheticals with at most this many tokens count as ad-libs.
    pub adlib_max_tokens: usize,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            slang_normalization: BTreeMap::new(),
            strip_bracketed: true,
            strip_parenthesized_adlibs: true,
            adlib_max_tokens: 3,
        }
    }
}

impl CleaningRules {
    /// Builds rules with the given normalization map. Keys and values are
    /// cleaned the same way lyric tokens are, and the map must be idempotent:
    /// no word produced by a canonical form may itself be rewritten.
    pub fn with_normalization<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            let key = clean_fragment(k.as_ref());
            let value = clean_fragment(v.as_ref());
            if key.is_empty() || key.contains(' ') {
                return Err(Error::param(format!(
                    "normalization variant `{}` must be a single word",
                    k.as_ref()
                )));
            }
            if value.is_empty() {
                return Err(Error::param(format!(
                    "normalization for `{key}` has an empty canonical form"
                )));
            }
            map.insert(key, value);
        }
        for (key, value) in &map {
            for word in value.split(' ') {
                if let Some(next) = map.get(word) {
                    if next != word {
                        return Err(Error::param(format!(
                            "normalization is not idempotent: `{key}` -> `{value}`, but `{word}` -> `{next}`"
                        )));
                    }
                }
            }
        }
        Ok(CleaningRules {
            slang_normalization: map,
            ..CleaningRules::default()
        })
    }

    /// Loads a `variant<TAB>canonical` sidecar file.
    pub fn from_tsv(path: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (line_no, line) in text::content_lines(path)? {
            let (k, v) = text::split_pair(path, line_no, &line)?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Self::with_normalization(pairs)
    }
}

/// Lowercases and strips punctuation, keeping apostrophes and hyphens only
/// when both neighbours are alphanumeric. Whitespace is collapsed.
fn clean_fragment(s: &str) -> String {
    let lowered: Vec<char> = s
        .chars()
        .map(|c| match c {
            '\u{2019}' | '\u{2018}' | '`' => '\'',
            '\u{2010}' | '\u{2011}' => '-',
            c => c,
        })
        .collect::<String>()
        .to_lowercase()
        .chars()
        .collect();
    let mut out = String::with_capacity(lowered.len());
    for (i, &c) in lowered.iter().enumerate() {
        let keep = if c.is_alphanumeric() {
            true
        } else if c == '\'' || c == '-' {
            let prev = i > 0 && lowered[i - 1].is_alphanumeric();
            let next = lowered.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            prev && next
        } else {
            false
        };
        out.push(if keep { c } else { ' ' });
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes every innermost `open ... close` group for which `drop` returns
/// true; groups that are kept lose their delimiters but keep their content.
fn strip_groups(line: &str, open: char, close: char, drop: impl Fn(&str) -> bool) -> String {
    let mut current = line.to_string();
    loop {
        let chars: Vec<char> = current.chars().collect();
        let mut start = None;
        let mut found = None;
        for (i, &c) in chars.iter().enumerate() {
            if c == open {
                start = Some(i);
            } else if c == close {
                if let Some(s) = start {
                    found = Some((s, i));
                    break;
                }
            }
        }
        let Some((s, e)) = found else {
            return current;
        };
        let inner: String = chars[s + 1..e].iter().collect();
        let replacement = if drop(&inner) {
            " ".to_string()
        } else {
            format!(" {inner} ")
        };
        current = chars[..s]
            .iter()
            .collect::<String>()
            + &replacement
            + &chars[e + 1..].iter().collect::<String>();
    }
}

/// Cleans raw lyrics into normalised lines. Blank lines are dropped.
pub fn clean_text(raw: &str, rules: &CleaningRules) -> Vec<String> {
    raw.lines()
        .filter_map(|line| {
            let mut line = line.to_string();
            if rules.strip_bracketed {
                line = strip_groups(&line, '[', ']', |_| true);
            }
            if rules.strip_parenthesized_adlibs {
                let max = rules.adlib_max_tokens;
                line = strip_groups(&line, '(', ')', |inner| {
                    inner.split_whitespace().count() <= max
                });
            }
            let cleaned = clean_fragment(&line);
            let normalized: Vec<&str> = cleaned
                .split(' ')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    rules
                        .slang_normalization
                        .get(t)
                        .map(String::as_str)
                        .unwrap_or(t)
                })
                .collect();
            let out = normalized.join(" ");
            (!out.is_empty()).then_some(out)
        })
        .collect()
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    artist: String,
    title: String,
    year: i64,
    region: String,
    gender: String,
    lyrics: String,
    #[serde(default)]
    chart_peak: Option<i64>,
    #[serde(default)]
    critic_score: Option<f64>,
    #[serde(default)]
    sales_units: Option<f64>,
    #[serde(default)]
    month: Option<i64>,
}

fn admit(raw: RawRecord, rules: &CleaningRules) -> std::result::Result<Song, String> {
    if raw.id.trim().is_empty() {
        return Err("empty id".into());
    }
    if !(i64::from(MIN_YEAR)..=i64::from(MAX_YEAR)).contains(&raw.year) {
        return Err(format!(
            "year {} outside {MIN_YEAR}-{MAX_YEAR}",
            raw.year
        ));
    }
    let region: Region = raw.region.parse()?;
    let gender: Gender = raw.gender.parse()?;
    let chart_peak = match raw.chart_peak {
        Some(p) if p < 1 || p > i64::from(u32::MAX) => {
            return Err(format!("chart_peak {p} must be >= 1"))
        }
        p => p.map(|p| p as u32),
    };
    if let Some(c) = raw.critic_score {
        if !(0.0..=10.0).contains(&c) {
            return Err(format!("critic_score {c} outside 0-10"));
        }
    }
    if let Some(s) = raw.sales_units {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(format!("sales_units {s} must be >= 0"));
        }
    }
    let month = match raw.month {
        Some(m) if !(1..=12).contains(&m) => return Err(format!("month {m} outside 1-12")),
        m => m.map(|m| m as u8),
    };
    let lines = clean_text(&raw.lyrics, rules);
    if lines.is_empty() {
        return Err("lyrics empty after cleaning".into());
    }
    Ok(Song {
        id: raw.id,
        artist: raw.artist,
        title: raw.title,
        year: raw.year as i32,
        month,
        region,
        gender,
        raw_lyrics: raw.lyrics,
        lines,
        chart_peak,
        critic_score: raw.critic_score,
        sales_units: raw.sales_units,
    })
}

/// Parses a JSONL corpus from a string. Blank lines are not records.
pub fn parse_corpus(input: &str, rules: &CleaningRules) -> LoadedCorpus {
    let mut songs = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    let mut records = 0;
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records += 1;
        let line_no = idx + 1;
        let outcome = serde_json::from_str::<RawRecord>(line)
            .map_err(|e| format!("malformed record: {e}"))
            .and_then(|raw| admit(raw, rules))
            .and_then(|song| {
                if seen.insert(song.id.clone()) {
                    Ok(song)
                } else {
                    Err(format!("duplicate id `{}`", song.id))
                }
            });
        match outcome {
            Ok(song) => songs.push(song),
            Err(reason) => rejects.push(Reject { line_no, reason }),
        }
    }
    LoadedCorpus {
        corpus: Corpus::new(songs),
        rejects,
        records,
    }
}

pub fn load_corpus(path: &Path, rules: &CleaningRules) -> Result<LoadedCorpus> {
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_corpus(&input, rules))
}

/// Writes rejects as JSONL `{"line_no","reason"}`.
pub fn write_rejects<W: Write>(mut out: W, rejects: &[Reject]) -> std::io::Result<()> {
    for r in rejects {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Counts songs per (region, decade, gender).
pub fn stratify(songs: &[Song]) -> BTreeMap<Stratum, usize> {
    let mut map = BTreeMap::new();
    for s in songs {
        *map.entry(Stratum {
            region: s.region,
            decade: s.decade(),
            gender: s.gender,
        })
        .or_insert(0) += 1;
    }
    map
}

/// Weighted sampling without replacement (Efraimidis-Spirakis A-ES).
///
/// Each item gets key `u^(1/w)`; the `k` largest keys win. Keys are compared
/// in log space (`ln u / w`), which preserves the order. The returned indices
/// are ordered by decreasing key.
pub fn es_sample_indices<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > weights.len() {
        return Err(Error::param(format!(
            "sample size {k} exceeds population {}",
            weights.len()
        )));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::param(format!("weight {w} at index {i} must be positive")));
    }
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u = loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            (u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Draws `k` distinct songs with probability driven by `weights` (keyed by
/// song id). Deterministic for a given seed.
pub fn weighted_sample<'c>(
    corpus: &'c Corpus,
    weights: &HashMap<String, f64>,
    k: usize,
    seed: u64,
) -> Result<Vec<&'c Song>> {
    let w: Vec<f64> = corpus
        .songs
        .iter()
        .map(|s| {
            weights
                .get(&s.id)
                .copied()
                .ok_or_else(|| Error::param(format!("no weight for song `{}`", s.id)))
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = es_sample_indices(&w, k, &mut rng)?;
    Ok(idx.into_iter().map(|i| &corpus.songs[i]).collect())
}
