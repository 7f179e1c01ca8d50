use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{estimate_phonemes, PhonemeSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DictSource {
    Base,
    Slang,
}

/// A skipped dictionary line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line_no: usize,
    pub message: String,
}

/// Word → pronunciations, in file order. Keys are lowercase.
#[derive(Debug, Clone, PartialEq)]
pub struct PronouncingDictionary {
    entries: BTreeMap<String, Vec<PhonemeSequence>>,
    source: DictSource,
}

impl PronouncingDictionary {
    pub fn empty(source: DictSource) -> Self {
        PronouncingDictionary {
            entries: BTreeMap::new(),
            source,
        }
    }

    pub fn source(&self) -> DictSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&word.to_lowercase())
    }

    /// All pronunciations of `word`, first-listed first.
    pub fn pronunciations(&self, word: &str) -> Option<&[PhonemeSequence]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// The primary (first-listed) pronunciation.
    pub fn get(&self, word: &str) -> Option<&PhonemeSequence> {
        self.pronunciations(word).and_then(|p| p.first())
    }

    pub fn insert(&mut self, word: &str, pron: PhonemeSequence) {
        self.entries.entry(word.to_lowercase()).or_default().push(pron);
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parses CMU dictionary text. Accepts both the classic layout
    /// (`HELLO  HH AH0 L OW1`, `;;;` comments) and the lowercase layout with
    /// single spaces and trailing `# ...` comments.
    pub fn parse_str(text: &str, source: DictSource) -> (Self, Vec<Diagnostic>) {
        let mut dict = PronouncingDictionary::empty(source);
        let mut diags = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;;") || trimmed.starts_with('#') {
                continue;
            }
            let body = match trimmed.find(" #") {
                Some(pos) => trimmed[..pos].trim_end(),
                None => trimmed,
            };
            let mut fields = body.split_whitespace();
            let Some(head) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if rest.is_empty() {
                diags.push(Diagnostic {
                    line_no,
                    message: format!("no phonemes for `{head}`"),
                });
                continue;
            }
            let word = strip_variant(head);
            if word.is_empty() {
                diags.push(Diagnostic {
                    line_no,
                    message: format!("malformed headword `{head}`"),
                });
                continue;
            }
            match rest.join(" ").parse::<PhonemeSequence>() {
                Ok(seq) => dict.insert(word, seq),
                Err(msg) => diags.push(Diagnostic { line_no, message: msg }),
            }
        }
        (dict, diags)
    }

    pub fn parse_file(path: &Path, source: DictSource) -> Result<(Self, Vec<Diagnostic>)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_str(&text, source))
    }

    /// Serialises back to the lowercase CMU layout; alternates get `(n)`.
    pub fn to_cmu_string(&self) -> String {
        let mut out = String::new();
        for (word, prons) in &self.entries {
            for (i, p) in prons.iter().enumerate() {
                if i == 0 {
                    let _ = writeln!(out, "{word} {p}");
                } else {
                    let _ = writeln!(out, "{word}({}) {p}", i + 1);
                }
            }
        }
        out
    }
}

/// `WORD(2)` → `WORD`. A parenthesised suffix that is not a number is kept.
fn strip_variant(head: &str) -> &str {
    if let Some(open) = head.rfind('(') {
        if head.ends_with(')') && head[open + 1..head.len() - 1].chars().all(|c| c.is_ascii_digit()) && open > 0 {
            return &head[..open];
        }
    }
    head
}

/// The slang dictionary layered over the base dictionary.
#[derive(Debug, Clone)]
pub struct Dictionaries {
    pub slang: PronouncingDictionary,
    pub base: PronouncingDictionary,
}

impl Dictionaries {
    pub fn new(slang: PronouncingDictionary, base: PronouncingDictionary) -> Self {
        Dictionaries { slang, base }
    }

    pub fn lookup(&self, token: &str) -> PhonemeSequence {
        lookup(token, &self.slang, &self.base)
    }
}

fn lookup_known(token: &str, slang: &PronouncingDictionary, base: &PronouncingDictionary) -> Option<PhonemeSequence> {
    slang.get(token).or_else(|| base.get(token)).cloned()
}

/// Slang first, then base; hyphenated compounds missing from both are
/// resolved part by part; anything else is estimated.
pub fn lookup(token: &str, slang: &PronouncingDictionary, base: &PronouncingDictionary) -> PhonemeSequence {
    if let Some(p) = lookup_known(token, slang, base) {
        return p;
    }
    if token.contains('-') {
        let parts: Vec<PhonemeSequence> = token
            .split('-')
            .filter(|p| !p.is_empty())
            .map(|part| lookup_known(part, slang, base).unwrap_or_else(|| estimate_phonemes(part)))
            .collect();
        if !parts.is_empty() {
            return PhonemeSequence::concat(&parts);
        }
    }
    estimate_phonemes(token)
}
