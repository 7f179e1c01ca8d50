//! Small shared readers for the TSV / word-list sidecar formats.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads a UTF-8 text file, returning `(line_no, line)` for every line that
/// is neither blank nor a `#` comment. Line numbers are 1-based.
pub fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                None
            } else {
                Some((i + 1, line.to_string()))
            }
        })
        .collect())
}

/// Splits a `key<TAB>value` line. Extra columns are an error.
pub fn split_pair<'a>(path: &Path, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line_no,
            reason: "expected exactly two tab-separated columns".into(),
        }),
    }
}

/// Whitespace tokenisation of already-cleaned lines.
pub fn tokens<'a, I, S>(lines: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str> + 'a,
{
    lines
        .into_iter()
        .flat_map(|l| {
            l.as_ref()
                .split_whitespace()
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect()
}
