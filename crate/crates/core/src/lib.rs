//! Corpus analysis for lyrical complexity.
//!
//! The crate is organised by analysis layer:
//!
//! * [`corpus`] loads and cleans a JSONL lyrics corpus, stratifies it and
//!   draws weighted samples.
//! * [`phonetics`] parses CMU-format pronouncing dictionaries and falls back
//!   to a rule-based grapheme-to-phoneme estimate for unknown words.
//! * [`rhyme`] scores phonetic similarity between line tails and detects
//!   rhyme pairs inside a sliding window of preceding lines.
//! * [`lexical`], [`semantics`] and [`sentiment`] compute per-song features.
//! * [`trends`] turns features into time series and finds changepoints.
//! * [`stats`] holds the multivariate layer (PCA, k-means, OLS, ...).
//! * [`pipeline`] wires everything together for the `lyrix` binary.

pub mod corpus;
pub mod error;
pub mod lexical;
pub mod phonetics;
pub mod pipeline;
pub mod rhyme;
pub mod seed;
pub mod semantics;
pub mod sentiment;
pub mod stats;
pub mod text;
pub mod trends;

pub use error::{Error, Result};
