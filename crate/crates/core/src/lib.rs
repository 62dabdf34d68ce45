//! Cross-lingual natural language inference through shared multilingual
//! word-embedding spaces.
//!
//! An attend/compare/aggregate classifier that sees only word vectors is
//! trained on source-language data; swapping in target-language vectors
//! from a shared space transfers it. Shared spaces come from a least-squares
//! translation matrix, SGNS over shuffled or ratio-interleaved sentence
//! pairs, an inverted sentence index reduced by truncated SVD, or an
//! additive bilingual compositional model.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod nli;
pub mod numkit;
pub mod types;
pub mod xembed;

pub use error::{Error, Result};
pub use types::{
    parse_label, Dictionary, EmbeddingSpace, Label, LangTag, Lexicon, LinearMap, NliExample, ParallelCorpus,
    SentencePair, Vocabulary,
};
