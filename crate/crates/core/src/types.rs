//! Language-neutral domain types shared by every other module.
//!
//! All of these are immutable once built and may be shared read-only
//! between threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Default embedding width.
pub const DEFAULT_DIM: usize = 300;

/// NLI relation label.
///
/// The derived ordering is the fixed report order used for confusion
/// matrices and argmax tie-breaking: contradiction, entailment, neutral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Contradiction,
    Entailment,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Contradiction, Label::Entailment, Label::Neutral];

    pub fn index(self) -> usize {
        match self {
            Label::Contradiction => 0,
            Label::Entailment => 1,
            Label::Neutral => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Contradiction => "contradiction",
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
        }
    }

    /// Three-letter column heading.
    pub fn short(self) -> &'static str {
        &self.as_str()[..3]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_label(s)
    }
}

/// Case-insensitive label parsing. SNLI's `-` marker is rejected like any
/// other unknown string.
pub fn parse_label(text: &str) -> Result<Label> {
    Label::ALL
        .iter()
        .copied()
        .find(|l| l.as_str().eq_ignore_ascii_case(text))
        .ok_or_else(|| Error::UnknownLabel(text.to_string()))
}

/// Short language code such as `eng` or `fra`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LangTag(String);

impl LangTag {
    pub const SEPARATOR: char = ':';

    pub fn new(code: &str) -> Result<Self> {
        if code.is_empty() || code.chars().any(|c| c.is_whitespace() || c == Self::SEPARATOR) {
            return Err(Error::InvalidLangTag(code.to_string()));
        }
        Ok(LangTag(code.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `dog` -> `eng:dog`.
    pub fn prefix(&self, token: &str) -> String {
        let mut s = String::with_capacity(self.0.len() + 1 + token.len());
        s.push_str(&self.0);
        s.push(Self::SEPARATOR);
        s.push_str(token);
        s
    }

    /// Returns the bare token if `prefixed` belongs to this language.
    pub fn strip<'a>(&self, prefixed: &'a str) -> Option<&'a str> {
        prefixed
            .strip_prefix(self.0.as_str())
            .and_then(|rest| rest.strip_prefix(Self::SEPARATOR))
    }
}

impl fmt::Display for LangTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LangTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LangTag::new(s)
    }
}

pub(crate) fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::InvalidToken(token.to_string()));
    }
    Ok(())
}

/// Dense token <-> index bijection with occurrence counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from distinct tokens, each with count 1.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for t in tokens {
            vocab.push(t.into(), 1)?;
        }
        Ok(vocab)
    }

    /// Appends a new token; duplicates are an error.
    pub fn push(&mut self, token: String, count: u64) -> Result<usize> {
        validate_token(&token)?;
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken(token));
        }
        let id = self.tokens.len();
        self.index.insert(token.clone(), id);
        self.tokens.push(token);
        self.counts.push(count.max(1));
        Ok(id)
    }

    /// Counts one occurrence, inserting the token on first sight.
    pub fn observe(&mut self, token: &str) -> Result<usize> {
        if let Some(&id) = self.index.get(token) {
            self.counts[id] += 1;
            return Ok(id);
        }
        self.push(token.to_string(), 1)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }
}

/// A vocabulary paired with one dense vector per entry.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    vocab: Vocabulary,
    matrix: Matrix,
}

impl EmbeddingSpace {
    pub fn new(vocab: Vocabulary, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != vocab.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} vectors for {} vocabulary entries",
                matrix.rows(),
                vocab.len()
            )));
        }
        if matrix.cols() == 0 {
            return Err(Error::ShapeMismatch("embedding width must be >= 1".into()));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFiniteValue("embedding matrix".into()));
        }
        Ok(EmbeddingSpace { vocab, matrix })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.matrix.row(i))
    }

    pub fn into_parts(self) -> (Vocabulary, Matrix) {
        (self.vocab, self.matrix)
    }

    /// Keeps only the tokens of one language, stripping their prefix.
    pub fn language_slice(&self, lang: &LangTag) -> Result<EmbeddingSpace> {
        let mut vocab = Vocabulary::new();
        let mut rows = Vec::new();
        for (i, tok) in self.vocab.tokens().iter().enumerate() {
            if let Some(bare) = lang.strip(tok) {
                vocab.push(bare.to_string(), self.vocab.count(i))?;
                rows.extend_from_slice(self.matrix.row(i));
            }
        }
        let n = vocab.len();
        EmbeddingSpace::new(vocab, Matrix::from_vec(n, self.dim(), rows)?)
    }

    /// Prefixes every token with `lang`.
    pub fn prefixed(&self, lang: &LangTag) -> Result<EmbeddingSpace> {
        let mut vocab = Vocabulary::new();
        for (i, tok) in self.vocab.tokens().iter().enumerate() {
            vocab.push(lang.prefix(tok), self.vocab.count(i))?;
        }
        EmbeddingSpace::new(vocab, self.matrix.clone())
    }

    /// Row-wise union of spaces with disjoint vocabularies and equal width.
    pub fn concat(spaces: &[&EmbeddingSpace]) -> Result<EmbeddingSpace> {
        let dim = spaces.first().map(|s| s.dim()).ok_or(Error::EmptyInput)?;
        let mut vocab = Vocabulary::new();
        let mut rows = Vec::new();
        for s in spaces {
            if s.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            for (i, tok) in s.vocab.tokens().iter().enumerate() {
                vocab.push(tok.clone(), s.vocab.count(i))?;
            }
            rows.extend_from_slice(s.matrix.data());
        }
        let n = vocab.len();
        EmbeddingSpace::new(vocab, Matrix::from_vec(n, dim, rows)?)
    }
}

/// Token lookup into a space, optionally through a language prefix.
#[derive(Clone, Copy, Debug)]
pub struct Lexicon<'a> {
    pub space: &'a EmbeddingSpace,
    pub lang: Option<&'a LangTag>,
}

impl<'a> Lexicon<'a> {
    pub fn new(space: &'a EmbeddingSpace, lang: Option<&'a LangTag>) -> Self {
        Lexicon { space, lang }
    }

    pub fn lookup(&self, token: &str) -> Option<&'a [f64]> {
        match self.lang {
            Some(lang) => self.space.lookup(&lang.prefix(token)),
            None => self.space.lookup(token),
        }
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        match self.lang {
            Some(lang) => self.space.vocab().index_of(&lang.prefix(token)),
            None => self.space.vocab().index_of(token),
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

impl<'a> From<&'a EmbeddingSpace> for Lexicon<'a> {
    fn from(space: &'a EmbeddingSpace) -> Self {
        Lexicon { space, lang: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NliExample {
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
    pub gold: Label,
}

impl NliExample {
    pub fn new(premise: Vec<String>, hypothesis: Vec<String>, gold: Label) -> Result<Self> {
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(Error::EmptySentence);
        }
        Ok(NliExample {
            premise,
            hypothesis,
            gold,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentencePair {
    pub src_tokens: Vec<String>,
    pub tgt_tokens: Vec<String>,
    pub src_lang: LangTag,
    pub tgt_lang: LangTag,
}

impl SentencePair {
    pub fn new(src_tokens: Vec<String>, tgt_tokens: Vec<String>, src_lang: LangTag, tgt_lang: LangTag) -> Result<Self> {
        if src_tokens.is_empty() || tgt_tokens.is_empty() {
            return Err(Error::EmptySide);
        }
        Ok(SentencePair {
            src_tokens,
            tgt_tokens,
            src_lang,
            tgt_lang,
        })
    }
}

/// Line-aligned sentence pairs for one language pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<SentencePair>,
    src_lang: LangTag,
    tgt_lang: LangTag,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<SentencePair>, src_lang: LangTag, tgt_lang: LangTag) -> Result<Self> {
        if let Some(bad) = pairs.iter().find(|p| p.src_lang != src_lang || p.tgt_lang != tgt_lang) {
            return Err(Error::InvalidLangTag(format!(
                "pair tagged {}-{} in {}-{} corpus",
                bad.src_lang, bad.tgt_lang, src_lang, tgt_lang
            )));
        }
        Ok(ParallelCorpus {
            pairs,
            src_lang,
            tgt_lang,
        })
    }

    /// Builds a corpus from raw token sequences, tagging every pair.
    pub fn from_token_pairs(
        pairs: impl IntoIterator<Item = (Vec<String>, Vec<String>)>,
        src_lang: LangTag,
        tgt_lang: LangTag,
    ) -> Result<Self> {
        let pairs = pairs
            .into_iter()
            .map(|(s, t)| SentencePair::new(s, t, src_lang.clone(), tgt_lang.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParallelCorpus {
            pairs,
            src_lang,
            tgt_lang,
        })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn src_lang(&self) -> &LangTag {
        &self.src_lang
    }

    pub fn tgt_lang(&self) -> &LangTag {
        &self.tgt_lang
    }

    /// The first `n` pairs.
    pub fn prefix(&self, n: usize) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self.pairs[..n.min(self.pairs.len())].to_vec(),
            src_lang: self.src_lang.clone(),
            tgt_lang: self.tgt_lang.clone(),
        }
    }
}

/// Bilingual word list of (source word, target word) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: Vec<(String, String)>,
}

impl Dictionary {
    /// Drops repeated pairs, keeping the first occurrence.
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for (s, t) in entries {
            if s.is_empty() || t.is_empty() {
                return Err(Error::InvalidToken(format!("{s:?} -> {t:?}")));
            }
            if seen.insert((s.clone(), t.clone())) {
                kept.push((s, t));
            }
        }
        Ok(Dictionary { entries: kept })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Row-vector linear map `v -> v * W` from one language's space into another's.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub matrix: Matrix,
    pub from_lang: LangTag,
    pub to_lang: LangTag,
}

impl LinearMap {
    pub fn new(matrix: Matrix, from_lang: LangTag, to_lang: LangTag) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFiniteValue("linear map".into()));
        }
        Ok(LinearMap {
            matrix,
            from_lang,
            to_lang,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.cols()
    }
}
