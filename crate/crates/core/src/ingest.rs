//! Tokenization and the readers/writers for every on-disk format.
//!
//! All text inputs are UTF-8 with LF line endings; a trailing LF is optional
//! and CR before LF is stripped.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::numkit::Matrix;
use crate::types::{parse_label, Dictionary, EmbeddingSpace, LangTag, NliExample, ParallelCorpus, Vocabulary};

static PUNCT_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}+").unwrap());

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub split_punctuation: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            split_punctuation: true,
        }
    }
}

/// Whitespace split, then (optionally) every maximal run of Unicode
/// punctuation becomes its own token, then (optionally) lowercasing.
pub fn tokenize(text: &str, cfg: TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mut emit = |piece: &str| {
        if piece.is_empty() {
            return;
        }
        if cfg.lowercase {
            out.push(piece.to_lowercase());
        } else {
            out.push(piece.to_string());
        }
    };
    for chunk in text.split_whitespace() {
        if !cfg.split_punctuation {
            emit(chunk);
            continue;
        }
        let mut last = 0;
        for m in PUNCT_RUN.find_iter(chunk) {
            emit(&chunk[last..m.start()]);
            emit(m.as_str());
            last = m.end();
        }
        emit(&chunk[last..]);
    }
    out
}

/// File lines with CR stripped and no phantom line after a trailing LF.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(split_lines(&text))
}

pub(crate) fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// SNLI-style TSV: `gold_label \t sentence1 \t sentence2`, optional header
/// row, rows labelled `-` skipped.
pub fn read_snli(path: impl AsRef<Path>, cfg: TokenizerConfig) -> Result<Vec<NliExample>> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if i == 0 && cols.first() == Some(&"gold_label") {
            continue;
        }
        if cols.len() != 3 {
            return Err(malformed(
                path,
                i + 1,
                format!("expected 3 columns, found {}", cols.len()),
            ));
        }
        if cols[0] == "-" {
            continue;
        }
        let gold = parse_label(cols[0])?;
        let premise = tokenize(cols[1], cfg);
        let hypothesis = tokenize(cols[2], cfg);
        let ex = NliExample::new(premise, hypothesis, gold)
            .map_err(|_| malformed(path, i + 1, "sentence is empty after tokenization"))?;
        out.push(ex);
    }
    Ok(out)
}

/// Unlabelled `premise \t hypothesis` pairs for prediction.
pub fn read_sentence_pairs(path: impl AsRef<Path>, cfg: TokenizerConfig) -> Result<Vec<(Vec<String>, Vec<String>)>> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(malformed(
                path,
                i + 1,
                format!("expected 2 columns, found {}", cols.len()),
            ));
        }
        let p = tokenize(cols[0], cfg);
        let h = tokenize(cols[1], cfg);
        if p.is_empty() || h.is_empty() {
            return Err(malformed(path, i + 1, "sentence is empty after tokenization"));
        }
        out.push((p, h));
    }
    Ok(out)
}

/// Writes an SNLI-style TSV (header plus one row per example, tokens joined
/// by single spaces).
pub fn write_snli(examples: &[NliExample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("gold_label\tsentence1\tsentence2\n");
    for ex in examples {
        text.push_str(ex.gold.as_str());
        text.push('\t');
        text.push_str(&ex.premise.join(" "));
        text.push('\t');
        text.push_str(&ex.hypothesis.join(" "));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmbeddingReadOptions {
    /// Infer `V` and `d` from the body instead of a `V d` first line.
    pub headerless: bool,
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    read_embeddings_with(path, EmbeddingReadOptions::default())
}

pub fn read_embeddings_with(path: impl AsRef<Path>, opts: EmbeddingReadOptions) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, path, opts)
}

/// Parses the word-vector text format; `path` is used only in diagnostics.
pub fn parse_embeddings(text: &str, path: &Path, opts: EmbeddingReadOptions) -> Result<EmbeddingSpace> {
    let lines = split_lines(text);
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let header_mismatch = |reason: String| Error::HeaderMismatch {
        path: path.to_path_buf(),
        reason,
    };

    let (declared, body_start) = if opts.headerless {
        (None, 0)
    } else {
        let head = lines.first().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let parts: Vec<&str> = head.split(' ').collect();
        if parts.len() != 2 {
            return Err(parse_err(1, format!("header must be `V d`, got {head:?}")));
        }
        let v: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(1, format!("bad vocabulary size {:?}", parts[0])))?;
        let d: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(1, format!("bad dimension {:?}", parts[1])))?;
        (Some((v, d)), 1)
    };

    let mut vocab = Vocabulary::new();
    let mut data = Vec::new();
    let mut dim = declared.map(|(_, d)| d);
    for (offset, line) in lines[body_start..].iter().enumerate() {
        let lineno = body_start + offset + 1;
        if line.is_empty() {
            return Err(parse_err(lineno, "empty line".into()));
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().ok_or_else(|| parse_err(lineno, "missing token".into()))?;
        let before = data.len();
        for f in fields {
            let x: f64 = f.parse().map_err(|_| parse_err(lineno, format!("bad float {f:?}")))?;
            if !x.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value {f:?}")));
            }
            data.push(x);
        }
        let width = data.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(if declared.is_some() {
                    header_mismatch(format!("line {lineno} has {width} values, header declares {d}"))
                } else {
                    parse_err(lineno, format!("{width} values, expected {d}"))
                });
            }
            Some(_) => {}
        }
        match vocab.push(token.to_string(), 1) {
            Ok(_) => {}
            Err(Error::DuplicateToken(t)) => return Err(Error::DuplicateToken(t)),
            Err(_) => return Err(parse_err(lineno, format!("invalid token {token:?}"))),
        }
    }

    if let Some((v, _)) = declared {
        if v != vocab.len() {
            return Err(header_mismatch(format!(
                "header declares {v} vectors, body has {}",
                vocab.len()
            )));
        }
    }
    let dim = dim.unwrap_or(0);
    if dim == 0 {
        return Err(parse_err(1, "embedding dimension must be >= 1".into()));
    }
    let n = vocab.len();
    EmbeddingSpace::new(vocab, Matrix::from_vec(n, dim, data)?)
}

/// Renders the word-vector text format; floats use Rust's shortest
/// round-trip representation so reading back is exact.
pub fn render_embeddings(space: &EmbeddingSpace) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", space.len(), space.dim()));
    for (i, tok) in space.vocab().tokens().iter().enumerate() {
        out.push_str(tok);
        for x in space.matrix().row(i) {
            out.push(' ');
            out.push_str(&format_float(*x));
        }
        out.push('\n');
    }
    out
}

pub fn write_embeddings(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{} {}", space.len(), space.dim()).map_err(|e| Error::io(path, e))?;
    for (i, tok) in space.vocab().tokens().iter().enumerate() {
        w.write_all(tok.as_bytes()).map_err(|e| Error::io(path, e))?;
        for x in space.matrix().row(i) {
            write!(w, " {}", format_float(*x)).map_err(|e| Error::io(path, e))?;
        }
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[inline]
pub(crate) fn format_float(x: f64) -> String {
    format!("{x}")
}

/// Result of [`read_parallel`].
#[derive(Clone, Debug)]
pub struct ParallelRead {
    pub corpus: ParallelCorpus,
    /// Pairs dropped because one side tokenized to nothing.
    pub dropped: usize,
}

pub fn read_parallel(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
    src_lang: &LangTag,
    tgt_lang: &LangTag,
    cfg: TokenizerConfig,
) -> Result<ParallelRead> {
    let src = read_lines(src_path.as_ref())?;
    let tgt = read_lines(tgt_path.as_ref())?;
    parallel_from_lines(&src, &tgt, src_lang, tgt_lang, cfg)
}

pub fn parallel_from_lines(
    src: &[String],
    tgt: &[String],
    src_lang: &LangTag,
    tgt_lang: &LangTag,
    cfg: TokenizerConfig,
) -> Result<ParallelRead> {
    if src.len() != tgt.len() {
        return Err(Error::LineCountMismatch {
            src_lines: src.len(),
            tgt_lines: tgt.len(),
        });
    }
    let mut dropped = 0;
    let mut pairs = Vec::with_capacity(src.len());
    for (s, t) in src.iter().zip(tgt) {
        let s = tokenize(s, cfg);
        let t = tokenize(t, cfg);
        if s.is_empty() || t.is_empty() {
            dropped += 1;
            continue;
        }
        pairs.push((s, t));
    }
    let corpus = ParallelCorpus::from_token_pairs(pairs, src_lang.clone(), tgt_lang.clone())?;
    Ok(ParallelRead { corpus, dropped })
}

/// Two-column `source \t target` TSV; repeated pairs are dropped.
pub fn read_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut entries = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(malformed(
                path,
                i + 1,
                format!("expected 2 non-empty columns, found {:?}", cols),
            ));
        }
        entries.push((cols[0].to_string(), cols[1].to_string()));
    }
    Dictionary::new(entries)
}

pub fn write_dictionary(dict: &Dictionary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for (s, t) in dict.entries() {
        text.push_str(s);
        text.push('\t');
        text.push_str(t);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes one token sequence per line, tokens joined by single spaces.
pub fn write_token_lines(lines: &[Vec<String>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for l in lines {
        text.push_str(&l.join(" "));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    read_lines(path.as_ref())
}
