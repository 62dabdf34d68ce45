use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numkit::{truncated_svd_sparse, CsrMatrix, Matrix, SvdConfig};
use crate::types::{EmbeddingSpace, LangTag, ParallelCorpus, Vocabulary, DEFAULT_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// 1 if the word occurs in the sentence.
    Binary,
    /// Number of occurrences in the sentence.
    Count,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Binary => "binary",
            Weighting::Count => "count",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Weighting::Binary),
            "count" => Ok(Weighting::Count),
            other => Err(Error::Config(format!("unknown weighting {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvertConfig {
    pub rank: usize,
    pub weighting: Weighting,
    /// Word vectors are `U · diag(S^p)`.
    pub sigma_power: f64,
    pub svd: SvdConfig,
}

impl Default for InvertConfig {
    fn default() -> Self {
        InvertConfig {
            rank: DEFAULT_DIM,
            weighting: Weighting::Binary,
            sigma_power: 0.5,
            svd: SvdConfig::default(),
        }
    }
}

/// Word-by-sentence-ID occurrence matrix over prefixed word types.
#[derive(Clone, Debug)]
pub struct InvertedIndex {
    pub vocab: Vocabulary,
    pub matrix: CsrMatrix,
}

/// One row per prefixed word type, one column per shared sentence ID.
///
/// Every corpus must have the same number of pairs; pair `i` in each corpus
/// is sentence ID `i`. A language that appears in several corpora (usually
/// the shared English side) is indexed once, from its first appearance.
pub fn build_inverted_index(corpora: &[ParallelCorpus], weighting: Weighting) -> Result<InvertedIndex> {
    let first = corpora.first().ok_or(Error::EmptyCorpus)?;
    let n = first.len();
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    if let Some(bad) = corpora.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: bad.len(),
        });
    }

    let mut sides: Vec<(&LangTag, Vec<&[String]>)> = Vec::new();
    for corpus in corpora {
        if !sides.iter().any(|(l, _)| *l == corpus.src_lang()) {
            sides.push((
                corpus.src_lang(),
                corpus.pairs().iter().map(|p| p.src_tokens.as_slice()).collect(),
            ));
        }
        if !sides.iter().any(|(l, _)| *l == corpus.tgt_lang()) {
            sides.push((
                corpus.tgt_lang(),
                corpus.pairs().iter().map(|p| p.tgt_tokens.as_slice()).collect(),
            ));
        }
    }

    let mut vocab = Vocabulary::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (lang, sentences) in &sides {
        for (sid, sentence) in sentences.iter().enumerate() {
            for tok in *sentence {
                let row = vocab.observe(&lang.prefix(tok))?;
                let cell = cells.entry((row, sid)).or_insert(0.0);
                *cell = match weighting {
                    Weighting::Binary => 1.0,
                    Weighting::Count => *cell + 1.0,
                };
            }
        }
    }

    let triplets = cells.into_iter().map(|((r, c), v)| (r, c, v)).collect();
    let matrix = CsrMatrix::from_triplets(vocab.len(), n, triplets)?;
    Ok(InvertedIndex { vocab, matrix })
}

/// Rank-`k` truncated SVD of the index; word vectors are `U · diag(S^p)`.
pub fn embed_invert(index: &InvertedIndex, cfg: &InvertConfig) -> Result<EmbeddingSpace> {
    let max = index.matrix.rows().min(index.matrix.cols());
    if cfg.rank == 0 || cfg.rank > max {
        return Err(Error::RankTooLarge { k: cfg.rank, max });
    }
    let svd = truncated_svd_sparse(&index.matrix, cfg.rank, &cfg.svd)?;
    let scale: Vec<f64> = svd.s.iter().map(|s| s.powf(cfg.sigma_power)).collect();
    let mut vectors = svd.u;
    for i in 0..vectors.rows() {
        for (x, s) in vectors.row_mut(i).iter_mut().zip(&scale) {
            *x *= s;
        }
    }
    EmbeddingSpace::new(
        index.vocab.clone(),
        Matrix::from_vec(vectors.rows(), cfg.rank, vectors.into_data())?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::cosine;

    fn lang(s: &str) -> LangTag {
        LangTag::new(s).unwrap()
    }

    fn corpus(pairs: &[(&str, &str)], s: &str, t: &str) -> ParallelCorpus {
        let split = |x: &str| x.split(' ').map(String::from).collect::<Vec<_>>();
        ParallelCorpus::from_token_pairs(pairs.iter().map(|(a, b)| (split(a), split(b))), lang(s), lang(t)).unwrap()
    }

    #[test]
    fn rows_are_sentence_signatures() {
        let c = corpus(&[("a b", "x"), ("b b", "y")], "eng", "fra");
        let idx = build_inverted_index(std::slice::from_ref(&c), Weighting::Binary).unwrap();
        let a = idx.vocab.index_of("eng:a").unwrap();
        let b = idx.vocab.index_of("eng:b").unwrap();
        assert_eq!((idx.matrix.get(a, 0), idx.matrix.get(a, 1)), (1.0, 0.0));
        assert_eq!(idx.matrix.get(b, 1), 1.0);

        let counted = build_inverted_index(&[c], Weighting::Count).unwrap();
        let b = counted.vocab.index_of("eng:b").unwrap();
        assert_eq!(counted.matrix.get(b, 1), 2.0);
    }

    #[test]
    fn translation_pair_gets_identical_rows_and_vectors() {
        let c = corpus(&[("a c", "x z"), ("b", "y"), ("a b", "x y"), ("c", "z")], "eng", "fra");
        let idx = build_inverted_index(&[c], Weighting::Binary).unwrap();
        let cfg = InvertConfig {
            rank: 3,
            ..InvertConfig::default()
        };
        let space = embed_invert(&idx, &cfg).unwrap();
        for (e, f) in [("eng:a", "fra:x"), ("eng:b", "fra:y"), ("eng:c", "fra:z")] {
            let c = cosine(space.lookup(e).unwrap(), space.lookup(f).unwrap());
            assert!((c - 1.0).abs() < 1e-9, "{e} {f} {c}");
        }
    }

    #[test]
    fn multilingual_stacking_indexes_shared_side_once() {
        let ef = corpus(&[("a", "x"), ("b", "y")], "eng", "fra");
        let es = corpus(&[("a", "p"), ("b", "q")], "eng", "spa");
        let idx = build_inverted_index(&[ef, es], Weighting::Count).unwrap();
        assert_eq!(idx.vocab.len(), 6);
        let a = idx.vocab.index_of("eng:a").unwrap();
        assert_eq!(idx.matrix.get(a, 0), 1.0);
        assert!(idx.vocab.contains("spa:p"));
    }

    #[test]
    fn mismatched_corpora_and_rank() {
        let one = corpus(&[("a", "x")], "eng", "fra");
        let two = corpus(&[("a", "x"), ("b", "y")], "eng", "spa");
        assert!(matches!(
            build_inverted_index(&[one.clone(), two], Weighting::Binary),
            Err(Error::LengthMismatch { .. })
        ));
        let idx = build_inverted_index(&[one], Weighting::Binary).unwrap();
        let cfg = InvertConfig {
            rank: 2,
            ..InvertConfig::default()
        };
        assert!(matches!(
            embed_invert(&idx, &cfg),
            Err(Error::RankTooLarge { k: 2, max: 1 })
        ));
    }
}
