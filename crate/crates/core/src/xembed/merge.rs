use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::write_token_lines;
use crate::numkit::Rng;
use crate::types::{ParallelCorpus, SentencePair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeMethod {
    Random,
    Ratio,
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeMethod::Random => "random",
            MergeMethod::Ratio => "ratio",
        })
    }
}

fn prefixed_sides(pair: &SentencePair) -> Result<(Vec<String>, Vec<String>)> {
    if pair.src_tokens.is_empty() || pair.tgt_tokens.is_empty() {
        return Err(Error::EmptySide);
    }
    let src = pair.src_tokens.iter().map(|t| pair.src_lang.prefix(t)).collect();
    let tgt = pair.tgt_tokens.iter().map(|t| pair.tgt_lang.prefix(t)).collect();
    Ok((src, tgt))
}

/// Both sides prefixed and concatenated, then Fisher-Yates shuffled.
pub fn merge_random(pair: &SentencePair, rng: &mut Rng) -> Result<Vec<String>> {
    let (mut merged, tgt) = prefixed_sides(pair)?;
    merged.extend(tgt);
    rng.shuffle(&mut merged);
    Ok(merged)
}

/// Interleaves the two sides following their length ratio: after emitting
/// `i` of `m` source and `j` of `n` target tokens, the side with the smaller
/// emitted fraction goes next (`i/m <= j/n` picks source).
pub fn merge_ratio(pair: &SentencePair) -> Result<Vec<String>> {
    let (src, tgt) = prefixed_sides(pair)?;
    let (m, n) = (src.len(), tgt.len());
    let mut out = Vec::with_capacity(m + n);
    let (mut i, mut j) = (0, 0);
    let mut src = src.into_iter();
    let mut tgt = tgt.into_iter();
    while i < m || j < n {
        let take_src = j == n || (i < m && i * n <= j * m);
        if take_src {
            out.extend(src.next());
            i += 1;
        } else {
            out.extend(tgt.next());
            j += 1;
        }
    }
    Ok(out)
}

/// Pseudo-bilingual sentences built from a parallel corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedCorpus {
    pub sentences: Vec<Vec<String>>,
    pub method: MergeMethod,
}

impl MergedCorpus {
    /// Shuffles every pair once with `rng`.
    pub fn random(parallel: &ParallelCorpus, rng: &mut Rng) -> Result<Self> {
        let sentences = parallel
            .pairs()
            .iter()
            .map(|p| merge_random(p, rng))
            .collect::<Result<_>>()?;
        Ok(MergedCorpus {
            sentences,
            method: MergeMethod::Random,
        })
    }

    pub fn ratio(parallel: &ParallelCorpus) -> Result<Self> {
        let sentences = parallel.pairs().iter().map(merge_ratio).collect::<Result<_>>()?;
        Ok(MergedCorpus {
            sentences,
            method: MergeMethod::Ratio,
        })
    }

    /// Plain text, one merged sentence per line.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_token_lines(&self.sentences, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LangTag;

    fn pair(src: &[&str], tgt: &[&str]) -> SentencePair {
        SentencePair {
            src_tokens: src.iter().map(|s| s.to_string()).collect(),
            tgt_tokens: tgt.iter().map(|s| s.to_string()).collect(),
            src_lang: LangTag::new("eng").unwrap(),
            tgt_lang: LangTag::new("fra").unwrap(),
        }
    }

    fn strs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(
            strs(&merge_ratio(&pair(&["a", "b"], &["x"])).unwrap()),
            ["eng:a", "fra:x", "eng:b"]
        );
        assert_eq!(strs(&merge_ratio(&pair(&["a"], &["x"])).unwrap()), ["eng:a", "fra:x"]);
        assert_eq!(
            strs(&merge_ratio(&pair(&["a", "b"], &["x", "y"])).unwrap()),
            ["eng:a", "fra:x", "eng:b", "fra:y"]
        );
        assert_eq!(
            strs(&merge_ratio(&pair(&["a"], &["x", "y", "z"])).unwrap()),
            ["eng:a", "fra:x", "fra:y", "fra:z"]
        );
    }

    #[test]
    fn random_keeps_multiset_and_is_seeded() {
        let p = pair(&["a", "b"], &["x"]);
        let out = merge_random(&p, &mut Rng::new(1)).unwrap();
        let mut sorted = out.clone();
        sorted.sort();
        assert_eq!(strs(&sorted), ["eng:a", "eng:b", "fra:x"]);
        assert_eq!(out, merge_random(&p, &mut Rng::new(1)).unwrap());
    }

    #[test]
    fn empty_side_rejected() {
        let p = pair(&[], &["x"]);
        assert!(matches!(merge_ratio(&p), Err(Error::EmptySide)));
        assert!(matches!(merge_random(&p, &mut Rng::new(0)), Err(Error::EmptySide)));
    }

    #[test]
    fn two_token_shuffle_is_fair() {
        let p = pair(&["a"], &["x"]);
        let mut rng = Rng::new(2024);
        let draws = 10_000;
        let src_first = (0..draws)
            .filter(|_| merge_random(&p, &mut rng).unwrap()[0] == "eng:a")
            .count();
        let freq = src_first as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }
}
