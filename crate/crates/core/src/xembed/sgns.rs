//! Skip-gram with negative sampling.

use std::cell::Cell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::numkit::{log_sigmoid, sigmoid, Matrix, Rng};
use crate::types::{EmbeddingSpace, ParallelCorpus, Vocabulary, DEFAULT_DIM};
use crate::xembed::merge::MergedCorpus;

const NEGATIVE_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly towards zero over training.
    pub lr: f64,
    pub min_count: u64,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    pub seed: u64,
    /// Worker threads. `1` is the deterministic single-writer mode; more
    /// threads apply unsynchronized updates and are not reproducible.
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: DEFAULT_DIM,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            min_count: 1,
            subsample: None,
            seed: 1,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(Error::Config("sgns dim, window and negatives must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("sgns workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// Loss and gradients of one (center, context) pair with its negatives.
#[derive(Clone, Debug)]
pub struct SgnsPairGrad {
    pub loss: f64,
    pub d_center: Vec<f64>,
    pub d_context: Vec<f64>,
    pub d_negatives: Vec<Vec<f64>>,
}

/// `−ln σ(u_o·v_c) − Σ ln σ(−u_n·v_c)` and its gradients.
pub fn sgns_pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsPairGrad {
    let d = center.len();
    let mut d_center = vec![0.0; d];
    let s = dot(center, context);
    let mut loss = -log_sigmoid(s);
    let g = sigmoid(s) - 1.0;
    for k in 0..d {
        d_center[k] += g * context[k];
    }
    let d_context = center.iter().map(|c| g * c).collect();
    let mut d_negatives = Vec::with_capacity(negatives.len());
    for u in negatives {
        let s = dot(center, u);
        loss -= log_sigmoid(-s);
        let g = sigmoid(s);
        for k in 0..d {
            d_center[k] += g * u[k];
        }
        d_negatives.push(center.iter().map(|c| g * c).collect());
    }
    SgnsPairGrad {
        loss,
        d_center,
        d_context,
        d_negatives,
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trained SGNS parameters. The input vectors are the embeddings; the
/// output (context) vectors are kept only for loss evaluation.
#[derive(Clone, Debug)]
pub struct SgnsModel {
    pub vocab: Vocabulary,
    pub input: Matrix,
    pub output: Matrix,
    /// Mean per-pair loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

impl SgnsModel {
    pub fn space(&self) -> EmbeddingSpace {
        EmbeddingSpace::new(self.vocab.clone(), self.input.clone()).expect("consistent model")
    }

    pub fn into_space(self) -> EmbeddingSpace {
        EmbeddingSpace::new(self.vocab, self.input).expect("consistent model")
    }

    /// Mean pair loss over `sentences` with negatives drawn from a fresh
    /// `seed` stream; no parameter changes.
    pub fn mean_loss(&self, sentences: &[Vec<String>], cfg: &SgnsConfig, seed: u64) -> f64 {
        let sampler = NegativeSampler::new(self.vocab.counts());
        let mut rng = Rng::new(seed);
        let mut total = 0.0;
        let mut pairs = 0usize;
        let mut negs = Vec::with_capacity(cfg.negatives);
        for sent in sentences {
            let ids: Vec<usize> = sent.iter().filter_map(|t| self.vocab.index_of(t)).collect();
            for (c, &center) in ids.iter().enumerate() {
                for o in window(c, ids.len(), cfg.window) {
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let n = sampler.sample(&mut rng);
                        if n != ids[o] {
                            negs.push(self.output.row(n));
                        }
                    }
                    total += sgns_pair_loss(self.input.row(center), self.output.row(ids[o]), &negs).loss;
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            0.0
        } else {
            total / pairs as f64
        }
    }
}

fn window(center: usize, len: usize, width: usize) -> impl Iterator<Item = usize> {
    let lo = center.saturating_sub(width);
    let hi = (center + width + 1).min(len);
    (lo..hi).filter(move |&o| o != center)
}

/// Unigram^0.75 sampler by binary search over the cumulative distribution.
struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(counts.len());
        for &c in counts {
            acc += (c as f64).powf(NEGATIVE_POWER);
            cumulative.push(acc);
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        NegativeSampler { cumulative }
    }

    fn sample(&self, rng: &mut Rng) -> usize {
        let u = rng.uniform();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Parameter storage the update kernel can read and write through `&self`.
trait Weights {
    fn get(&self, i: usize) -> f64;
    fn set(&self, i: usize, v: f64);
}

/// Single-threaded storage.
struct CellWeights<'a>(&'a [Cell<f64>]);

impl Weights for CellWeights<'_> {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self.0[i].get()
    }

    #[inline]
    fn set(&self, i: usize, v: f64) {
        self.0[i].set(v)
    }
}

/// Shared storage for unsynchronized multi-threaded updates.
struct AtomicWeights(Vec<AtomicU64>);

impl AtomicWeights {
    fn from_slice(v: &[f64]) -> Self {
        AtomicWeights(v.iter().map(|x| AtomicU64::new(x.to_bits())).collect())
    }

    fn into_vec(self) -> Vec<f64> {
        self.0.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}

impl Weights for AtomicWeights {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.0[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, i: usize, v: f64) {
        self.0[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

struct Kernel<'a, W: Weights> {
    input: &'a W,
    output: &'a W,
    dim: usize,
    sampler: &'a NegativeSampler,
    negatives: usize,
}

impl<W: Weights> Kernel<'_, W> {
    /// One SGD step on a (center, context) pair; returns the pair loss.
    fn step(&self, center: usize, context: usize, lr: f64, rng: &mut Rng, v: &mut [f64], grad: &mut [f64]) -> f64 {
        let d = self.dim;
        let cbase = center * d;
        for k in 0..d {
            v[k] = self.input.get(cbase + k);
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for n in 0..=self.negatives {
            let (target, label) = if n == 0 {
                (context, 1.0)
            } else {
                let t = self.sampler.sample(rng);
                if t == context {
                    continue;
                }
                (t, 0.0)
            };
            let tbase = target * d;
            let mut s = 0.0;
            for k in 0..d {
                s += v[k] * self.output.get(tbase + k);
            }
            loss -= if label == 1.0 { log_sigmoid(s) } else { log_sigmoid(-s) };
            // descent step on −ln σ(±s)
            let g = lr * (label - sigmoid(s));
            for k in 0..d {
                let u = self.output.get(tbase + k);
                grad[k] += g * u;
                self.output.set(tbase + k, u + g * v[k]);
            }
        }
        for k in 0..d {
            self.input.set(cbase + k, v[k] + grad[k]);
        }
        loss
    }
}

/// Trains SGNS on tokenized sentences (monolingual or merged bilingual).
pub fn train_sgns(sentences: &[Vec<String>], cfg: &SgnsConfig) -> Result<SgnsModel> {
    cfg.validate()?;
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let vocab = build_vocab(sentences, cfg.min_count)?;
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if vocab.len() < 2 {
        return Err(Error::DegenerateVocabulary(vocab.len()));
    }

    let v = vocab.len();
    let d = cfg.dim;
    let mut rng = Rng::new(cfg.seed);
    let mut init_rng = rng.derive("init");
    let input: Vec<f64> = (0..v * d).map(|_| (init_rng.uniform() - 0.5) / d as f64).collect();
    let output = vec![0.0; v * d];

    let ids: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index_of(t)).collect())
        .collect();
    let total_tokens: usize = ids.iter().map(Vec::len).sum();
    let sampler = NegativeSampler::new(vocab.counts());
    let keep_prob = subsample_keep_probs(&vocab, cfg.subsample, total_tokens);
    let schedule = Schedule {
        lr0: cfg.lr,
        total: (cfg.epochs * total_tokens).max(1),
    };

    let (input, output, epoch_losses) = if cfg.workers == 1 {
        let mut input = input;
        let mut output = output;
        let mut losses = Vec::with_capacity(cfg.epochs);
        {
            let iw = CellWeights(Cell::from_mut(input.as_mut_slice()).as_slice_of_cells());
            let ow = CellWeights(Cell::from_mut(output.as_mut_slice()).as_slice_of_cells());
            let kernel = Kernel {
                input: &iw,
                output: &ow,
                dim: d,
                sampler: &sampler,
                negatives: cfg.negatives,
            };
            let progress = AtomicUsize::new(0);
            let mut train_rng = rng.derive("train");
            for _ in 0..cfg.epochs {
                let (loss, pairs) = run_chunk(
                    &kernel,
                    &ids,
                    cfg.window,
                    &keep_prob,
                    &schedule,
                    &progress,
                    &mut train_rng,
                );
                losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
            }
        }
        (input, output, losses)
    } else {
        train_hogwild(input, output, &ids, cfg, &sampler, &keep_prob, &schedule, &mut rng)
    };

    Ok(SgnsModel {
        vocab,
        input: Matrix::from_vec(v, d, input)?,
        output: Matrix::from_vec(v, d, output)?,
        epoch_losses,
    })
}

struct Schedule {
    lr0: f64,
    total: usize,
}

impl Schedule {
    fn lr(&self, done: usize) -> f64 {
        let frac = 1.0 - done as f64 / self.total as f64;
        self.lr0 * frac.max(MIN_LR_FRACTION)
    }
}

fn run_chunk<W: Weights>(
    kernel: &Kernel<'_, W>,
    sentences: &[Vec<usize>],
    width: usize,
    keep_prob: &Option<Vec<f64>>,
    schedule: &Schedule,
    progress: &AtomicUsize,
    rng: &mut Rng,
) -> (f64, usize) {
    let d = kernel.dim;
    let mut v = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut kept = Vec::new();
    let mut loss = 0.0;
    let mut pairs = 0;
    for sent in sentences {
        let done = progress.fetch_add(sent.len(), Ordering::Relaxed);
        let lr = schedule.lr(done);
        kept.clear();
        match keep_prob {
            Some(p) => kept.extend(sent.iter().copied().filter(|&w| rng.uniform() < p[w])),
            None => kept.extend_from_slice(sent),
        }
        for c in 0..kept.len() {
            for o in window(c, kept.len(), width) {
                loss += kernel.step(kept[c], kept[o], lr, rng, &mut v, &mut grad);
                pairs += 1;
            }
        }
    }
    (loss, pairs)
}

#[allow(clippy::too_many_arguments)]
fn train_hogwild(
    input: Vec<f64>,
    output: Vec<f64>,
    ids: &[Vec<usize>],
    cfg: &SgnsConfig,
    sampler: &NegativeSampler,
    keep_prob: &Option<Vec<f64>>,
    schedule: &Schedule,
    rng: &mut Rng,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let iw = AtomicWeights::from_slice(&input);
    let ow = AtomicWeights::from_slice(&output);
    let kernel = Kernel {
        input: &iw,
        output: &ow,
        dim: cfg.dim,
        sampler,
        negatives: cfg.negatives,
    };
    let progress = AtomicUsize::new(0);
    let chunk = ids.len().div_ceil(cfg.workers).max(1);
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let results: Vec<(f64, usize)> = std::thread::scope(|scope| {
            let handles: Vec<_> = ids
                .chunks(chunk)
                .enumerate()
                .map(|(t, part)| {
                    let mut trng = rng.derive(&format!("worker-{epoch}-{t}"));
                    let kernel = &kernel;
                    let progress = &progress;
                    scope.spawn(move || run_chunk(kernel, part, cfg.window, keep_prob, schedule, progress, &mut trng))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sgns worker")).collect()
        });
        let (loss, pairs) = results.iter().fold((0.0, 0), |(l, p), (a, b)| (l + a, p + b));
        losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }
    (iw.into_vec(), ow.into_vec(), losses)
}

fn subsample_keep_probs(vocab: &Vocabulary, threshold: Option<f64>, total: usize) -> Option<Vec<f64>> {
    let t = threshold?;
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let f = c as f64 / total as f64;
                ((t / f).sqrt()).min(1.0)
            })
            .collect(),
    )
}

/// Types with at least `min_count` occurrences, most frequent first, ties
/// in lexicographic order so token order within sentences never matters.
fn build_vocab(sentences: &[Vec<String>], min_count: u64) -> Result<Vocabulary> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut vocab = Vocabulary::new();
    for (t, c) in kept {
        vocab.push(t.to_string(), c)?;
    }
    Ok(vocab)
}

/// Shuffle-merge every pair once, then train SGNS on the merged corpus.
pub fn embed_random(parallel: &ParallelCorpus, cfg: &SgnsConfig, rng: &mut Rng) -> Result<SgnsModel> {
    let merged = MergedCorpus::random(parallel, rng)?;
    train_sgns(&merged.sentences, cfg)
}

/// Ratio-interleave every pair, then train SGNS on the merged corpus.
pub fn embed_ratio(parallel: &ParallelCorpus, cfg: &SgnsConfig) -> Result<SgnsModel> {
    let merged = MergedCorpus::ratio(parallel)?;
    train_sgns(&merged.sentences, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{cosine, grad_check, DEFAULT_EPS};
    use crate::types::LangTag;

    fn sent(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn small_cfg() -> SgnsConfig {
        SgnsConfig {
            dim: 10,
            window: 1,
            epochs: 3,
            seed: 11,
            ..SgnsConfig::default()
        }
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(train_sgns(&[], &small_cfg()), Err(Error::EmptyCorpus)));
        assert!(matches!(train_sgns(&[vec![]], &small_cfg()), Err(Error::EmptyCorpus)));
        assert!(matches!(
            train_sgns(&[sent("a a a")], &small_cfg()),
            Err(Error::DegenerateVocabulary(1))
        ));
        let cfg = SgnsConfig {
            min_count: 5,
            ..small_cfg()
        };
        assert!(matches!(train_sgns(&[sent("a b")], &cfg), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn vocabulary_is_frequency_sorted() {
        let v = build_vocab(&[sent("b a c a"), sent("c a")], 1).unwrap();
        assert_eq!(v.tokens(), &["a", "c", "b"]);
        assert_eq!(v.counts(), &[3, 2, 1]);
        let v = build_vocab(&[sent("b a c a")], 2).unwrap();
        assert_eq!(v.tokens(), &["a"]);
    }

    #[test]
    fn shared_context_words_become_neighbours() {
        // eng:a and fra:x appear in the same contexts; the b* words never do
        let mut corpus: Vec<Vec<String>> = Vec::new();
        for i in 0..500 {
            let head = if i % 2 == 0 { "eng:a" } else { "fra:x" };
            corpus.push(sent(&format!("{head} eng:k{}", i % 5)));
        }
        for i in 0..500 {
            corpus.push(sent(&format!("eng:b{} eng:c{}", i % 10, (i + 3) % 10)));
        }
        let cfg = SgnsConfig {
            dim: 20,
            window: 1,
            epochs: 5,
            seed: 42,
            ..SgnsConfig::default()
        };
        let space = train_sgns(&corpus, &cfg).unwrap().into_space();
        let a = space.lookup("eng:a").unwrap();
        let best = space
            .vocab()
            .tokens()
            .iter()
            .filter(|t| t.as_str() != "eng:a")
            .max_by(|x, y| cosine(a, space.lookup(x).unwrap()).total_cmp(&cosine(a, space.lookup(y).unwrap())))
            .unwrap();
        assert_eq!(best, "fra:x");
    }

    #[test]
    fn repeated_pair_are_neighbours() {
        let corpus = vec![sent("eng:a fra:x"); 1000];
        let space = train_sgns(&corpus, &small_cfg()).unwrap().into_space();
        assert_eq!(space.len(), 2);
        let a = space.lookup("eng:a").unwrap();
        let x = space.lookup("fra:x").unwrap();
        assert!(cosine(a, x).is_finite());
        let others: Vec<&String> = space
            .vocab()
            .tokens()
            .iter()
            .filter(|t| t.as_str() != "eng:a")
            .collect();
        assert_eq!(others, ["fra:x"]);
    }

    #[test]
    fn ratio_aligns_ciphered_words() {
        // target word i is the cipher of source word (7i + 3) mod 20
        let cipher = |i: usize| (7 * i + 3) % 20;
        let mut rng = Rng::new(5);
        let pairs: Vec<(Vec<String>, Vec<String>)> = (0..3000)
            .map(|_| {
                let t = rng.below(4) * 5;
                let ids: Vec<usize> = (0..4).map(|_| t + rng.below(5)).collect();
                (
                    ids.iter().map(|i| format!("w{i}")).collect(),
                    ids.iter().map(|&i| format!("c{}", cipher(i))).collect(),
                )
            })
            .collect();
        let corpus =
            ParallelCorpus::from_token_pairs(pairs, LangTag::new("eng").unwrap(), LangTag::new("fra").unwrap())
                .unwrap();
        let cfg = SgnsConfig {
            dim: 16,
            window: 2,
            epochs: 3,
            seed: 3,
            ..SgnsConfig::default()
        };
        let space = embed_ratio(&corpus, &cfg).unwrap().into_space();
        let v = |t: String| space.lookup(&t).unwrap().to_vec();
        let (mut aligned, mut unrelated) = (0.0, 0.0);
        for i in 0..20 {
            aligned += cosine(&v(format!("eng:w{i}")), &v(format!("fra:c{}", cipher(i))));
            unrelated += cosine(&v(format!("eng:w{i}")), &v(format!("fra:c{}", cipher((i + 10) % 20))));
        }
        assert!(aligned > unrelated, "{aligned} vs {unrelated}");
    }

    #[test]
    fn deterministic_given_seed() {
        let corpus = vec![sent("a b c d"), sent("b c d e"), sent("e a b")];
        let a = train_sgns(&corpus, &small_cfg()).unwrap();
        let b = train_sgns(&corpus, &small_cfg()).unwrap();
        assert_eq!(a.input, b.input);
        let c = train_sgns(
            &corpus,
            &SgnsConfig {
                seed: 12,
                ..small_cfg()
            },
        )
        .unwrap();
        assert_ne!(a.input, c.input);
    }

    #[test]
    fn training_reduces_loss() {
        let corpus: Vec<Vec<String>> = (0..200)
            .map(|i| {
                sent(&format!(
                    "w{} w{} w{} w{}",
                    i % 7,
                    (i + 1) % 7,
                    (i % 3) + 10,
                    (i % 5) + 20
                ))
            })
            .collect();
        let untrained = train_sgns(
            &corpus,
            &SgnsConfig {
                epochs: 0,
                ..small_cfg()
            },
        )
        .unwrap();
        let trained = train_sgns(&corpus, &small_cfg()).unwrap();
        let cfg = small_cfg();
        assert!(trained.mean_loss(&corpus, &cfg, 5) < untrained.mean_loss(&corpus, &cfg, 5));
    }

    #[test]
    fn pair_gradient_matches_finite_differences() {
        let mut rng = Rng::new(3);
        let d = 6;
        let k = 3;
        let params: Vec<f64> = (0..(2 + k) * d).map(|_| rng.normal() * 0.5).collect();
        let loss_of = |p: &[f64]| {
            let negs: Vec<&[f64]> = (0..k).map(|i| &p[(2 + i) * d..(3 + i) * d]).collect();
            sgns_pair_loss(&p[..d], &p[d..2 * d], &negs).loss
        };
        let negs: Vec<&[f64]> = (0..k).map(|i| &params[(2 + i) * d..(3 + i) * d]).collect();
        let g = sgns_pair_loss(&params[..d], &params[d..2 * d], &negs);
        let mut analytic = g.d_center.clone();
        analytic.extend(&g.d_context);
        for n in &g.d_negatives {
            analytic.extend(n);
        }
        let err = grad_check(loss_of, &analytic, &params, DEFAULT_EPS).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn hogwild_mode_trains() {
        let corpus: Vec<Vec<String>> = (0..400)
            .map(|i| sent(&format!("w{} w{} w{}", i % 5, (i + 1) % 5, i % 3 + 5)))
            .collect();
        let cfg = SgnsConfig {
            workers: 3,
            ..small_cfg()
        };
        let m = train_sgns(&corpus, &cfg).unwrap();
        assert!(m.input.is_finite());
        assert_eq!(m.epoch_losses.len(), 3);
    }

    #[test]
    fn subsampling_keeps_rare_words() {
        let v = build_vocab(&[sent("a a a a a a a a b")], 1).unwrap();
        let p = subsample_keep_probs(&v, Some(0.01), 9).unwrap();
        assert!(p[0] < p[1]);
        assert!(p[1] <= 1.0);
    }

    #[test]
    fn embed_random_vocabulary_is_prefixed_union() {
        let eng = LangTag::new("eng").unwrap();
        let fra = LangTag::new("fra").unwrap();
        let pc = ParallelCorpus::from_token_pairs(vec![(sent("a b"), sent("x"))], eng, fra).unwrap();
        let cfg = SgnsConfig { dim: 4, ..small_cfg() };
        let m = embed_random(&pc, &cfg, &mut Rng::new(1)).unwrap();
        let mut toks = m.vocab.tokens().to_vec();
        toks.sort();
        assert_eq!(toks, ["eng:a", "eng:b", "fra:x"]);
        let r = embed_ratio(&pc, &cfg).unwrap();
        assert_eq!(r.vocab.len(), 3);

        let m2 = embed_random(
            &pc,
            &SgnsConfig {
                seed: 99,
                ..cfg.clone()
            },
            &mut Rng::new(2),
        )
        .unwrap();
        assert_ne!(m.input, m2.input);
    }
}
