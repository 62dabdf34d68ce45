//! Additive bilingual compositional model trained with a margin loss.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Rng};
use crate::types::{EmbeddingSpace, ParallelCorpus, Vocabulary, DEFAULT_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct BicvmConfig {
    pub dim: usize,
    pub margin: f64,
    /// Negative target sentences sampled per aligned pair.
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for BicvmConfig {
    fn default() -> Self {
        BicvmConfig {
            dim: DEFAULT_DIM,
            margin: 1.0,
            negatives: 1,
            epochs: 5,
            lr: 0.01,
            l2: 1e-4,
            seed: 1,
        }
    }
}

/// Sparse gradient: parameter row -> gradient row, in row order.
pub type RowGrads = BTreeMap<usize, Vec<f64>>;

#[derive(Clone, Debug)]
pub struct BicvmModel {
    pub vocab: Vocabulary,
    pub vectors: Matrix,
    /// Mean per-pair objective of each epoch.
    pub epoch_losses: Vec<f64>,
}

impl BicvmModel {
    pub fn into_space(self) -> EmbeddingSpace {
        EmbeddingSpace::new(self.vocab, self.vectors).expect("consistent model")
    }

    /// Sum of the word vectors of `tokens` (prefixed); OOV tokens add nothing.
    pub fn compose(&self, tokens: &[String]) -> Vec<f64> {
        let mut out = vec![0.0; self.vectors.cols()];
        for t in tokens {
            if let Some(i) = self.vocab.index_of(t) {
                for (o, x) in out.iter_mut().zip(self.vectors.row(i)) {
                    *o += x;
                }
            }
        }
        out
    }
}

fn compose_ids(params: &Matrix, ids: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; params.cols()];
    for &i in ids {
        for (o, x) in out.iter_mut().zip(params.row(i)) {
            *o += x;
        }
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Objective of one aligned pair `(src, tgt)` against sampled negative
/// target sentences:
/// `Σ_neg max(0, m + ‖f(a) − g(b)‖² − ‖f(a) − g(b′)‖²) + l2 · Σ_rows ‖θ_row‖²`,
/// where the regularizer covers each distinct row the pair touches.
pub fn bicvm_pair_objective(
    params: &Matrix,
    src: &[usize],
    tgt: &[usize],
    negatives: &[Vec<usize>],
    margin: f64,
    l2: f64,
) -> (f64, RowGrads) {
    let d = params.cols();
    let fa = compose_ids(params, src);
    let gb = compose_ids(params, tgt);
    let pos = sq_dist(&fa, &gb);
    let mut grads: RowGrads = BTreeMap::new();
    let add = |ids: &[usize], g: &[f64], grads: &mut RowGrads| {
        for &i in ids {
            let row = grads.entry(i).or_insert_with(|| vec![0.0; d]);
            for (r, x) in row.iter_mut().zip(g) {
                *r += x;
            }
        }
    };

    let mut loss = 0.0;
    for neg in negatives {
        let gn = compose_ids(params, neg);
        let hinge = margin + pos - sq_dist(&fa, &gn);
        if hinge <= 0.0 {
            continue;
        }
        loss += hinge;
        // ∂/∂f(a) = 2(g(b′) − g(b)); ∂/∂g(b) = −2(f(a) − g(b)); ∂/∂g(b′) = 2(f(a) − g(b′))
        let d_fa: Vec<f64> = gn.iter().zip(&gb).map(|(n, b)| 2.0 * (n - b)).collect();
        let d_gb: Vec<f64> = fa.iter().zip(&gb).map(|(a, b)| -2.0 * (a - b)).collect();
        let d_gn: Vec<f64> = fa.iter().zip(&gn).map(|(a, n)| 2.0 * (a - n)).collect();
        add(src, &d_fa, &mut grads);
        add(tgt, &d_gb, &mut grads);
        add(neg, &d_gn, &mut grads);
    }

    let mut touched: Vec<usize> = src
        .iter()
        .chain(tgt)
        .chain(negatives.iter().flatten())
        .copied()
        .collect();
    touched.sort_unstable();
    touched.dedup();
    for &i in &touched {
        let row = params.row(i);
        loss += l2 * row.iter().map(|x| x * x).sum::<f64>();
        let g = grads.entry(i).or_insert_with(|| vec![0.0; d]);
        for (gi, x) in g.iter_mut().zip(row) {
            *gi += 2.0 * l2 * x;
        }
    }
    (loss, grads)
}

/// Trains prefixed word vectors for both languages of `parallel` with
/// per-pair SGD on [`bicvm_pair_objective`].
pub fn train_bicvm(parallel: &ParallelCorpus, cfg: &BicvmConfig) -> Result<BicvmModel> {
    if parallel.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if cfg.dim == 0 {
        return Err(Error::Config("bicvm dim must be >= 1".into()));
    }
    if cfg.margin <= 0.0 {
        return Err(Error::Config("bicvm margin must be > 0".into()));
    }

    let mut vocab = Vocabulary::new();
    let mut src_ids = Vec::with_capacity(parallel.len());
    let mut tgt_ids = Vec::with_capacity(parallel.len());
    for p in parallel.pairs() {
        let s = p
            .src_tokens
            .iter()
            .map(|t| vocab.observe(&p.src_lang.prefix(t)))
            .collect::<Result<Vec<_>>>()?;
        src_ids.push(s);
    }
    for p in parallel.pairs() {
        let t = p
            .tgt_tokens
            .iter()
            .map(|t| vocab.observe(&p.tgt_lang.prefix(t)))
            .collect::<Result<Vec<_>>>()?;
        tgt_ids.push(t);
    }

    let rng = Rng::new(cfg.seed);
    let mut init = rng.derive("init");
    let scale = 1.0 / (cfg.dim as f64).sqrt();
    let mut params = Matrix::from_fn(vocab.len(), cfg.dim, |_, _| init.uniform_range(-0.5, 0.5) * scale);

    let n = parallel.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut train = rng.derive("train");
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        train.shuffle(&mut order);
        let mut total = 0.0;
        for &i in &order {
            let negs: Vec<Vec<usize>> = (0..cfg.negatives)
                .map(|_| {
                    let j = if n == 1 {
                        0
                    } else {
                        let j = train.below(n - 1);
                        if j >= i {
                            j + 1
                        } else {
                            j
                        }
                    };
                    tgt_ids[j].clone()
                })
                .collect();
            let (loss, grads) = bicvm_pair_objective(&params, &src_ids[i], &tgt_ids[i], &negs, cfg.margin, cfg.l2);
            total += loss;
            for (row, g) in grads {
                for (p, gi) in params.row_mut(row).iter_mut().zip(&g) {
                    *p -= cfg.lr * gi;
                }
            }
        }
        epoch_losses.push(total / n as f64);
    }

    Ok(BicvmModel {
        vocab,
        vectors: params,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{grad_check, DEFAULT_EPS};
    use crate::types::LangTag;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        let split = |x: &str| x.split(' ').map(String::from).collect::<Vec<_>>();
        ParallelCorpus::from_token_pairs(
            pairs.iter().map(|(a, b)| (split(a), split(b))),
            LangTag::new("eng").unwrap(),
            LangTag::new("fra").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_epochs_is_seeded_init() {
        let c = corpus(&[("a b", "x y"), ("c", "z")]);
        let cfg = BicvmConfig {
            dim: 4,
            epochs: 0,
            ..BicvmConfig::default()
        };
        let a = train_bicvm(&c, &cfg).unwrap();
        let b = train_bicvm(&c, &cfg).unwrap();
        assert_eq!(a.vectors, b.vectors);
        assert!(a.epoch_losses.is_empty());
        assert_eq!(
            a.vocab.tokens(),
            &["eng:a", "eng:b", "eng:c", "fra:x", "fra:y", "fra:z"]
        );
    }

    #[test]
    fn empty_corpus() {
        let c = corpus(&[]);
        assert!(matches!(
            train_bicvm(&c, &BicvmConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn objective_gradient_matches_finite_differences() {
        let mut rng = Rng::new(9);
        let params = Matrix::from_fn(6, 5, |_, _| rng.normal());
        let src = vec![0, 1, 1];
        let tgt = vec![3, 4];
        let negs = vec![vec![5, 2], vec![4]];
        let margin = 50.0; // keep every hinge active, away from the kink
        let (loss, grads) = bicvm_pair_objective(&params, &src, &tgt, &negs, margin, 0.01);
        assert!(loss > 0.0);
        let mut dense = vec![0.0; 30];
        for (r, g) in &grads {
            dense[r * 5..(r + 1) * 5].copy_from_slice(g);
        }
        let f = |x: &[f64]| {
            let m = Matrix::from_vec(6, 5, x.to_vec()).unwrap();
            bicvm_pair_objective(&m, &src, &tgt, &negs, margin, 0.01).0
        };
        let err = grad_check(f, &dense, params.data(), DEFAULT_EPS).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn inactive_hinge_leaves_only_regularizer() {
        let params = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![10.0]]).unwrap();
        let (loss, grads) = bicvm_pair_objective(&params, &[0], &[1], &[vec![2]], 1.0, 0.0);
        assert_eq!(loss, 0.0);
        assert!(grads.values().all(|g| g.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn training_separates_aligned_from_mismatched() {
        let words = ["a", "b", "c", "d", "e", "f", "g", "h"];
        let mut pairs = Vec::new();
        let mut rng = Rng::new(4);
        for _ in 0..300 {
            let len = 2 + rng.below(3);
            let src: Vec<&str> = (0..len).map(|_| words[rng.below(words.len())]).collect();
            let tgt: Vec<String> = src.iter().map(|w| format!("{w}{w}")).collect();
            pairs.push((src.join(" "), tgt.join(" ")));
        }
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let c = corpus(&refs);
        let cfg = BicvmConfig {
            dim: 16,
            epochs: 5,
            lr: 0.02,
            seed: 3,
            ..BicvmConfig::default()
        };
        let m = train_bicvm(&c, &cfg).unwrap();
        assert!(m.epoch_losses.last().unwrap() < m.epoch_losses.first().unwrap());
        let ps = c.pairs();
        let pre = |toks: &[String], l: &LangTag| toks.iter().map(|t| l.prefix(t)).collect::<Vec<_>>();
        let mut aligned = 0.0;
        let mut mismatched = 0.0;
        for i in 0..ps.len() {
            let j = (i + 7) % ps.len();
            let fa = m.compose(&pre(&ps[i].src_tokens, &ps[i].src_lang));
            let gb = m.compose(&pre(&ps[i].tgt_tokens, &ps[i].tgt_lang));
            let gn = m.compose(&pre(&ps[j].tgt_tokens, &ps[j].tgt_lang));
            aligned += sq_dist(&fa, &gb).sqrt();
            mismatched += sq_dist(&fa, &gn).sqrt();
        }
        assert!(aligned < mismatched, "{aligned} vs {mismatched}");
    }
}
