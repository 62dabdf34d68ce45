use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{example_gradient_with, Dropout, NliModel};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Optimizer, OptimizerSpec, Rng};
use crate::types::{EmbeddingSpace, Lexicon, NliExample};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    /// Dropout rate inside F, G and H during training.
    pub dropout: f64,
    pub optimizer: OptimizerSpec,
    pub seed: u64,
    /// Keep input vectors fixed (only the projection and above learn).
    pub freeze_embeddings: bool,
    /// Threads computing per-example gradients within a batch. Results are
    /// reproducible for a fixed worker count.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 32,
            hidden: 200,
            dropout: 0.2,
            optimizer: OptimizerSpec::default(),
            seed: 1,
            freeze_embeddings: true,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.batch_size == 0 || self.hidden == 0 || self.workers == 0 {
            return Err(Error::Config("batch_size, hidden and workers must be >= 1".into()));
        }
        if self.optimizer.learning_rate.is_nan() || self.optimizer.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainedNli {
    pub model: NliModel,
    /// Mean training cross-entropy (with dropout) of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Updated copy of the embedding space when embeddings were not frozen.
    pub embeddings: Option<EmbeddingSpace>,
}

struct Encoded {
    premise: Vec<Option<usize>>,
    hypothesis: Vec<Option<usize>>,
    gold: crate::types::Label,
}

fn gather(table: &Matrix, ids: &[Option<usize>]) -> Matrix {
    let mut m = Matrix::zeros(ids.len(), table.cols());
    for (i, id) in ids.iter().enumerate() {
        if let Some(r) = id {
            m.row_mut(i).copy_from_slice(table.row(*r));
        }
    }
    m
}

struct ChunkResult {
    loss: f64,
    grad: Vec<f64>,
    emb: BTreeMap<usize, Vec<f64>>,
}

fn chunk_gradient(
    model: &NliModel,
    table: &Matrix,
    data: &[Encoded],
    items: &[(usize, u64)],
    dropout: f64,
    tune: bool,
) -> Result<ChunkResult> {
    let mut out = ChunkResult {
        loss: 0.0,
        grad: vec![0.0; model.params().len()],
        emb: BTreeMap::new(),
    };
    for &(idx, seed) in items {
        let ex = &data[idx];
        let a = gather(table, &ex.premise);
        let b = gather(table, &ex.hypothesis);
        let g = example_gradient_with(model, &a, &b, ex.gold, Dropout::new(dropout, Rng::new(seed)))?;
        out.loss += g.loss;
        out.grad.iter_mut().zip(&g.params).for_each(|(s, x)| *s += x);
        if tune {
            for (ids, d) in [(&ex.premise, &g.premise), (&ex.hypothesis, &g.hypothesis)] {
                for (i, id) in ids.iter().enumerate() {
                    if let Some(r) = id {
                        let acc = out.emb.entry(*r).or_insert_with(|| vec![0.0; table.cols()]);
                        acc.iter_mut().zip(d.row(i)).for_each(|(s, x)| *s += x);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Mini-batch training on mean cross-entropy.
///
/// Every example's tokens are looked up through `lex` (OOV tokens are zero
/// vectors). All randomness (initialization, shuffling, dropout masks)
/// derives from `cfg.seed`.
pub fn train_nli(train: &[NliExample], lex: &Lexicon<'_>, cfg: &TrainConfig) -> Result<TrainedNli> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;

    let encode = |toks: &[String]| toks.iter().map(|t| lex.index_of(t)).collect::<Vec<_>>();
    let data: Vec<Encoded> = train
        .iter()
        .map(|ex| Encoded {
            premise: encode(&ex.premise),
            hypothesis: encode(&ex.hypothesis),
            gold: ex.gold,
        })
        .collect();
    let blind = data
        .iter()
        .filter(|e| e.premise.iter().chain(&e.hypothesis).all(Option::is_none))
        .count();
    if blind > 0 {
        log::warn!("{blind} training examples have no in-vocabulary token");
    }

    let root = Rng::new(cfg.seed);
    let mut model = NliModel::seeded(lex.dim(), cfg.hidden, &mut root.derive("nli.init"))?;
    model.freeze_embeddings = cfg.freeze_embeddings;
    let mut shuffle = root.derive("nli.shuffle");
    let mut masks = root.derive("nli.dropout");
    let mut opt = Optimizer::new(cfg.optimizer);
    let mut table = lex.space.matrix().clone();
    let tune = !cfg.freeze_embeddings;
    let mut row_opts: BTreeMap<usize, Optimizer> = BTreeMap::new();

    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        shuffle.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let items: Vec<(usize, u64)> = batch.iter().map(|&i| (i, masks.next_u64())).collect();
            let results: Vec<ChunkResult> = match &pool {
                None => vec![chunk_gradient(&model, &table, &data, &items, cfg.dropout, tune)?],
                Some(pool) => {
                    let per = items.len().div_ceil(cfg.workers);
                    pool.install(|| {
                        items
                            .par_chunks(per)
                            .map(|c| chunk_gradient(&model, &table, &data, c, cfg.dropout, tune))
                            .collect::<Result<Vec<_>>>()
                    })?
                }
            };

            let scale = 1.0 / batch.len() as f64;
            let mut grad = vec![0.0; model.params().len()];
            let mut emb: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for r in results {
                total += r.loss;
                grad.iter_mut().zip(&r.grad).for_each(|(s, x)| *s += x);
                for (row, g) in r.emb {
                    match emb.get_mut(&row) {
                        Some(acc) => acc.iter_mut().zip(&g).for_each(|(s, x)| *s += x),
                        None => {
                            emb.insert(row, g);
                        }
                    }
                }
            }
            grad.iter_mut().for_each(|g| *g *= scale);
            opt.step(model.params_mut(), &grad)?;
            for (row, mut g) in emb {
                g.iter_mut().for_each(|x| *x *= scale);
                let o = row_opts.entry(row).or_insert_with(|| Optimizer::new(cfg.optimizer));
                o.step(table.row_mut(row), &g)?;
            }
        }
        let mean = total / data.len() as f64;
        log::debug!("epoch {} loss {mean:.6}", epoch_losses.len() + 1);
        if !mean.is_finite() {
            return Err(Error::NonFiniteValue(format!(
                "training loss in epoch {}",
                epoch_losses.len() + 1
            )));
        }
        epoch_losses.push(mean);
    }

    let embeddings = if tune {
        Some(EmbeddingSpace::new(lex.space.vocab().clone(), table)?)
    } else {
        None
    };
    Ok(TrainedNli {
        model,
        epoch_losses,
        embeddings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nli::predict;
    use crate::numkit::OptimizerKind;
    use crate::types::{Label, Vocabulary};

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn space(words: &[&str], dim: usize, seed: u64) -> EmbeddingSpace {
        let mut rng = Rng::new(seed);
        let m = Matrix::from_fn(words.len(), dim, |_, _| rng.normal());
        EmbeddingSpace::new(Vocabulary::from_tokens(words.iter().copied()).unwrap(), m).unwrap()
    }

    fn tiny_task() -> (Vec<NliExample>, EmbeddingSpace) {
        let words = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
        let sp = space(&words, 6, 3);
        let rows = [
            ("a b", "a", Label::Entailment),
            ("c d", "c d", Label::Entailment),
            ("e f", "f", Label::Entailment),
            ("a b", "g h", Label::Contradiction),
            ("c d", "i", Label::Contradiction),
            ("e f", "j a", Label::Contradiction),
            ("a b", "a i", Label::Neutral),
            ("g h", "g c", Label::Neutral),
            ("i j", "j e", Label::Neutral),
            ("b c", "b", Label::Entailment),
        ];
        let ex = rows
            .iter()
            .map(|(p, h, l)| NliExample::new(toks(p), toks(h), *l).unwrap())
            .collect();
        (ex, sp)
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            epochs: 300,
            batch_size: 4,
            hidden: 16,
            dropout: 0.0,
            optimizer: OptimizerSpec {
                kind: OptimizerKind::Adagrad,
                learning_rate: 0.05,
            },
            seed: 7,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn overfits_ten_examples() {
        let (ex, sp) = tiny_task();
        let lex = Lexicon::from(&sp);
        let t = train_nli(&ex, &lex, &cfg()).unwrap();
        let correct = ex
            .iter()
            .filter(|e| predict(&t.model, &lex, &e.premise, &e.hypothesis).unwrap().0 == e.gold)
            .count();
        assert_eq!(
            correct,
            ex.len(),
            "losses {:?}",
            &t.epoch_losses[t.epoch_losses.len() - 3..]
        );
        assert!(t.epoch_losses.last().unwrap() < &t.epoch_losses[0]);
        assert!(t.embeddings.is_none());
    }

    #[test]
    fn zero_epochs_returns_seeded_init() {
        let (ex, sp) = tiny_task();
        let lex = Lexicon::from(&sp);
        let c = TrainConfig { epochs: 0, ..cfg() };
        let t = train_nli(&ex, &lex, &c).unwrap();
        let init = NliModel::seeded(6, 16, &mut Rng::new(7).derive("nli.init")).unwrap();
        assert_eq!(t.model, init);
        assert!(t.epoch_losses.is_empty());
    }

    #[test]
    fn deterministic_and_worker_count_stable() {
        let (ex, sp) = tiny_task();
        let lex = Lexicon::from(&sp);
        let c = TrainConfig {
            epochs: 5,
            dropout: 0.2,
            ..cfg()
        };
        let a = train_nli(&ex, &lex, &c).unwrap();
        let b = train_nli(&ex, &lex, &c).unwrap();
        assert_eq!(a.model, b.model);
        let w = TrainConfig {
            workers: 3,
            ..c.clone()
        };
        let p = train_nli(&ex, &lex, &w).unwrap();
        let q = train_nli(&ex, &lex, &w).unwrap();
        assert_eq!(p.model, q.model);
        for (x, y) in a.model.params().iter().zip(p.model.params()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn unfrozen_embeddings_move() {
        let (ex, sp) = tiny_task();
        let lex = Lexicon::from(&sp);
        let c = TrainConfig {
            epochs: 3,
            freeze_embeddings: false,
            ..cfg()
        };
        let t = train_nli(&ex, &lex, &c).unwrap();
        let tuned = t.embeddings.unwrap();
        assert_eq!(tuned.vocab(), sp.vocab());
        assert_ne!(tuned.matrix(), sp.matrix());
        assert!(!t.model.freeze_embeddings);
    }

    #[test]
    fn errors() {
        let (ex, sp) = tiny_task();
        let lex = Lexicon::from(&sp);
        assert!(matches!(train_nli(&[], &lex, &cfg()), Err(Error::EmptyDataset)));
        let bad = TrainConfig { dropout: 1.0, ..cfg() };
        assert!(matches!(train_nli(&ex, &lex, &bad), Err(Error::Config(_))));
    }
}
