//! Metrics and experiment drivers.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::format_float;
use crate::nli::{embed_tokens, predict, train_nli, NliModel, TrainConfig};
use crate::numkit::Rng;
use crate::types::{Label, Lexicon, NliExample, ParallelCorpus, SentencePair};
use crate::xembed::{build_shared_space, EmbedConfig, Method};

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn accuracy(preds: &[Label], golds: &[Label]) -> Result<f64> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Counts indexed `[gold][predicted]` in [`Label::ALL`] order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_labels(preds: &[Label], golds: &[Label]) -> Self {
        let mut m = ConfusionMatrix::default();
        for (p, g) in preds.iter().zip(golds) {
            m.counts[g.index()][p.index()] += 1;
        }
        m
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn gold_count(&self, l: Label) -> u64 {
        self.counts[l.index()].iter().sum()
    }

    pub fn predicted_count(&self, l: Label) -> u64 {
        self.counts.iter().map(|r| r[l.index()]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold examples with this label.
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    /// In [`Label::ALL`] order.
    pub per_label: [LabelScores; 3],
    pub confusion: ConfusionMatrix,
}

impl F1Report {
    pub fn get(&self, l: Label) -> LabelScores {
        self.per_label[l.index()]
    }

    /// Micro-averaged F1 over the three classes.
    pub fn micro_f1(&self) -> f64 {
        let tp = self.confusion.correct() as f64;
        let (mut fp, mut fne) = (0.0, 0.0);
        for l in Label::ALL {
            let diag = self.confusion.counts[l.index()][l.index()] as f64;
            fp += self.confusion.predicted_count(l) as f64 - diag;
            fne += self.confusion.gold_count(l) as f64 - diag;
        }
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fne);
        harmonic(p, r)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else if p == r {
        // exact, where the general formula can be off by an ulp
        p
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One-vs-rest precision, recall and F1 per label; zero denominators give 0.
pub fn per_label_f1(preds: &[Label], golds: &[Label]) -> Result<F1Report> {
    check_lengths(preds.len(), golds.len())?;
    let confusion = ConfusionMatrix::from_labels(preds, golds);
    let per_label = Label::ALL.map(|l| {
        let tp = confusion.counts[l.index()][l.index()] as f64;
        let precision = ratio(tp, confusion.predicted_count(l) as f64);
        let recall = ratio(tp, confusion.gold_count(l) as f64);
        LabelScores {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support: confusion.gold_count(l),
        }
    });
    Ok(F1Report { per_label, confusion })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BleuReport {
    /// Modified precision of each order `1..=max_n`.
    pub precisions: Vec<f64>,
    /// Clipped n-gram matches and hypothesis n-gram totals per order.
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub brevity_penalty: f64,
    /// Corpus score in `[0, 100]`.
    pub bleu: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuReport {
    /// The score with the brevity penalty left out.
    pub fn without_brevity_penalty(&self) -> f64 {
        if self.precisions.contains(&0.0) {
            return 0.0;
        }
        let n = self.precisions.len() as f64;
        100.0 * (self.precisions.iter().map(|p| p.ln()).sum::<f64>() / n).exp()
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Single-reference corpus BLEU: clipped n-gram precisions for orders
/// `1..=max_n`, uniform geometric mean, brevity penalty `exp(1 − r/h)` when
/// `h ≤ r`; no smoothing.
pub fn bleu(hypotheses: &[Vec<String>], references: &[Vec<String>], max_n: usize) -> Result<BleuReport> {
    check_lengths(hypotheses.len(), references.len())?;
    if max_n == 0 {
        return Err(Error::Config("bleu max_n must be >= 1".into()));
    }
    let mut matches = vec![0u64; max_n];
    let mut totals = vec![0u64; max_n];
    let (mut hyp_len, mut ref_len) = (0u64, 0u64);
    for (hyp, reference) in hypotheses.iter().zip(references) {
        hyp_len += hyp.len() as u64;
        ref_len += reference.len() as u64;
        for n in 1..=max_n {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            for (gram, c) in &h {
                matches[n - 1] += (*c).min(r.get(gram).copied().unwrap_or(0));
                totals[n - 1] += c;
            }
        }
    }
    if hyp_len == 0 {
        return Err(Error::EmptyInput);
    }
    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| ratio(m as f64, t as f64))
        .collect();
    let brevity_penalty = if hyp_len <= ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let mut report = BleuReport {
        precisions,
        matches,
        totals,
        brevity_penalty,
        bleu: 0.0,
        hyp_len,
        ref_len,
    };
    // exact 100 when every precision and the penalty are 1
    let geo = report.without_brevity_penalty();
    report.bleu = if geo == 100.0 && brevity_penalty == 1.0 {
        100.0
    } else {
        brevity_penalty * geo
    };
    Ok(report)
}

impl BleuReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let _ = writeln!(out, "bleu\t{}", format_float(self.bleu));
        let _ = writeln!(out, "brevity_penalty\t{}", format_float(self.brevity_penalty));
        for (i, p) in self.precisions.iter().enumerate() {
            let _ = writeln!(out, "p{}\t{}", i + 1, format_float(*p));
        }
        let _ = writeln!(out, "hyp_len\t{}", self.hyp_len);
        let _ = writeln!(out, "ref_len\t{}", self.ref_len);
        out
    }

    pub fn to_text(&self) -> String {
        let ps: Vec<String> = self.precisions.iter().map(|p| format!("{:.4}", p)).collect();
        format!(
            "BLEU {:.2}  (BP {:.4}, ratio {:.4}, p = {})\n",
            self.bleu,
            self.brevity_penalty,
            self.hyp_len as f64 / self.ref_len.max(1) as f64,
            ps.join(" / ")
        )
    }
}

/// Result of [`evaluate_system`].
#[derive(Clone, Debug, PartialEq)]
pub struct SystemReport {
    pub examples: usize,
    pub accuracy: f64,
    pub f1: F1Report,
    /// OOV tokens over all tokens.
    pub oov_rate: f64,
    pub predictions: Vec<Label>,
}

/// Predicts every example (in parallel; results keep input order) and
/// aggregates accuracy, per-label F1 and the OOV rate.
pub fn evaluate_system(model: &NliModel, lex: &Lexicon<'_>, test: &[NliExample]) -> Result<SystemReport> {
    if test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let outcomes: Vec<(Label, usize, usize)> = test
        .par_iter()
        .map(|ex| {
            let (label, _) = predict(model, lex, &ex.premise, &ex.hypothesis)?;
            let oov = embed_tokens(lex, &ex.premise).1 + embed_tokens(lex, &ex.hypothesis).1;
            Ok((label, oov, ex.premise.len() + ex.hypothesis.len()))
        })
        .collect::<Result<_>>()?;
    let predictions: Vec<Label> = outcomes.iter().map(|o| o.0).collect();
    let golds: Vec<Label> = test.iter().map(|e| e.gold).collect();
    let oov: usize = outcomes.iter().map(|o| o.1).sum();
    let tokens: usize = outcomes.iter().map(|o| o.2).sum();
    Ok(SystemReport {
        examples: test.len(),
        accuracy: accuracy(&predictions, &golds)?,
        f1: per_label_f1(&predictions, &golds)?,
        oov_rate: ratio(oov as f64, tokens as f64),
        predictions,
    })
}

impl SystemReport {
    /// `key<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let _ = writeln!(out, "examples\t{}", self.examples);
        let _ = writeln!(out, "accuracy\t{}", format_float(self.accuracy));
        let _ = writeln!(out, "oov_rate\t{}", format_float(self.oov_rate));
        for l in Label::ALL {
            let s = self.f1.get(l);
            let _ = writeln!(out, "precision.{l}\t{}", format_float(s.precision));
            let _ = writeln!(out, "recall.{l}\t{}", format_float(s.recall));
            let _ = writeln!(out, "f1.{l}\t{}", format_float(s.f1));
            let _ = writeln!(out, "support.{l}\t{}", s.support);
        }
        for g in Label::ALL {
            for p in Label::ALL {
                let _ = writeln!(
                    out,
                    "confusion.{g}.{p}\t{}",
                    self.f1.confusion.counts[g.index()][p.index()]
                );
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "examples  {}", self.examples);
        let _ = writeln!(out, "accuracy  {:.2}%", 100.0 * self.accuracy);
        let _ = writeln!(out, "oov rate  {:.2}%", 100.0 * self.oov_rate);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<14} {:>9} {:>9} {:>9} {:>8}",
            "label", "precision", "recall", "f1", "support"
        );
        for l in Label::ALL {
            let s = self.f1.get(l);
            let _ = writeln!(
                out,
                "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                l.as_str(),
                s.precision,
                s.recall,
                s.f1,
                s.support
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<14} {:>14} {:>14} {:>14}",
            "gold \\ pred", "contradiction", "entailment", "neutral"
        );
        for g in Label::ALL {
            let c = self.f1.confusion.counts[g.index()];
            let _ = writeln!(out, "{:<14} {:>14} {:>14} {:>14}", g.as_str(), c[0], c[1], c[2]);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// Parallel sentence pairs used to build the space.
    pub size: usize,
    pub accuracy: f64,
}

/// How each curve point selects its parallel pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    /// The first `s` pairs.
    #[default]
    Prefix,
    /// `s` pairs drawn without replacement from one seeded permutation, so
    /// smaller samples are subsets of larger ones.
    Subsample(u64),
}

/// Everything a learning curve needs besides the sizes.
#[derive(Clone, Debug)]
pub struct CurveSetup<'a> {
    pub parallel: &'a ParallelCorpus,
    pub method: Method,
    pub embed: &'a EmbedConfig,
    pub nli: &'a TrainConfig,
    /// Source-language NLI training data.
    pub train: &'a [NliExample],
    /// Target-language test data.
    pub test: &'a [NliExample],
    pub sampling: Sampling,
    pub seed: u64,
}

/// For each size: build a shared space from that many parallel pairs, train
/// on the source side, evaluate on the target side.
pub fn learning_curve(setup: &CurveSetup<'_>, sizes: &[usize]) -> Result<Vec<CurvePoint>> {
    if sizes.is_empty() {
        return Err(Error::EmptySizes);
    }
    let available = setup.parallel.len();
    for &size in sizes {
        if size == 0 || size > available {
            return Err(Error::SizeOutOfRange { size, available });
        }
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "sizes must be strictly ascending, got {sizes:?}"
        )));
    }
    let order: Vec<usize> = match setup.sampling {
        Sampling::Prefix => (0..available).collect(),
        Sampling::Subsample(seed) => {
            let mut o: Vec<usize> = (0..available).collect();
            Rng::new(seed).derive("curve.subsample").shuffle(&mut o);
            o
        }
    };
    let src = setup.parallel.src_lang();
    let tgt = setup.parallel.tgt_lang();
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let pairs: Vec<SentencePair> = order[..size]
            .iter()
            .map(|&i| setup.parallel.pairs()[i].clone())
            .collect();
        let subset = ParallelCorpus::new(pairs, src.clone(), tgt.clone())?;
        let space = build_shared_space(setup.method, &subset, setup.embed, setup.seed)?;
        let trained = train_nli(setup.train, &Lexicon::new(&space, Some(src)), setup.nli)?;
        let tuned = trained.embeddings.as_ref().unwrap_or(&space);
        let report = evaluate_system(&trained.model, &Lexicon::new(tuned, Some(tgt)), setup.test)?;
        log::info!("curve: {size} pairs -> accuracy {:.4}", report.accuracy);
        points.push(CurvePoint {
            size,
            accuracy: report.accuracy,
        });
    }
    Ok(points)
}

/// Two-column TSV: `size<TAB>accuracy`.
pub fn render_curve(points: &[CurvePoint]) -> String {
    let mut out = String::from("size\taccuracy\n");
    for p in points {
        let _ = writeln!(out, "{}\t{}", p.size, format_float(p.accuracy));
    }
    out
}

/// Signed gap, in percentage points, between accuracy on machine-translated
/// and on manually translated test data (`100 · (mt − manual)`).
pub fn proxy_gap(acc_manual: f64, acc_machine_translated: f64) -> Result<f64> {
    for a in [acc_manual, acc_machine_translated] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::OutOfRange(a));
        }
    }
    Ok(100.0 * (acc_machine_translated - acc_manual))
}
