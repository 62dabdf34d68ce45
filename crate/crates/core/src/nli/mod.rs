//! Embedding-only decomposable attention: attend, compare, aggregate.
//!
//! The classifier never sees token strings, only vectors looked up through
//! a [`Lexicon`], which is what lets a model trained on one language run on
//! another language that shares the embedding space.

mod model;
mod train;

pub use model::{Block, FeedForward, NliModel, NUM_LABELS};
pub use train::{train_nli, TrainConfig, TrainedNli};

use model::{add_to, affine, affine_t, outer_acc, relu_in_place, FfLayout};

use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, softmax_in_place, Matrix, Rng};
use crate::types::{Label, Lexicon};

/// Soft alignment between the two sentences of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionTrace {
    /// `e_ij = F(ā_i) · F(b̄_j)`, premise × hypothesis.
    pub scores: Matrix,
    /// Row `i`: softmax over `j` of `e_i·` (premise × hypothesis).
    pub premise_weights: Matrix,
    /// Row `j`: softmax over `i` of `e_·j` (hypothesis × premise).
    pub hypothesis_weights: Matrix,
    /// Projected premise vectors `ā_i`.
    pub premise_proj: Matrix,
    /// Projected hypothesis vectors `b̄_j`.
    pub hypothesis_proj: Matrix,
    /// Hypothesis phrase aligned to each premise token.
    pub beta: Matrix,
    /// Premise phrase aligned to each hypothesis token.
    pub alpha: Matrix,
}

/// Output of [`forward`].
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub probs: [f64; NUM_LABELS],
    pub trace: AttentionTrace,
}

/// Loss and gradients of one example.
#[derive(Clone, Debug)]
pub struct ExampleGradient {
    pub loss: f64,
    /// Same layout as [`NliModel::params`].
    pub params: Vec<f64>,
    /// Gradient with respect to each input (embedding) row.
    pub premise: Matrix,
    pub hypothesis: Matrix,
}

/// Inverted dropout on a vector, with its own seeded stream.
pub(crate) struct Dropout {
    keep: f64,
    rng: Rng,
}

impl Dropout {
    pub(crate) fn new(rate: f64, rng: Rng) -> Option<Self> {
        (rate > 0.0).then_some(Dropout { keep: 1.0 - rate, rng })
    }

    fn apply(&mut self, v: &mut [f64]) -> Vec<f64> {
        let scale = 1.0 / self.keep;
        let mask: Vec<f64> = v
            .iter()
            .map(|_| if self.rng.bernoulli(self.keep) { scale } else { 0.0 })
            .collect();
        for (x, m) in v.iter_mut().zip(&mask) {
            *x *= m;
        }
        mask
    }
}

struct FfCache {
    /// Input after dropout.
    x: Vec<f64>,
    z1: Vec<f64>,
    /// ReLU(z1) after dropout.
    h1: Vec<f64>,
    z2: Vec<f64>,
    y: Vec<f64>,
    m1: Option<Vec<f64>>,
    m2: Option<Vec<f64>>,
}

fn ff_forward(p: &[f64], l: &FfLayout, input: &[f64], drop: &mut Option<Dropout>) -> FfCache {
    let mut x = input.to_vec();
    let m1 = drop.as_mut().map(|d| d.apply(&mut x));
    let z1 = affine(p, l.w1, Some(l.b1), &x);
    let mut h1 = z1.clone();
    relu_in_place(&mut h1);
    let m2 = drop.as_mut().map(|d| d.apply(&mut h1));
    let z2 = affine(p, l.w2, Some(l.b2), &h1);
    let mut y = z2.clone();
    relu_in_place(&mut y);
    FfCache {
        x,
        z1,
        h1,
        z2,
        y,
        m1,
        m2,
    }
}

/// Accumulates parameter gradients and returns the input gradient.
fn ff_backward(p: &[f64], l: &FfLayout, c: &FfCache, dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
    let dz2: Vec<f64> = dy
        .iter()
        .zip(&c.z2)
        .map(|(g, z)| if *z > 0.0 { *g } else { 0.0 })
        .collect();
    outer_acc(grad, l.w2, &dz2, &c.h1);
    add_to(grad, l.b2, &dz2);
    let mut dh1 = affine_t(p, l.w2, &dz2);
    if let Some(m) = &c.m2 {
        dh1.iter_mut().zip(m).for_each(|(g, m)| *g *= m);
    }
    let dz1: Vec<f64> = dh1
        .iter()
        .zip(&c.z1)
        .map(|(g, z)| if *z > 0.0 { *g } else { 0.0 })
        .collect();
    outer_acc(grad, l.w1, &dz1, &c.x);
    add_to(grad, l.b1, &dz1);
    let mut dx = affine_t(p, l.w1, &dz1);
    if let Some(m) = &c.m1 {
        dx.iter_mut().zip(m).for_each(|(g, m)| *g *= m);
    }
    dx
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn to_matrix(rows: &[Vec<f64>], cols: usize) -> Matrix {
    let data = rows.iter().flatten().copied().collect();
    Matrix::from_vec(rows.len(), cols, data).expect("uniform rows")
}

fn check_inputs(model: &NliModel, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.rows() == 0 || b.rows() == 0 {
        return Err(Error::EmptySentence);
    }
    for m in [a, b] {
        if m.cols() != model.dim() {
            return Err(Error::DimMismatch {
                expected: model.dim(),
                found: m.cols(),
            });
        }
    }
    Ok(())
}

struct AttendCache {
    pa: Vec<Vec<f64>>,
    pb: Vec<Vec<f64>>,
    fa: Vec<FfCache>,
    fb: Vec<FfCache>,
    e: Matrix,
    /// Softmax over hypothesis tokens, premise × hypothesis.
    wb: Matrix,
    /// Softmax over premise tokens, stored premise × hypothesis.
    wa: Matrix,
    beta: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
}

fn attend_cached(model: &NliModel, a: &Matrix, b: &Matrix, drop: &mut Option<Dropout>) -> AttendCache {
    let p = model.params();
    let l = &model.layout;
    let pa: Vec<Vec<f64>> = (0..a.rows()).map(|i| affine(p, l.proj, None, a.row(i))).collect();
    let pb: Vec<Vec<f64>> = (0..b.rows()).map(|j| affine(p, l.proj, None, b.row(j))).collect();
    let fa: Vec<FfCache> = pa.iter().map(|x| ff_forward(p, &l.f, x, drop)).collect();
    let fb: Vec<FfCache> = pb.iter().map(|x| ff_forward(p, &l.f, x, drop)).collect();
    let (la, lb) = (pa.len(), pb.len());
    let e = Matrix::from_fn(la, lb, |i, j| dot(&fa[i].y, &fb[j].y));

    let mut wb = e.clone();
    for i in 0..la {
        softmax_in_place(wb.row_mut(i));
    }
    let mut wa = Matrix::zeros(la, lb);
    let mut col = vec![0.0; la];
    for j in 0..lb {
        for (i, c) in col.iter_mut().enumerate() {
            *c = e.get(i, j);
        }
        softmax_in_place(&mut col);
        for (i, c) in col.iter().enumerate() {
            wa.set(i, j, *c);
        }
    }

    let h = model.hidden();
    let beta: Vec<Vec<f64>> = (0..la)
        .map(|i| {
            let mut v = vec![0.0; h];
            for (j, pbj) in pb.iter().enumerate() {
                axpy(wb.get(i, j), pbj, &mut v);
            }
            v
        })
        .collect();
    let alpha: Vec<Vec<f64>> = (0..lb)
        .map(|j| {
            let mut v = vec![0.0; h];
            for (i, pai) in pa.iter().enumerate() {
                axpy(wa.get(i, j), pai, &mut v);
            }
            v
        })
        .collect();
    AttendCache {
        pa,
        pb,
        fa,
        fb,
        e,
        wb,
        wa,
        beta,
        alpha,
    }
}

impl AttendCache {
    fn trace(&self, h: usize) -> AttentionTrace {
        AttentionTrace {
            scores: self.e.clone(),
            premise_weights: self.wb.clone(),
            hypothesis_weights: self.wa.transpose(),
            premise_proj: to_matrix(&self.pa, h),
            hypothesis_proj: to_matrix(&self.pb, h),
            beta: to_matrix(&self.beta, h),
            alpha: to_matrix(&self.alpha, h),
        }
    }
}

struct Pass {
    att: AttendCache,
    ga: Vec<FfCache>,
    gb: Vec<FfCache>,
    hc: FfCache,
    scores: [f64; NUM_LABELS],
    probs: [f64; NUM_LABELS],
}

fn sum_outputs(caches: &[FfCache], h: usize) -> Vec<f64> {
    let mut v = vec![0.0; h];
    for c in caches {
        for (s, y) in v.iter_mut().zip(&c.y) {
            *s += y;
        }
    }
    v
}

fn head(model: &NliModel, z: &[f64]) -> [f64; NUM_LABELS] {
    let s = affine(model.params(), model.layout.out_w, Some(model.layout.out_b), z);
    [s[0], s[1], s[2]]
}

fn run(model: &NliModel, a: &Matrix, b: &Matrix, mut drop: Option<Dropout>) -> Pass {
    let p = model.params();
    let l = &model.layout;
    let h = model.hidden();
    let att = attend_cached(model, a, b, &mut drop);
    let ga: Vec<FfCache> = att
        .pa
        .iter()
        .zip(&att.beta)
        .map(|(x, y)| ff_forward(p, &l.g, &concat(x, y), &mut drop))
        .collect();
    let gb: Vec<FfCache> = att
        .pb
        .iter()
        .zip(&att.alpha)
        .map(|(x, y)| ff_forward(p, &l.g, &concat(x, y), &mut drop))
        .collect();
    let v = concat(&sum_outputs(&ga, h), &sum_outputs(&gb, h));
    let hc = ff_forward(p, &l.h, &v, &mut drop);
    let scores = head(model, &hc.y);
    let mut probs = scores;
    softmax_in_place(&mut probs);
    Pass {
        att,
        ga,
        gb,
        hc,
        scores,
        probs,
    }
}

fn cross_entropy(scores: &[f64; NUM_LABELS], gold: Label) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    lse - scores[gold.index()]
}

fn backward(model: &NliModel, a: &Matrix, b: &Matrix, pass: &Pass, gold: Label) -> ExampleGradient {
    let p = model.params();
    let l = &model.layout;
    let h = model.hidden();
    let mut grad = vec![0.0; p.len()];
    let att = &pass.att;
    let (la, lb) = (att.pa.len(), att.pb.len());

    let mut ds = pass.probs;
    ds[gold.index()] -= 1.0;
    outer_acc(&mut grad, l.out_w, &ds, &pass.hc.y);
    add_to(&mut grad, l.out_b, &ds);
    let dz = affine_t(p, l.out_w, &ds);
    let dv = ff_backward(p, &l.h, &pass.hc, &dz, &mut grad);
    let (dv1, dv2) = dv.split_at(h);

    let mut dpa = vec![vec![0.0; h]; la];
    let mut dpb = vec![vec![0.0; h]; lb];
    let mut dbeta = Vec::with_capacity(la);
    let mut dalpha = Vec::with_capacity(lb);
    for (i, c) in pass.ga.iter().enumerate() {
        let dx = ff_backward(p, &l.g, c, dv1, &mut grad);
        dpa[i].iter_mut().zip(&dx[..h]).for_each(|(g, x)| *g += x);
        dbeta.push(dx[h..].to_vec());
    }
    for (j, c) in pass.gb.iter().enumerate() {
        let dx = ff_backward(p, &l.g, c, dv2, &mut grad);
        dpb[j].iter_mut().zip(&dx[..h]).for_each(|(g, x)| *g += x);
        dalpha.push(dx[h..].to_vec());
    }

    let mut de = Matrix::zeros(la, lb);
    let mut dw = vec![0.0; lb];
    for i in 0..la {
        for j in 0..lb {
            dw[j] = dot(&dbeta[i], &att.pb[j]);
            axpy(att.wb.get(i, j), &dbeta[i], &mut dpb[j]);
        }
        let s: f64 = (0..lb).map(|j| att.wb.get(i, j) * dw[j]).sum();
        for j in 0..lb {
            let w = att.wb.get(i, j);
            de.set(i, j, de.get(i, j) + w * (dw[j] - s));
        }
    }
    let mut du = vec![0.0; la];
    for j in 0..lb {
        for i in 0..la {
            du[i] = dot(&dalpha[j], &att.pa[i]);
            axpy(att.wa.get(i, j), &dalpha[j], &mut dpa[i]);
        }
        let s: f64 = (0..la).map(|i| att.wa.get(i, j) * du[i]).sum();
        for i in 0..la {
            let w = att.wa.get(i, j);
            de.set(i, j, de.get(i, j) + w * (du[i] - s));
        }
    }

    for i in 0..la {
        let mut dfa = vec![0.0; h];
        for j in 0..lb {
            axpy(de.get(i, j), &att.fb[j].y, &mut dfa);
        }
        let dx = ff_backward(p, &l.f, &att.fa[i], &dfa, &mut grad);
        dpa[i].iter_mut().zip(&dx).for_each(|(g, x)| *g += x);
    }
    for j in 0..lb {
        let mut dfb = vec![0.0; h];
        for i in 0..la {
            axpy(de.get(i, j), &att.fa[i].y, &mut dfb);
        }
        let dx = ff_backward(p, &l.f, &att.fb[j], &dfb, &mut grad);
        dpb[j].iter_mut().zip(&dx).for_each(|(g, x)| *g += x);
    }

    let d = model.dim();
    let mut da = Matrix::zeros(la, d);
    let mut db = Matrix::zeros(lb, d);
    for i in 0..la {
        outer_acc(&mut grad, l.proj, &dpa[i], a.row(i));
        da.row_mut(i).copy_from_slice(&affine_t(p, l.proj, &dpa[i]));
    }
    for j in 0..lb {
        outer_acc(&mut grad, l.proj, &dpb[j], b.row(j));
        db.row_mut(j).copy_from_slice(&affine_t(p, l.proj, &dpb[j]));
    }

    ExampleGradient {
        loss: cross_entropy(&pass.scores, gold),
        params: grad,
        premise: da,
        hypothesis: db,
    }
}

pub(crate) fn example_gradient_with(
    model: &NliModel,
    premise: &Matrix,
    hypothesis: &Matrix,
    gold: Label,
    drop: Option<Dropout>,
) -> Result<ExampleGradient> {
    check_inputs(model, premise, hypothesis)?;
    let pass = run(model, premise, hypothesis, drop);
    Ok(backward(model, premise, hypothesis, &pass, gold))
}

/// Cross-entropy of one example and its exact gradient (dropout off).
pub fn example_gradient(
    model: &NliModel,
    premise: &Matrix,
    hypothesis: &Matrix,
    gold: Label,
) -> Result<ExampleGradient> {
    example_gradient_with(model, premise, hypothesis, gold, None)
}

/// Cross-entropy of one example (dropout off).
pub fn example_loss(model: &NliModel, premise: &Matrix, hypothesis: &Matrix, gold: Label) -> Result<f64> {
    check_inputs(model, premise, hypothesis)?;
    Ok(cross_entropy(&run(model, premise, hypothesis, None).scores, gold))
}

/// Projects both sentences, scores every cross pair with F, and soft-aligns.
pub fn attend(premise: &Matrix, hypothesis: &Matrix, model: &NliModel) -> Result<AttentionTrace> {
    check_inputs(model, premise, hypothesis)?;
    Ok(attend_cached(model, premise, hypothesis, &mut None).trace(model.hidden()))
}

/// `G(concat(vecs_i, aligned_i))` for every row.
pub fn compare(vecs: &Matrix, aligned: &Matrix, model: &NliModel) -> Result<Matrix> {
    if vecs.rows() != aligned.rows() {
        return Err(Error::LengthMismatch {
            left: vecs.rows(),
            right: aligned.rows(),
        });
    }
    let h = model.hidden();
    for m in [vecs, aligned] {
        if m.cols() != h {
            return Err(Error::DimMismatch {
                expected: h,
                found: m.cols(),
            });
        }
    }
    let g = model.compare_net();
    let rows: Vec<Vec<f64>> = (0..vecs.rows())
        .map(|i| g.forward(&concat(vecs.row(i), aligned.row(i))))
        .collect();
    Ok(to_matrix(&rows, h))
}

/// Sums each side's comparison vectors (no length normalization) and scores
/// `linear(H(concat(v1, v2)))`.
pub fn aggregate(cmp_premise: &Matrix, cmp_hypothesis: &Matrix, model: &NliModel) -> Result<[f64; NUM_LABELS]> {
    if cmp_premise.rows() == 0 || cmp_hypothesis.rows() == 0 {
        return Err(Error::EmptySentence);
    }
    let h = model.hidden();
    let sum = |m: &Matrix| {
        let mut v = vec![0.0; h];
        for i in 0..m.rows() {
            v.iter_mut().zip(m.row(i)).for_each(|(s, x)| *s += x);
        }
        v
    };
    let z = model
        .aggregate_net()
        .forward(&concat(&sum(cmp_premise), &sum(cmp_hypothesis)));
    Ok(head(model, &z))
}

/// Label probabilities for already-looked-up vectors.
pub fn forward_vectors(model: &NliModel, premise: &Matrix, hypothesis: &Matrix) -> Result<Forward> {
    check_inputs(model, premise, hypothesis)?;
    let pass = run(model, premise, hypothesis, None);
    Ok(Forward {
        probs: pass.probs,
        trace: pass.att.trace(model.hidden()),
    })
}

/// Looks tokens up in `lex`; out-of-vocabulary tokens become zero rows.
/// Returns the matrix and the number of OOV tokens.
pub fn embed_tokens(lex: &Lexicon<'_>, tokens: &[String]) -> (Matrix, usize) {
    let d = lex.dim();
    let mut m = Matrix::zeros(tokens.len(), d);
    let mut oov = 0;
    for (i, t) in tokens.iter().enumerate() {
        match lex.lookup(t) {
            Some(v) => m.row_mut(i).copy_from_slice(v),
            None => oov += 1,
        }
    }
    (m, oov)
}

pub fn forward(model: &NliModel, lex: &Lexicon<'_>, premise: &[String], hypothesis: &[String]) -> Result<Forward> {
    let (a, _) = embed_tokens(lex, premise);
    let (b, _) = embed_tokens(lex, hypothesis);
    forward_vectors(model, &a, &b)
}

/// First label (in [`Label::ALL`] order) with the largest probability.
pub fn argmax_label(probs: &[f64; NUM_LABELS]) -> Label {
    let mut best = 0;
    for i in 1..NUM_LABELS {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    Label::ALL[best]
}

pub fn predict(
    model: &NliModel,
    lex: &Lexicon<'_>,
    premise: &[String],
    hypothesis: &[String],
) -> Result<(Label, [f64; NUM_LABELS])> {
    let (a, _) = embed_tokens(lex, premise);
    let (b, _) = embed_tokens(lex, hypothesis);
    check_inputs(model, &a, &b)?;
    let probs = run(model, &a, &b, None).probs;
    Ok((argmax_label(&probs), probs))
}
