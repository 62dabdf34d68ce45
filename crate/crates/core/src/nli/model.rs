use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::format_float;
use crate::numkit::{dot, Rng};
use crate::types::Label;

pub const NUM_LABELS: usize = 3;

const MAGIC: &str = "xnli-decomposable-attention 1";

/// A named, row-major slice of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: &'static str,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Bias vectors start at zero.
    pub fn is_bias(&self) -> bool {
        [".b", ".b1", ".b2"].iter().any(|s| self.name.ends_with(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FfLayout {
    pub w1: Block,
    pub b1: Block,
    pub w2: Block,
    pub b2: Block,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Layout {
    pub proj: Block,
    pub f: FfLayout,
    pub g: FfLayout,
    pub h: FfLayout,
    pub out_w: Block,
    pub out_b: Block,
    pub total: usize,
}

struct Alloc(usize);

impl Alloc {
    fn block(&mut self, name: &'static str, rows: usize, cols: usize) -> Block {
        let b = Block {
            name,
            offset: self.0,
            rows,
            cols,
        };
        self.0 += rows * cols;
        b
    }

    fn ff(&mut self, names: [&'static str; 4], input: usize, hidden: usize, output: usize) -> FfLayout {
        FfLayout {
            w1: self.block(names[0], hidden, input),
            b1: self.block(names[1], 1, hidden),
            w2: self.block(names[2], output, hidden),
            b2: self.block(names[3], 1, output),
        }
    }
}

impl Layout {
    pub fn new(dim: usize, hidden: usize) -> Layout {
        let mut a = Alloc(0);
        let proj = a.block("projection", hidden, dim);
        let f = a.ff(["F.w1", "F.b1", "F.w2", "F.b2"], hidden, hidden, hidden);
        let g = a.ff(["G.w1", "G.b1", "G.w2", "G.b2"], 2 * hidden, hidden, hidden);
        let h = a.ff(["H.w1", "H.b1", "H.w2", "H.b2"], 2 * hidden, hidden, hidden);
        let out_w = a.block("out.w", NUM_LABELS, hidden);
        let out_b = a.block("out.b", 1, NUM_LABELS);
        Layout {
            proj,
            f,
            g,
            h,
            out_w,
            out_b,
            total: a.0,
        }
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut v = vec![self.proj];
        for ff in [self.f, self.g, self.h] {
            v.extend([ff.w1, ff.b1, ff.w2, ff.b2]);
        }
        v.extend([self.out_w, self.out_b]);
        v
    }
}

/// Read-only view of one two-layer ReLU network inside a model.
#[derive(Clone, Copy, Debug)]
pub struct FeedForward<'a> {
    params: &'a [f64],
    layout: FfLayout,
}

impl FeedForward<'_> {
    pub fn input_dim(&self) -> usize {
        self.layout.w1.cols
    }

    pub fn hidden_dim(&self) -> usize {
        self.layout.w1.rows
    }

    pub fn output_dim(&self) -> usize {
        self.layout.w2.rows
    }

    /// `ReLU(W2 · ReLU(W1 · x + b1) + b2)`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let mut h = affine(self.params, l.w1, Some(l.b1), x);
        relu_in_place(&mut h);
        let mut y = affine(self.params, l.w2, Some(l.b2), &h);
        relu_in_place(&mut y);
        y
    }
}

pub(crate) fn affine(p: &[f64], w: Block, b: Option<Block>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), w.cols);
    let wm = &p[w.range()];
    let mut out = match b {
        Some(b) => p[b.range()].to_vec(),
        None => vec![0.0; w.rows],
    };
    for (r, o) in out.iter_mut().enumerate() {
        *o += dot(&wm[r * w.cols..(r + 1) * w.cols], x);
    }
    out
}

/// `Wᵀ · v` for the block `w`.
pub(crate) fn affine_t(p: &[f64], w: Block, v: &[f64]) -> Vec<f64> {
    let wm = &p[w.range()];
    let mut out = vec![0.0; w.cols];
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(&wm[r * w.cols..(r + 1) * w.cols]) {
            *o += vr * x;
        }
    }
    out
}

/// `grad[w] += u ⊗ v`.
pub(crate) fn outer_acc(grad: &mut [f64], w: Block, u: &[f64], v: &[f64]) {
    let g = &mut grad[w.range()];
    for (r, &ur) in u.iter().enumerate() {
        if ur == 0.0 {
            continue;
        }
        for (gi, x) in g[r * w.cols..(r + 1) * w.cols].iter_mut().zip(v) {
            *gi += ur * x;
        }
    }
}

pub(crate) fn add_to(grad: &mut [f64], b: Block, v: &[f64]) {
    for (gi, x) in grad[b.range()].iter_mut().zip(v) {
        *gi += x;
    }
}

pub(crate) fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Parameters of the attend / compare / aggregate classifier.
///
/// Input vectors of width `dim` are projected to `hidden`; F scores
/// alignments, G compares, H aggregates, and a linear layer emits one score
/// per label in [`Label::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct NliModel {
    dim: usize,
    hidden: usize,
    pub freeze_embeddings: bool,
    params: Vec<f64>,
    pub(crate) layout: Layout,
}

impl NliModel {
    /// All-zero parameters.
    pub fn zeros(dim: usize, hidden: usize) -> Result<Self> {
        if dim == 0 || hidden == 0 {
            return Err(Error::Config(format!(
                "model widths must be >= 1 (dim {dim}, hidden {hidden})"
            )));
        }
        let layout = Layout::new(dim, hidden);
        Ok(NliModel {
            dim,
            hidden,
            freeze_embeddings: true,
            params: vec![0.0; layout.total],
            layout,
        })
    }

    /// Glorot-uniform weights and zero biases.
    pub fn seeded(dim: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        let mut m = Self::zeros(dim, hidden)?;
        for b in m.layout.blocks() {
            if b.is_bias() {
                continue;
            }
            let limit = (6.0 / (b.rows + b.cols) as f64).sqrt();
            for x in &mut m.params[b.range()] {
                *x = rng.uniform_range(-limit, limit);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn blocks(&self) -> Vec<Block> {
        self.layout.blocks()
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        let b = self.blocks().into_iter().find(|b| b.name == name)?;
        Some(&self.params[b.range()])
    }

    pub fn block_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let b = self.blocks().into_iter().find(|b| b.name == name)?;
        Some(&mut self.params[b.range()])
    }

    pub fn attention_net(&self) -> FeedForward<'_> {
        FeedForward {
            params: &self.params,
            layout: self.layout.f,
        }
    }

    pub fn compare_net(&self) -> FeedForward<'_> {
        FeedForward {
            params: &self.params,
            layout: self.layout.g,
        }
    }

    pub fn aggregate_net(&self) -> FeedForward<'_> {
        FeedForward {
            params: &self.params,
            layout: self.layout.h,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|x| x.is_finite())
    }

    /// Text serialization: a header of widths, label order and flags, then
    /// every block as `block <name> <rows> <cols>` followed by its rows.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("dim {}\n", self.dim));
        out.push_str(&format!("hidden {}\n", self.hidden));
        let labels: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        out.push_str(&format!("labels {}\n", labels.join(" ")));
        out.push_str(&format!("freeze_embeddings {}\n", self.freeze_embeddings));
        for b in self.blocks() {
            out.push_str(&format!("block {} {} {}\n", b.name, b.rows, b.cols));
            let data = &self.params[b.range()];
            for r in 0..b.rows {
                let row: Vec<String> = data[r * b.cols..(r + 1) * b.cols]
                    .iter()
                    .map(|x| format_float(*x))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Inverse of [`NliModel::render`]; `path` is used only in diagnostics.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate();
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: line + 1,
            reason,
        };
        let eof = text.lines().count();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| err(eof, format!("unexpected end of file, expected {what}")))
        };

        let (n, magic) = next("header")?;
        if magic != MAGIC {
            return Err(err(n, format!("expected {MAGIC:?}")));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (n, line) = next(key)?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| err(n, format!("expected `{key} ...`")))?;
            Ok((n, rest.to_string()))
        };
        let (n, dim) = field("dim")?;
        let dim: usize = dim.parse().map_err(|_| err(n, format!("bad dim {dim:?}")))?;
        let (n, hidden) = field("hidden")?;
        let hidden: usize = hidden.parse().map_err(|_| err(n, format!("bad hidden {hidden:?}")))?;
        let (n, labels) = field("labels")?;
        let expected: Vec<&str> = Label::ALL.iter().map(|l| l.as_str()).collect();
        if labels != expected.join(" ") {
            return Err(err(
                n,
                format!("label order {labels:?} differs from {:?}", expected.join(" ")),
            ));
        }
        let (n, freeze) = field("freeze_embeddings")?;
        let freeze: bool = freeze.parse().map_err(|_| err(n, format!("bad flag {freeze:?}")))?;

        let mut model = NliModel::zeros(dim, hidden).map_err(|e| err(1, e.to_string()))?;
        model.freeze_embeddings = freeze;
        for b in model.blocks() {
            let (n, head) = next("block header")?;
            let want = format!("block {} {} {}", b.name, b.rows, b.cols);
            if head != want {
                return Err(err(n, format!("expected {want:?}, got {head:?}")));
            }
            for r in 0..b.rows {
                let (n, row) = next("parameter row")?;
                let values = row
                    .split(' ')
                    .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| err(n, "bad or non-finite float".into()))?;
                if values.len() != b.cols {
                    return Err(err(n, format!("{} values, expected {}", values.len(), b.cols)));
                }
                let start = b.offset + r * b.cols;
                model.params[start..start + b.cols].copy_from_slice(&values);
            }
        }
        if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(err(n, format!("trailing content {extra:?}")));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_contiguous() {
        let l = Layout::new(3, 4);
        let blocks = l.blocks();
        assert_eq!(blocks.len(), 15);
        let mut off = 0;
        for b in &blocks {
            assert_eq!(b.offset, off);
            off += b.len();
        }
        assert_eq!(off, l.total);
        assert_eq!(l.out_w.rows, NUM_LABELS);
        assert_eq!(l.g.w1.cols, 8);
    }

    #[test]
    fn seeded_init_is_deterministic_with_zero_biases() {
        let a = NliModel::seeded(3, 4, &mut Rng::new(5)).unwrap();
        let b = NliModel::seeded(3, 4, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.block("F.b1").unwrap().iter().all(|&x| x == 0.0));
        assert!(a.block("out.b").unwrap().iter().all(|&x| x == 0.0));
        assert!(a.block("projection").unwrap().iter().any(|&x| x != 0.0));
    }

    #[test]
    fn render_parse_round_trip() {
        let mut m = NliModel::seeded(2, 3, &mut Rng::new(1)).unwrap();
        m.freeze_embeddings = false;
        m.params_mut()[0] = 1e-300;
        m.params_mut()[1] = -0.1;
        let text = m.render();
        let back = NliModel::parse(&text, Path::new("m")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn parse_rejects_damage() {
        let m = NliModel::seeded(2, 3, &mut Rng::new(1)).unwrap();
        let text = m.render();
        let p = Path::new("m");
        assert!(NliModel::parse(&text.replace("hidden 3", "hidden x"), p).is_err());
        assert!(NliModel::parse(&text.replace("block F.w1", "block Q.w1"), p).is_err());
        assert!(NliModel::parse(&text[..text.len() - 10], p).is_err());
        assert!(NliModel::parse(&format!("{text}junk\n"), p).is_err());
        let swapped = text.replace("contradiction entailment", "entailment contradiction");
        assert!(NliModel::parse(&swapped, p).is_err());
    }

    #[test]
    fn feed_forward_view() {
        let mut m = NliModel::zeros(2, 2).unwrap();
        m.block_mut("G.b1").unwrap().copy_from_slice(&[1.0, -1.0]);
        m.block_mut("G.b2").unwrap().copy_from_slice(&[0.5, -2.0]);
        let g = m.compare_net();
        assert_eq!((g.input_dim(), g.hidden_dim(), g.output_dim()), (4, 2, 2));
        assert_eq!(g.forward(&[3.0, 1.0, 2.0, 7.0]), vec![0.5, 0.0]);
    }
}
