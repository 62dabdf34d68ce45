//! Command-line front end.
//!
//! Settings resolve in the order: command-line flag, `XNLI_SEED` (seed
//! only), `--config` file, built-in default. The config file holds flat
//! `key = value` lines whose keys are long flag names.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{bleu, evaluate_system, learning_curve, render_curve, CurveSetup, Sampling};
use crate::ingest::{
    read_dictionary, read_embeddings_with, read_parallel, read_sentence_pairs, read_snli, read_text_lines, tokenize,
    write_embeddings, EmbeddingReadOptions, TokenizerConfig,
};
use crate::nli::{predict, train_nli, NliModel, TrainConfig};
use crate::numkit::{derive_seed, OptimizerKind, OptimizerSpec, SvdConfig};
use crate::types::{EmbeddingSpace, LangTag, Lexicon, DEFAULT_DIM};
use crate::xembed::{
    build_shared_space, fit_translation_matrix, map_to_shared_space, BicvmConfig, EmbedConfig, InvertConfig, Method,
    SgnsConfig, Weighting,
};

pub const SEED_ENV: &str = "XNLI_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "xnli",
    version,
    about = "Cross-lingual NLI through shared word-embedding spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Global seed; every component derives its own stream from it.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Pin every component to its single-threaded reproducible path.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
    /// Worker threads (ignored in deterministic mode).
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Lowercase tokens when reading text.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    pub lowercase: bool,
    /// Split runs of punctuation into their own tokens.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    pub split_punctuation: bool,
    /// Embedding files lack the `V d` header line.
    #[arg(long, global = true, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub headerless: bool,
}

impl GlobalArgs {
    fn tokenizer(&self) -> TokenizerConfig {
        TokenizerConfig {
            lowercase: self.lowercase,
            split_punctuation: self.split_punctuation,
        }
    }

    fn read_space(&self, path: &Path) -> Result<EmbeddingSpace> {
        read_embeddings_with(
            path,
            EmbeddingReadOptions {
                headerless: self.headerless,
            },
        )
    }

    fn effective_workers(&self) -> usize {
        if self.deterministic {
            if self.workers > 1 {
                log::warn!(
                    "deterministic mode: running single-threaded despite --workers {}",
                    self.workers
                );
            }
            1
        } else {
            self.workers
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a shared embedding space.
    Embed(EmbedArgs),
    /// Train the NLI classifier on labelled source-language data.
    TrainNli(TrainArgs),
    /// Label premise/hypothesis pairs with a trained model.
    Predict(PredictArgs),
    /// Accuracy, per-label F1 and OOV rate on labelled test data.
    Evaluate(EvaluateArgs),
    /// Accuracy as a function of parallel corpus size.
    LearningCurve(CurveArgs),
    /// Corpus BLEU of a hypothesis file against a reference file.
    Bleu(BleuArgs),
    /// Tokenize text one line at a time.
    Tokenize(TokenizeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LangArgs {
    #[arg(long, default_value = "eng")]
    pub src_lang: String,
    #[arg(long, default_value = "fra")]
    pub tgt_lang: String,
}

/// Embedding hyper-parameters shared by `embed` and `learning-curve`.
#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Embedding dimensionality (SVD rank for invert).
    #[arg(long, default_value_t = DEFAULT_DIM)]
    pub dim: usize,
    /// SGNS context window.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// SGNS negative samples per pair.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    pub sgns_lr: f64,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Invert cell weighting: binary or count.
    #[arg(long, default_value = "binary")]
    pub weighting: String,
    /// Invert word vectors are U·S^p.
    #[arg(long, default_value_t = 0.5)]
    pub sigma_power: f64,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    #[arg(long, default_value_t = 0.01)]
    pub bicvm_lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub bicvm_l2: f64,
    /// Bilingual dictionary TSV (`source<TAB>target`), for the map method.
    #[arg(long)]
    pub dict: Option<PathBuf>,
}

impl SpaceArgs {
    fn embed_config(&self, epochs: usize, workers: usize) -> Result<EmbedConfig> {
        Ok(EmbedConfig {
            sgns: SgnsConfig {
                dim: self.dim,
                window: self.window,
                negatives: self.negatives,
                epochs,
                lr: self.sgns_lr,
                min_count: self.min_count,
                workers,
                ..SgnsConfig::default()
            },
            invert: InvertConfig {
                rank: self.dim,
                weighting: self.weighting.parse::<Weighting>()?,
                sigma_power: self.sigma_power,
                svd: SvdConfig::default(),
            },
            bicvm: BicvmConfig {
                dim: self.dim,
                margin: self.margin,
                epochs,
                lr: self.bicvm_lr,
                l2: self.bicvm_l2,
                ..BicvmConfig::default()
            },
            dictionary: self.dict.as_ref().map(read_dictionary).transpose()?,
        })
    }
}

/// NLI training hyper-parameters.
#[derive(Debug, Clone, Args)]
pub struct NliArgs {
    #[arg(long, default_value_t = 15)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 200)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    /// sgd or adagrad.
    #[arg(long, default_value = "adagrad")]
    pub optimizer: String,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub freeze_embeddings: bool,
}

impl NliArgs {
    fn train_config(&self, seed: u64, workers: usize) -> Result<TrainConfig> {
        Ok(TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            hidden: self.hidden,
            dropout: self.dropout,
            optimizer: OptimizerSpec {
                kind: self.optimizer.parse::<OptimizerKind>()?,
                learning_rate: self.lr,
            },
            seed: derive_seed(seed, "nli"),
            freeze_embeddings: self.freeze_embeddings,
            workers,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    /// map, random, ratio, invert or bicvm.
    #[arg(long)]
    pub method: String,
    /// Source side: line-aligned text, or an embedding file for map.
    #[arg(long)]
    pub src: PathBuf,
    /// Target side: line-aligned text, or an embedding file for map.
    #[arg(long)]
    pub tgt: PathBuf,
    #[command(flatten)]
    pub langs: LangArgs,
    /// Training epochs (SGNS and BICVM).
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Output embedding file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// SNLI-style TSV.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Language prefix used for lookups in a shared space.
    #[arg(long)]
    pub lang: Option<String>,
    #[command(flatten)]
    pub nli: NliArgs,
    /// Output model file.
    #[arg(long, visible_alias = "model")]
    pub out: PathBuf,
    /// Where to write tuned embeddings when they are not frozen.
    #[arg(long)]
    pub embeddings_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// `premise<TAB>hypothesis` TSV.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub lang: Option<String>,
    /// Predictions TSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// SNLI-style TSV.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub lang: Option<String>,
    /// Report TSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// random, ratio, invert, bicvm or map.
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[command(flatten)]
    pub langs: LangArgs,
    /// Source-language SNLI-style training TSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Target-language SNLI-style test TSV.
    #[arg(long)]
    pub test: PathBuf,
    /// Ascending parallel-pair counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// prefix, or subsample (seeded from the global seed).
    #[arg(long, default_value = "prefix")]
    pub sampling: String,
    #[arg(long, default_value_t = 5)]
    pub embed_epochs: usize,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub nli: NliArgs,
    /// Curve TSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BleuArgs {
    /// Hypothesis text, one sentence per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// Reference text, line-aligned with the hypotheses.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub max_n: usize,
    /// Report TSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TokenizeArgs {
    /// Input text; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are
/// skipped; keys may use `-` or `_`.
pub fn parse_config_file(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        if out.iter().any(|(seen, _)| *seen == key) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("duplicate key {key:?}"),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn long_names(cmd: &clap::Command) -> Vec<(String, clap::Id)> {
    cmd.get_arguments()
        .filter_map(|a| Some((a.get_long()?.to_string(), a.get_id().clone())))
        .filter(|(l, _)| l != "help" && l != "version")
        .collect()
}

fn built_command() -> clap::Command {
    let mut cmd = Cli::command();
    cmd.build();
    cmd
}

/// Appends `--key value` for every config entry the command line did not
/// set, then re-parses.
fn apply_config(argv: &[OsString], matches: &ArgMatches) -> std::result::Result<ArgMatches, String> {
    let (name, sub) = matches.subcommand().ok_or("missing subcommand")?;
    let Some(path) = sub.get_one::<PathBuf>("config") else {
        return Ok(matches.clone());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = parse_config_file(&text, path).map_err(|e| e.to_string())?;

    let cmd = built_command();
    let here = long_names(cmd.find_subcommand(name).expect("parsed subcommand exists"));
    let anywhere: BTreeSet<String> = cmd
        .get_subcommands()
        .flat_map(|s| long_names(s).into_iter().map(|(l, _)| l))
        .collect();

    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(format!("{}: `config` cannot be set from a config file", path.display()));
        }
        let Some((_, id)) = here.iter().find(|(l, _)| *l == key) else {
            if anywhere.contains(&key) {
                log::debug!("config key {key:?} does not apply to `{name}`");
                continue;
            }
            return Err(format!("{}: unknown config key {key:?}", path.display()));
        };
        match sub.value_source(id.as_str()) {
            Some(ValueSource::CommandLine) | Some(ValueSource::EnvVariable) => continue,
            _ => {}
        }
        extra.push(format!("--{key}").into());
        extra.push(value.into());
    }
    let mut full = argv.to_vec();
    full.extend(extra);
    built_command().try_get_matches_from(full).map_err(|e| e.to_string())
}

/// The resolved settings of a run in config-file grammar.
pub fn render_resolved(matches: &ArgMatches) -> String {
    let mut out = String::new();
    let Some((name, sub)) = matches.subcommand() else {
        return out;
    };
    out.push_str(&format!("# xnli {name}\n"));
    let cmd = built_command();
    for (long, id) in long_names(cmd.find_subcommand(name).expect("parsed subcommand exists")) {
        if long == "config" {
            continue;
        }
        if let Some(vals) = sub.get_raw(id.as_str()) {
            let vals: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            out.push_str(&format!("{long} = {}\n", vals.join(",")));
        }
    }
    out
}

/// Runs the program; returns the process exit code (0 success, 1 runtime
/// error, 2 usage error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let matches = match built_command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let matches = match apply_config(&argv, &matches) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("{}", built_command().render_usage());
            return 2;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    eprint!("{}", render_resolved(&matches));
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", single_line(&e.to_string()));
            1
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn lang(code: &str) -> Result<LangTag> {
    LangTag::new(code)
}

fn opt_lang(code: &Option<String>) -> Result<Option<LangTag>> {
    code.as_deref().map(LangTag::new).transpose()
}

fn write_or_stdout(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Embed(a) => embed(g, a),
        Command::TrainNli(a) => train(g, a),
        Command::Predict(a) => predict_cmd(g, a),
        Command::Evaluate(a) => evaluate(g, a),
        Command::LearningCurve(a) => curve(g, a),
        Command::Bleu(a) => bleu_cmd(g, a),
        Command::Tokenize(a) => tokenize_cmd(g, a),
    }
}

fn embed(g: &GlobalArgs, a: &EmbedArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let src_lang = lang(&a.langs.src_lang)?;
    let tgt_lang = lang(&a.langs.tgt_lang)?;
    let space = if method == Method::Map {
        let dict_path = a
            .space
            .dict
            .as_ref()
            .ok_or_else(|| Error::Config("--method map needs --dict".into()))?;
        let dict = read_dictionary(dict_path)?;
        let src_space = g.read_space(&a.src)?;
        let tgt_space = g.read_space(&a.tgt)?;
        let fit = fit_translation_matrix(&tgt_space, &src_space, &dict, &tgt_lang, &src_lang)?;
        println!("dictionary pairs used: {} of {}", fit.usable_pairs, dict.len());
        map_to_shared_space(&src_space, &tgt_space, &fit.map)?
    } else {
        let read = read_parallel(&a.src, &a.tgt, &src_lang, &tgt_lang, g.tokenizer())?;
        if read.dropped > 0 {
            log::warn!("{} pairs dropped: a side was empty after tokenization", read.dropped);
        }
        let cfg = a.space.embed_config(a.epochs, g.effective_workers())?;
        build_shared_space(method, &read.corpus, &cfg, g.seed)?
    };
    write_embeddings(&space, &a.out)?;
    println!(
        "{} vectors of dimension {} written to {}",
        space.len(),
        space.dim(),
        a.out.display()
    );
    Ok(())
}

fn train(g: &GlobalArgs, a: &TrainArgs) -> Result<()> {
    let data = read_snli(&a.train, g.tokenizer())?;
    let space = g.read_space(&a.embeddings)?;
    let lang = opt_lang(&a.lang)?;
    let cfg = a.nli.train_config(g.seed, g.effective_workers())?;
    if !cfg.freeze_embeddings && a.embeddings_out.is_none() {
        return Err(Error::Config("--freeze-embeddings false needs --embeddings-out".into()));
    }
    let trained = train_nli(&data, &Lexicon::new(&space, lang.as_ref()), &cfg)?;
    trained.model.write(&a.out)?;
    if let (Some(tuned), Some(path)) = (&trained.embeddings, &a.embeddings_out) {
        write_embeddings(tuned, path)?;
    }
    for (i, l) in trained.epoch_losses.iter().enumerate() {
        println!("epoch {}\tloss {l:.6}", i + 1);
    }
    println!("model written to {}", a.out.display());
    Ok(())
}

fn load_model(path: &Path, space: &EmbeddingSpace) -> Result<NliModel> {
    let model = NliModel::read(path)?;
    if model.dim() != space.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            found: space.dim(),
        });
    }
    Ok(model)
}

fn predict_cmd(g: &GlobalArgs, a: &PredictArgs) -> Result<()> {
    let space = g.read_space(&a.embeddings)?;
    let model = load_model(&a.model, &space)?;
    let lang = opt_lang(&a.lang)?;
    let lex = Lexicon::new(&space, lang.as_ref());
    let pairs = read_sentence_pairs(&a.test, g.tokenizer())?;
    let mut out = String::from("label\tcontradiction\tentailment\tneutral\n");
    for (p, h) in &pairs {
        let (label, probs) = predict(&model, &lex, p, h)?;
        out.push_str(&format!("{label}\t{}\t{}\t{}\n", probs[0], probs[1], probs[2]));
    }
    write_or_stdout(a.out.as_deref(), &out)
}

fn evaluate(g: &GlobalArgs, a: &EvaluateArgs) -> Result<()> {
    let space = g.read_space(&a.embeddings)?;
    let model = load_model(&a.model, &space)?;
    let lang = opt_lang(&a.lang)?;
    let test = read_snli(&a.test, g.tokenizer())?;
    let report = evaluate_system(&model, &Lexicon::new(&space, lang.as_ref()), &test)?;
    if let Some(p) = &a.out {
        fs::write(p, report.to_tsv()).map_err(|e| Error::io(p, e))?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn curve(g: &GlobalArgs, a: &CurveArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let src_lang = lang(&a.langs.src_lang)?;
    let tgt_lang = lang(&a.langs.tgt_lang)?;
    let workers = g.effective_workers();
    let read = read_parallel(&a.src, &a.tgt, &src_lang, &tgt_lang, g.tokenizer())?;
    let train = read_snli(&a.train, g.tokenizer())?;
    let test = read_snli(&a.test, g.tokenizer())?;
    let embed = a.space.embed_config(a.embed_epochs, workers)?;
    let nli = a.nli.train_config(g.seed, workers)?;
    let sampling = match a.sampling.as_str() {
        "prefix" => Sampling::Prefix,
        "subsample" => Sampling::Subsample(derive_seed(g.seed, "curve")),
        other => return Err(Error::Config(format!("unknown sampling {other:?}"))),
    };
    let setup = CurveSetup {
        parallel: &read.corpus,
        method,
        embed: &embed,
        nli: &nli,
        train: &train,
        test: &test,
        sampling,
        seed: g.seed,
    };
    let points = learning_curve(&setup, &a.sizes)?;
    let tsv = render_curve(&points);
    if let Some(p) = &a.out {
        fs::write(p, &tsv).map_err(|e| Error::io(p, e))?;
    }
    println!("{:>10}  {:>8}", "pairs", "accuracy");
    for p in &points {
        println!("{:>10}  {:>7.2}%", p.size, 100.0 * p.accuracy);
    }
    Ok(())
}

fn bleu_cmd(g: &GlobalArgs, a: &BleuArgs) -> Result<()> {
    let tok = g.tokenizer();
    let hyps: Vec<Vec<String>> = read_text_lines(&a.hyp)?.iter().map(|l| tokenize(l, tok)).collect();
    let refs: Vec<Vec<String>> = read_text_lines(&a.reference)?
        .iter()
        .map(|l| tokenize(l, tok))
        .collect();
    let report = bleu(&hyps, &refs, a.max_n)?;
    if let Some(p) = &a.out {
        fs::write(p, report.to_tsv()).map_err(|e| Error::io(p, e))?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn tokenize_cmd(g: &GlobalArgs, a: &TokenizeArgs) -> Result<()> {
    let lines = match &a.input {
        Some(p) => read_text_lines(p)?,
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::io(Path::new("<stdin>"), e))?;
            text.lines()
                .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
                .collect()
        }
    };
    let mut out = String::new();
    for l in &lines {
        out.push_str(&tokenize(l, g.tokenizer()).join(" "));
        out.push('\n');
    }
    write_or_stdout(a.out.as_deref(), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_grammar() {
        let p = Path::new("c");
        let got = parse_config_file("# comment\n\nbatch_size = 8\n dim=50 \n", p).unwrap();
        assert_eq!(
            got,
            vec![("batch-size".into(), "8".into()), ("dim".into(), "50".into())]
        );
        assert!(parse_config_file("dim 50\n", p).is_err());
        assert!(parse_config_file("dim = 1\ndim = 2\n", p).is_err());
        assert!(parse_config_file(" = 2\n", p).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["xnli", "frobnicate"]), 2);
        assert_eq!(run(["xnli", "embed", "--method"]), 2);
        assert_eq!(run(["xnli", "--help"]), 0);
    }

    #[test]
    fn config_file_fills_unset_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        fs::write(&cfg, "dim = 7\nhidden = 3\nepochs = 2\n").unwrap();
        let argv: Vec<OsString> = [
            "xnli", "embed", "--method", "ratio", "--src", "a", "--tgt", "b", "--out", "o", "--epochs", "9",
        ]
        .iter()
        .map(OsString::from)
        .chain([OsString::from("--config"), cfg.clone().into_os_string()])
        .collect();
        let m = built_command().try_get_matches_from(&argv).unwrap();
        let m = apply_config(&argv, &m).unwrap();
        let cli = Cli::from_arg_matches(&m).unwrap();
        let Command::Embed(e) = cli.command else { panic!() };
        assert_eq!(e.space.dim, 7);
        assert_eq!(e.epochs, 9);
        let resolved = render_resolved(&m);
        assert!(resolved.contains("dim = 7\n"));
        assert!(resolved.contains("seed = "));

        fs::write(&cfg, "dimension = 7\n").unwrap();
        assert!(apply_config(&argv, &m).is_err());
    }
}
