use std::io::Write;
use std::process::{Command, Output, Stdio};

fn xnli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xnli"))
        .args(args)
        .env_remove("XNLI_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(xnli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(xnli(&["bleu", "--hyp", "h"]).status.code(), Some(2));
    assert_eq!(
        xnli(&["bleu", "--hyp", "h", "--ref", "r", "--max-n", "four"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_input_exits_1_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.model");
    let emb = dir.path().join("e.vec");
    std::fs::write(&emb, "1 2\neng:a 0.5 1\n").unwrap();
    let test = dir.path().join("t.tsv");
    std::fs::write(&test, "a\ta\n").unwrap();
    let out = xnli(&[
        "predict",
        "--model",
        missing.to_str().unwrap(),
        "--embeddings",
        emb.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    let last = err.lines().last().unwrap();
    assert!(last.starts_with("error: ") && last.contains("nope.model"), "{err}");

    let out = xnli(&[
        "evaluate",
        "--model",
        missing.to_str().unwrap(),
        "--embeddings",
        emb.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nope.model"));
}

#[test]
fn headerless_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("e.vec");
    std::fs::write(&emb, "a 0.5 1\nb 1 0\n").unwrap();
    let train = dir.path().join("train.tsv");
    std::fs::write(&train, "gold_label\tsentence1\tsentence2\nentailment\ta b\ta\n").unwrap();
    let model = dir.path().join("m.txt");
    let args = |extra: &'static [&'static str]| {
        let mut v = vec![
            "train-nli",
            "--train",
            train.to_str().unwrap(),
            "--embeddings",
            emb.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--hidden",
            "2",
            "--epochs",
            "1",
        ];
        v.extend(extra);
        xnli(&v)
    };
    assert_eq!(args(&[]).status.code(), Some(1));
    let out = args(&["--headerless"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(model.exists());
}

#[test]
fn config_file_keys_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let hyp = dir.path().join("h.txt");
    std::fs::write(&hyp, "a b c d\n").unwrap();
    let h = hyp.to_str().unwrap();

    // a key of another subcommand is ignored
    std::fs::write(&cfg, "hidden = 3\nmax_n = 2\n").unwrap();
    let out = xnli(&["bleu", "--hyp", h, "--ref", h, "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("max-n = 2\n"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("100"));

    // the command line wins over the file
    let out = xnli(&[
        "bleu",
        "--hyp",
        h,
        "--ref",
        h,
        "--max-n",
        "3",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(stderr(&out).contains("max-n = 3\n"));

    std::fs::write(&cfg, "maximum = 2\n").unwrap();
    let out = xnli(&["bleu", "--hyp", h, "--ref", h, "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("maximum"));
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "seed = 5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let resolved = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_xnli"));
        cmd.args(["tokenize", "--config", c]).args(extra).stdin(Stdio::null());
        match env {
            Some(v) => cmd.env("XNLI_SEED", v),
            None => cmd.env_remove("XNLI_SEED"),
        };
        let out = cmd.output().unwrap();
        stderr(&out)
            .lines()
            .find(|l| l.starts_with("seed = "))
            .unwrap()
            .to_string()
    };
    assert_eq!(resolved(&[], None), "seed = 5");
    assert_eq!(resolved(&[], Some("9")), "seed = 9");
    assert_eq!(resolved(&["--seed", "3"], Some("9")), "seed = 3");
}

#[test]
fn tokenize_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_xnli"))
        .args(["tokenize", "--lowercase", "false"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"Hello, world!\nA  b\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "Hello , world !\nA b\n");
}
