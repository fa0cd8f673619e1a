//! End-to-end tests that drive the `gecomb` binary the way a user would:
//! generate a corpus, train, combine, score, and run the baselines.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gecomb"))
}

/// Runs the binary with the given args and asserts a zero exit.
fn run(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("spawning gecomb");
    assert!(
        output.status.success(),
        "gecomb {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).expect("reading output file").lines().count()
}

/// Generates a small three-system corpus and returns the directory holding
/// source.txt, clean.txt, gold.m2, hyp0..2.txt, and manifest.toml.
fn generate_corpus(dir: &Path, seed: u64) {
    run(&[
        "generate",
        "--out-dir",
        dir.to_str().unwrap(),
        "--sentences",
        "120",
        "--systems",
        "3",
        "--fix-rate",
        "0.8,0.6,0.5",
        "--spurious-rate",
        "0.05",
        "--seed",
        &seed.to_string(),
        "--manifest",
    ]);
}

struct Corpus {
    _dir: TempDir,
    root: PathBuf,
}

impl Corpus {
    fn new(seed: u64) -> Self {
        let dir = tempfile::tempdir().expect("creating temp dir");
        let root = dir.path().join("data");
        std::fs::create_dir(&root).unwrap();
        generate_corpus(&root, seed);
        Corpus { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    /// The common `--source ... --hyp ... --hyp ... --hyp ...` prefix.
    fn corpus_args(&self) -> Vec<String> {
        vec![
            "--source".into(),
            self.arg("source.txt"),
            "--hyp".into(),
            self.arg("hyp0.txt"),
            "--hyp".into(),
            self.arg("hyp1.txt"),
            "--hyp".into(),
            self.arg("hyp2.txt"),
        ]
    }

    fn train_model(&self) -> PathBuf {
        let model = self.path("model.json");
        let mut args: Vec<String> = vec!["train".into()];
        args.extend(self.corpus_args());
        args.extend([
            "--gold".into(),
            self.arg("gold.m2"),
            "--model-out".into(),
            model.to_str().unwrap().into(),
        ]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        run(&refs);
        model
    }

    fn score(&self, system: &Path) -> f64 {
        let output = run(&[
            "score",
            "--source",
            &self.arg("source.txt"),
            "--system",
            system.to_str().unwrap(),
            "--gold",
            &self.arg("gold.m2"),
        ]);
        let text = stdout_of(&output);
        let line = text
            .lines()
            .find(|l| l.starts_with("f05="))
            .expect("score output has an f05= line");
        line["f05=".len()..].parse().expect("f05 value parses")
    }
}

#[test]
fn generate_writes_aligned_corpus_files() {
    let corpus = Corpus::new(3);
    let sentences = line_count(&corpus.path("source.txt"));
    assert_eq!(sentences, 120);
    assert_eq!(line_count(&corpus.path("clean.txt")), sentences);
    for j in 0..3 {
        assert_eq!(line_count(&corpus.path(&format!("hyp{j}.txt"))), sentences);
    }
    let m2 = std::fs::read_to_string(corpus.path("gold.m2")).unwrap();
    assert_eq!(m2.lines().filter(|l| l.starts_with("S ")).count(), sentences);
    assert!(corpus.path("manifest.toml").exists());
}

#[test]
fn generate_is_deterministic_per_seed() {
    let a = Corpus::new(11);
    let b = Corpus::new(11);
    let c = Corpus::new(12);
    for name in ["source.txt", "clean.txt", "gold.m2", "hyp0.txt", "hyp2.txt"] {
        let file_a = std::fs::read_to_string(a.path(name)).unwrap();
        let file_b = std::fs::read_to_string(b.path(name)).unwrap();
        assert_eq!(file_a, file_b, "{name} differs across identical seeds");
    }
    let source_a = std::fs::read_to_string(a.path("source.txt")).unwrap();
    let source_c = std::fs::read_to_string(c.path("source.txt")).unwrap();
    assert_ne!(source_a, source_c, "different seeds should give different corpora");
}

#[test]
fn train_reports_counts_and_writes_model() {
    let corpus = Corpus::new(5);
    let model = corpus.train_model();
    let text = std::fs::read_to_string(&model).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["format"], "gecomb-edit-classifier");
    assert_eq!(parsed["systems"], 3);
    assert_eq!(parsed["dimension"], 9);
    assert_eq!(parsed["weights"].as_array().unwrap().len(), 9);
}

#[test]
fn combine_beats_single_systems_and_traces_decisions() {
    let corpus = Corpus::new(7);
    let model = corpus.train_model();

    let combined = corpus.path("combined.txt");
    let trace = corpus.path("trace.txt");
    let mut args: Vec<String> = vec!["combine".into()];
    args.extend(corpus.corpus_args());
    args.extend([
        "--model".into(),
        model.to_str().unwrap().into(),
        "--output".into(),
        combined.to_str().unwrap().into(),
        "--trace".into(),
        trace.to_str().unwrap().into(),
    ]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs);

    assert_eq!(line_count(&combined), 120);
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.contains("decision=kept"));
    assert!(trace_text.contains("decision=raw-below-tau"));
    assert!(trace_text.contains("p_raw="));

    // At the default thresholds the combiner trades recall for precision,
    // which on this corpus puts it ahead of every single system on F0.5.
    let combined_f05 = corpus.score(&combined);
    for j in 0..3 {
        let single = corpus.score(&corpus.path(&format!("hyp{j}.txt")));
        assert!(
            combined_f05 > single,
            "combined F0.5 {combined_f05} should beat hyp{j} {single}"
        );
    }
}

#[test]
fn combine_rejects_mismatched_system_count() {
    let corpus = Corpus::new(9);
    let model = corpus.train_model();
    let output = bin()
        .args([
            "combine",
            "--source",
            &corpus.arg("source.txt"),
            "--hyp",
            &corpus.arg("hyp0.txt"),
            "--model",
            model.to_str().unwrap(),
            "--output",
            &corpus.arg("never.txt"),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("3 systems"), "stderr: {stderr}");
}

#[test]
fn vote_edit_level_and_subset() {
    let corpus = Corpus::new(13);
    let voted = corpus.path("vote.txt");
    let mut args: Vec<String> = vec!["vote".into()];
    args.extend(corpus.corpus_args());
    args.extend(["--output".into(), voted.to_str().unwrap().into()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs);
    assert_eq!(line_count(&voted), 120);

    // A one-system subset with min-votes 1 reproduces that system exactly.
    let solo = corpus.path("solo.txt");
    let mut args: Vec<String> = vec!["vote".into()];
    args.extend(corpus.corpus_args());
    args.extend([
        "--subset".into(),
        "1".into(),
        "--min-votes".into(),
        "1".into(),
        "--output".into(),
        solo.to_str().unwrap().into(),
    ]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs);
    let solo_text = std::fs::read_to_string(&solo).unwrap();
    let hyp1_text = std::fs::read_to_string(corpus.path("hyp1.txt")).unwrap();
    assert_eq!(solo_text, hyp1_text);
}

#[test]
fn vote_with_weights_picks_an_existing_hypothesis() {
    let corpus = Corpus::new(17);
    let picked = corpus.path("weighted.txt");
    let mut args: Vec<String> = vec!["vote".into()];
    args.extend(corpus.corpus_args());
    args.extend([
        "--weights".into(),
        "0.5,0.3,0.2".into(),
        "--output".into(),
        picked.to_str().unwrap().into(),
    ]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs);

    let picked_lines = std::fs::read_to_string(&picked).unwrap();
    let hyps: Vec<String> = (0..3)
        .map(|j| std::fs::read_to_string(corpus.path(&format!("hyp{j}.txt"))).unwrap())
        .collect();
    for (i, line) in picked_lines.lines().enumerate() {
        let candidates: Vec<&str> =
            hyps.iter().map(|h| h.lines().nth(i).unwrap()).collect();
        assert!(
            candidates.contains(&line),
            "line {i} is not any system's output: {line}"
        );
    }
}

#[test]
fn vote_rejects_weights_with_min_votes() {
    let corpus = Corpus::new(19);
    let mut args: Vec<String> = vec!["vote".into()];
    args.extend(corpus.corpus_args());
    args.extend([
        "--weights".into(),
        "1,1,1".into(),
        "--min-votes".into(),
        "2".into(),
        "--output".into(),
        corpus.arg("never.txt"),
    ]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = bin().args(&refs).output().unwrap();
    assert!(!output.status.success());
}

#[test]
fn mbr_selects_whole_hypotheses() {
    let corpus = Corpus::new(23);
    let selected = corpus.path("mbr.txt");
    let mut args: Vec<String> = vec!["mbr".into()];
    args.extend(corpus.corpus_args());
    args.extend(["--output".into(), selected.to_str().unwrap().into()]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs);

    let selected_lines = std::fs::read_to_string(&selected).unwrap();
    let hyps: Vec<String> = (0..3)
        .map(|j| std::fs::read_to_string(corpus.path(&format!("hyp{j}.txt"))).unwrap())
        .collect();
    for (i, line) in selected_lines.lines().enumerate() {
        let candidates: Vec<&str> =
            hyps.iter().map(|h| h.lines().nth(i).unwrap()).collect();
        assert!(candidates.contains(&line), "line {i} not selected from the systems");
    }
}

#[test]
fn run_writes_report_files_with_expected_strategies() {
    let corpus = Corpus::new(29);
    let output = run(&["run", "--manifest", &corpus.arg("manifest.toml")]);
    let text = stdout_of(&output);
    assert!(text.contains("best by dev F0.5"), "summary missing: {text}");

    let report = std::fs::read_to_string(corpus.path("out/report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,params,dev_p,dev_r,dev_f1,dev_f05,test_p,test_r,test_f1,test_f05"
    );
    let strategies: Vec<&str> =
        lines.map(|l| l.split(',').next().unwrap()).collect();
    for expected in ["system sys0", "system sys2", "weighted-vote", "mbr", "edit-vote", "combine"] {
        assert!(
            strategies.contains(&expected),
            "missing strategy {expected} in {strategies:?}"
        );
    }
    assert!(corpus.path("out/summary.txt").exists());
    assert!(corpus.path("out/model.json").exists());
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let corpus = Corpus::new(31);
    run(&["run", "--manifest", &corpus.arg("manifest.toml")]);
    let first = std::fs::read_to_string(corpus.path("out/report.csv")).unwrap();
    let first_model = std::fs::read_to_string(corpus.path("out/model.json")).unwrap();
    run(&["run", "--manifest", &corpus.arg("manifest.toml")]);
    let second = std::fs::read_to_string(corpus.path("out/report.csv")).unwrap();
    let second_model = std::fs::read_to_string(corpus.path("out/model.json")).unwrap();
    assert_eq!(first, second);
    assert_eq!(first_model, second_model);
}

#[test]
fn sweep_prints_one_row_per_threshold() {
    let corpus = Corpus::new(37);
    let csv = corpus.path("sweep.csv");
    let output = run(&[
        "sweep",
        "--manifest",
        &corpus.arg("manifest.toml"),
        "--tau",
        "0.5,0.7,0.9",
        "--split",
        "dev",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let text = stdout_of(&output);
    assert!(text.contains("dev sentences"));

    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(lines[0], "tau,precision,recall,f1,f05");
    assert_eq!(lines.len(), 4, "header plus one row per threshold");
    assert!(lines[1].starts_with("0.5,"));
    assert!(lines[3].starts_with("0.9,"));
}
