//! `gecomb`: merge the outputs of several GEC systems into one correction.
//!
//! Subcommands cover the full loop: `generate` synthesizes a corpus with
//! known gold edits, `train` fits the edit classifier, `combine` runs the
//! selection pipeline, `vote` / `mbr` are the baselines, `score` evaluates
//! any output file, and `run` / `sweep` drive manifest experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gecomb_core::baselines::{edit_majority_vote, mbr_select, weighted_sentence_vote, VoteConfig};
use gecomb_core::candidates::aggregate;
use gecomb_core::classifier::{train, LinearModel, TrainingConfig};
use gecomb_core::combiner::{combine_sentence_traced, CombineConfig, EditTrace};
use gecomb_core::corpus::{
    load_gold_m2, load_hypothesis_files, read_token_lines, write_token_lines,
};
use gecomb_core::harness::experiment::{
    build_training_set, gold_edit_lists, run_experiment, threshold_sweep, write_report,
    ExperimentManifest,
};
use gecomb_core::harness::synth::{generate, SyntheticSpec};
use gecomb_core::scorer::{score_corpus, ScoreReport};

#[derive(Parser)]
#[command(name = "gecomb", version, about = "Edit-level system combination for grammatical error correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the edit classifier on source, hypothesis, and gold files
    Train(TrainArgs),
    /// Combine hypotheses with a trained model
    Combine(CombineArgs),
    /// Edit-level majority vote, or sentence-level weighted vote with --weights
    Vote(VoteArgs),
    /// Pick per sentence the hypothesis most similar to the others
    Mbr(MbrArgs),
    /// Score a system output against gold annotations
    Score(ScoreArgs),
    /// Generate a synthetic corpus with known gold edits
    Generate(GenerateArgs),
    /// Run the experiment described by a manifest and write reports
    Run(RunArgs),
    /// Train once, then sweep the main threshold over a list of values
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Source sentences, one per line
    #[arg(long)]
    source: PathBuf,
    /// Hypothesis file of one system; repeat per system, order matters
    #[arg(long = "hyp", required = true)]
    hypotheses: Vec<PathBuf>,
}

impl CorpusArgs {
    /// Loads and aligns the corpus: sources plus per-sentence system outputs.
    fn load(&self) -> Result<(Vec<Vec<String>>, Vec<Vec<Vec<String>>>)> {
        let sources = read_token_lines(&self.source)?;
        let hypotheses = load_hypothesis_files(&self.hypotheses, sources.len())?;
        Ok((sources, hypotheses))
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Gold annotations in M2 format
    #[arg(long)]
    gold: PathBuf,
    /// Where to write the model file
    #[arg(long = "model-out")]
    model_out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    #[arg(long, default_value_t = 0.0)]
    dampening: f64,
    /// Visit examples in corpus order instead of shuffling each epoch
    #[arg(long)]
    no_shuffle: bool,
    /// Stop once the epoch loss improves by less than this
    #[arg(long, default_value_t = 1e-6)]
    min_delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Pipeline settings other than the main threshold, which `combine` takes as
/// a single value and `sweep` as a list.
#[derive(Args)]
struct PipelineArgs {
    /// Relaxed scale for the adjusted-score gate
    #[arg(long)]
    alpha: Option<f64>,
    /// Agreement boost factor
    #[arg(long)]
    beta: Option<f64>,
    /// Boost cap
    #[arg(long)]
    cap: Option<f64>,
    /// Span-overlap tolerance for suppression
    #[arg(long)]
    theta: Option<f64>,
}

impl PipelineArgs {
    fn config(&self, tau: Option<f64>) -> CombineConfig {
        let base = CombineConfig::default();
        CombineConfig {
            tau: tau.unwrap_or(base.tau),
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            cap: self.cap.unwrap_or(base.cap),
            iou_theta: self.theta.unwrap_or(base.iou_theta),
        }
    }
}

#[derive(Args)]
struct CombineArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Main threshold on the raw probability
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Combined corrections, one sentence per line
    #[arg(long)]
    output: PathBuf,
    /// Optional per-candidate decision log
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VoteArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Minimum number of agreeing systems (edit-level vote)
    #[arg(long = "min-votes")]
    min_votes: Option<usize>,
    /// Comma-separated system indices whose votes count
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    /// Comma-separated per-system weights; switches to sentence-level voting
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct MbrArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Comma-separated system indices to select among
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Source sentences, one per line
    #[arg(long)]
    source: PathBuf,
    /// System output to evaluate, one sentence per line
    #[arg(long)]
    system: PathBuf,
    /// Gold annotations in M2 format
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for source.txt, clean.txt, gold.m2, hyp<j>.txt
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 500)]
    sentences: usize,
    #[arg(long, default_value_t = 5)]
    systems: usize,
    #[arg(long, default_value_t = 50)]
    vocab: usize,
    #[arg(long = "min-len", default_value_t = 5)]
    min_len: usize,
    #[arg(long = "max-len", default_value_t = 15)]
    max_len: usize,
    /// Per-token probability of corrupting the clean sentence
    #[arg(long, default_value_t = 0.15)]
    corruption: f64,
    /// Fix rate, either one value for all systems or one per system
    #[arg(long = "fix-rate", value_delimiter = ',', default_values_t = [0.7])]
    fix_rates: Vec<f64>,
    /// Spurious-edit rate, one value or one per system
    #[arg(long = "spurious-rate", value_delimiter = ',', default_values_t = [0.05])]
    spurious_rates: Vec<f64>,
    /// Fraction of decisions copied from system 0
    #[arg(long, default_value_t = 0.0)]
    correlation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a ready-to-run manifest.toml into the directory
    #[arg(long)]
    manifest: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment manifest (TOML)
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment manifest naming the corpus, split, and training config
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated main-threshold values to evaluate
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.6, 0.7, 0.8, 0.9])]
    tau: Vec<f64>,
    /// Which split to evaluate on
    #[arg(long, default_value = "dev", value_parser = ["dev", "test", "all"])]
    split: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Optional CSV output; the table always goes to stdout
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => cmd_train(args),
        Command::Combine(args) => cmd_combine(args),
        Command::Vote(args) => cmd_vote(args),
        Command::Mbr(args) => cmd_mbr(args),
        Command::Score(args) => cmd_score(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (sources, hypotheses) = args.corpus.load()?;
    let gold = load_gold_m2(&args.gold, &sources)?;
    let gold_edits = gold_edit_lists(&gold)?;
    let all: Vec<usize> = (0..sources.len()).collect();
    let examples = build_training_set(&sources, &hypotheses, &gold_edits, &all);

    let config = TrainingConfig {
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
        epochs: args.epochs,
        weight_decay: args.weight_decay,
        momentum: args.momentum,
        dampening: args.dampening,
        shuffle: !args.no_shuffle,
        min_delta: args.min_delta,
        seed: args.seed,
    };
    let outcome = train(&examples, &config)?;
    if outcome.single_class() {
        eprintln!(
            "warning: training data has {} positive and {} negative examples; \
             the classifier cannot learn a decision boundary from one class",
            outcome.positive_examples, outcome.negative_examples
        );
    }
    outcome.model.save(&args.model_out)?;
    println!(
        "trained on {} candidates ({} positive) in {} epochs, final loss {:.6}",
        examples.len(),
        outcome.positive_examples,
        outcome.epochs_run(),
        outcome.final_loss()
    );
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn render_trace(sentence: usize, traces: &[EditTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        let systems: Vec<String> = t.proposed_by.iter().map(|s| s.to_string()).collect();
        writeln!(
            out,
            "sentence={} span={}:{} type={} replacement={:?} systems={} p_raw={:.6} p_adj={:.6} decision={}",
            sentence,
            t.edit.start(),
            t.edit.end(),
            t.edit.etype(),
            t.edit.replacement(),
            systems.join(","),
            t.p_raw,
            t.p_adj,
            t.decision.reason()
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn cmd_combine(args: CombineArgs) -> Result<()> {
    let (sources, hypotheses) = args.corpus.load()?;
    let model = LinearModel::load(&args.model)?;
    if model.systems() != args.corpus.hypotheses.len() {
        bail!(
            "model was trained for {} systems but {} hypothesis files were given",
            model.systems(),
            args.corpus.hypotheses.len()
        );
    }
    let cfg = args.pipeline.config(args.tau);

    let mut outputs = Vec::with_capacity(sources.len());
    let mut trace_text = String::new();
    for (index, (source, hyps)) in sources.iter().zip(&hypotheses).enumerate() {
        let (output, traces) = combine_sentence_traced(source, hyps, &model, &cfg)
            .with_context(|| format!("sentence {index}"))?;
        if args.trace.is_some() {
            trace_text.push_str(&render_trace(index, &traces));
        }
        outputs.push(output);
    }
    write_token_lines(&args.output, &outputs)?;
    if let Some(trace_path) = &args.trace {
        std::fs::write(trace_path, trace_text)
            .with_context(|| format!("writing trace to {}", trace_path.display()))?;
    }
    println!("combined {} sentences into {}", outputs.len(), args.output.display());
    Ok(())
}

/// Restricts per-sentence hypothesis lists to the chosen systems.
fn restrict(
    hypotheses: Vec<Vec<Vec<String>>>,
    subset: &Option<Vec<usize>>,
    k: usize,
) -> Result<Vec<Vec<Vec<String>>>> {
    let Some(subset) = subset else { return Ok(hypotheses) };
    if subset.is_empty() {
        bail!("--subset must name at least one system");
    }
    if let Some(&out) = subset.iter().find(|&&s| s >= k) {
        bail!("--subset index {out} out of range for {k} systems");
    }
    Ok(hypotheses
        .into_iter()
        .map(|h| subset.iter().map(|&s| h[s].clone()).collect())
        .collect())
}

fn cmd_vote(args: VoteArgs) -> Result<()> {
    let (sources, hypotheses) = args.corpus.load()?;
    let k = args.corpus.hypotheses.len();

    let outputs: Vec<Vec<String>> = if let Some(weights) = &args.weights {
        if args.min_votes.is_some() {
            bail!("--weights selects sentence-level voting; --min-votes does not apply");
        }
        let hypotheses = restrict(hypotheses, &args.subset, k)?;
        let weights = match &args.subset {
            Some(subset) if weights.len() == k => {
                subset.iter().map(|&s| weights[s]).collect::<Vec<f64>>()
            }
            _ => weights.clone(),
        };
        hypotheses
            .iter()
            .map(|h| weighted_sentence_vote(h, &weights))
            .collect::<Result<_, _>>()?
    } else {
        let min_votes = args.min_votes.unwrap_or(k / 2 + 1);
        let cfg = VoteConfig { min_votes, system_subset: args.subset.clone() };
        sources
            .iter()
            .zip(&hypotheses)
            .map(|(source, hyps)| edit_majority_vote(&aggregate(source, hyps), &cfg))
            .collect::<Result<_, _>>()?
    };
    write_token_lines(&args.output, &outputs)?;
    println!("voted over {} sentences into {}", outputs.len(), args.output.display());
    Ok(())
}

fn cmd_mbr(args: MbrArgs) -> Result<()> {
    let (_, hypotheses) = args.corpus.load()?;
    let k = args.corpus.hypotheses.len();
    let hypotheses = restrict(hypotheses, &args.subset, k)?;
    let outputs: Vec<Vec<String>> = hypotheses
        .iter()
        .map(|h| mbr_select(h))
        .collect::<Result<_, _>>()?;
    write_token_lines(&args.output, &outputs)?;
    println!("selected {} sentences into {}", outputs.len(), args.output.display());
    Ok(())
}

fn print_report(report: &ScoreReport) {
    println!("{:>12} {:>8}", "true pos", report.true_positives);
    println!("{:>12} {:>8}", "false pos", report.false_positives);
    println!("{:>12} {:>8}", "false neg", report.false_negatives);
    println!();
    println!(
        "{:>12} {:>8} {:>8} {:>8}",
        "precision", "recall", "F1", "F0.5"
    );
    println!(
        "{:>12.4} {:>8.4} {:>8.4} {:>8.4}",
        report.precision, report.recall, report.f1, report.f05
    );
    println!();
    // Machine-readable block: matching is span-exact over aligner edits.
    println!("matching=span-exact");
    println!("tp={}", report.true_positives);
    println!("fp={}", report.false_positives);
    println!("fn={}", report.false_negatives);
    println!("precision={:.6}", report.precision);
    println!("recall={:.6}", report.recall);
    println!("f1={:.6}", report.f1);
    println!("f05={:.6}", report.f05);
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let sources = read_token_lines(&args.source)?;
    let outputs = read_token_lines(&args.system)?;
    let gold = load_gold_m2(&args.gold, &sources)?;
    let report = score_corpus(&sources, &outputs, &gold)?;
    print_report(&report);
    Ok(())
}

fn expand_rates(rates: &[f64], systems: usize, what: &str) -> Result<Vec<f64>> {
    match rates.len() {
        1 => Ok(vec![rates[0]; systems]),
        n if n == systems => Ok(rates.to_vec()),
        n => bail!("{what} needs 1 or {systems} values, got {n}"),
    }
}

fn starter_manifest(systems: usize) -> ExperimentManifest {
    use gecomb_core::harness::experiment::{DataSection, GridSection, OutputSection, SplitSection};
    ExperimentManifest {
        data: DataSection {
            source: PathBuf::from("source.txt"),
            hypotheses: (0..systems).map(|i| PathBuf::from(format!("hyp{i}.txt"))).collect(),
            gold: PathBuf::from("gold.m2"),
            names: Vec::new(),
        },
        split: SplitSection::default(),
        train: TrainingConfig::default(),
        grid: GridSection {
            tau: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            min_votes: vec![systems / 2 + 1],
            subset_sizes: if systems > 3 { vec![3, systems] } else { Vec::new() },
            ..GridSection::default()
        },
        output: OutputSection { dir: PathBuf::from("out") },
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec {
        sentences: args.sentences,
        systems: args.systems,
        vocab_size: args.vocab,
        min_len: args.min_len,
        max_len: args.max_len,
        corruption_rate: args.corruption,
        fix_rates: expand_rates(&args.fix_rates, args.systems, "--fix-rate")?,
        spurious_rates: expand_rates(&args.spurious_rates, args.systems, "--spurious-rate")?,
        correlation: args.correlation,
        seed: args.seed,
    };
    let corpus = generate(&spec)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let paths = corpus.write_to_dir(&args.out_dir)?;
    println!(
        "wrote {} sentences x {} systems to {}",
        args.sentences,
        args.systems,
        args.out_dir.display()
    );
    for path in std::iter::once(&paths.source)
        .chain(std::iter::once(&paths.clean))
        .chain(std::iter::once(&paths.gold))
        .chain(paths.hypotheses.iter())
    {
        println!("  {}", path.display());
    }
    if args.manifest {
        let manifest = starter_manifest(args.systems);
        let path = args.out_dir.join("manifest.toml");
        std::fs::write(&path, manifest.to_toml())
            .with_context(|| format!("writing {}", path.display()))?;
        println!("  {}", path.display());
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let manifest = ExperimentManifest::load(&args.manifest)?;
    let base = args
        .manifest
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_owned();
    let report = run_experiment(&manifest, &base)?;
    let paths = write_report(&manifest, &report, &base)?;
    print!("{}", gecomb_core::harness::experiment::render_summary(&report));
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let manifest = ExperimentManifest::load(&args.manifest)?;
    manifest.validate()?;
    let base = args
        .manifest
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_owned();
    let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };

    let sources = read_token_lines(&resolve(&manifest.data.source))?;
    let hyp_paths: Vec<PathBuf> = manifest.data.hypotheses.iter().map(&resolve).collect();
    let hypotheses = load_hypothesis_files(&hyp_paths, sources.len())?;
    let gold = load_gold_m2(&resolve(&manifest.data.gold), &sources)?;
    let gold_edits = gold_edit_lists(&gold)?;

    let split = gecomb_core::harness::synth::split_indices(
        sources.len(),
        manifest.split.train,
        manifest.split.dev,
        manifest.split.seed,
    );
    let examples = build_training_set(&sources, &hypotheses, &gold_edits, &split.train);
    let model = train(&examples, &manifest.train)?.model;

    let indices: Vec<usize> = match args.split.as_str() {
        "dev" => split.dev,
        "test" => split.test,
        _ => (0..sources.len()).collect(),
    };
    let pick = |items: &[Vec<String>]| -> Vec<Vec<String>> {
        indices.iter().map(|&i| items[i].clone()).collect()
    };
    let eval_sources = pick(&sources);
    let eval_hyps: Vec<Vec<Vec<String>>> = indices.iter().map(|&i| hypotheses[i].clone()).collect();
    let eval_gold: Vec<_> = indices.iter().map(|&i| gold[i].clone()).collect();

    let swept = threshold_sweep(
        &eval_sources,
        &eval_hyps,
        &eval_gold,
        &model,
        &args.pipeline.config(None),
        &args.tau,
    )?;

    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9}  ({} {} sentences)",
        "tau", "P", "R", "F1", "F0.5", indices.len(), args.split
    );
    let mut csv_text = String::from("tau,precision,recall,f1,f05\n");
    for (tau, report) in &swept {
        println!(
            "{tau:>6.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            report.precision, report.recall, report.f1, report.f05
        );
        writeln!(
            csv_text,
            "{tau},{:.4},{:.4},{:.4},{:.4}",
            report.precision, report.recall, report.f1, report.f05
        )?;
    }
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, csv_text)
            .with_context(|| format!("writing {}", csv_path.display()))?;
        println!("wrote {}", csv_path.display());
    }
    Ok(())
}
