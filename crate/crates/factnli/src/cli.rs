//! Command-line interface. Exit codes: 0 success, 1 usage or invalid input,
//! 2 runtime failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use factnli_core::dataset::{
    dedup, generate_kg_grounded, label_counts, split, Example, LabeledDataset,
};
use factnli_core::knowledge::{trace_facts, verbalize_triplet, RetrievalOptions};
use factnli_core::metrics::{compare_models, evaluate, Metrics};
use factnli_core::model::{Label, ModelConfig, Variant};
use factnli_core::prompt::{default_templates, GenTemplate, TaskKind};
use factnli_core::train::{prepare_model, train, TrainConfig, TrainHistory};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::checkpoint::{load_model, save_model};
use crate::error::{Error, Result};
use crate::io::{load_dataset, load_kg, load_stopwords, read_text, save_dataset, write_text};
use crate::remote::{generate_remote, GenConfig, HttpTransport};
use crate::report::{py_list, py_str, py_tuple, RunReport};

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "factnli",
    version,
    about = "Knowledge-graph augmented NLI for fact-checking"
)]
pub struct Cli {
    /// Print the run report as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a KG file and report counts.
    KgValidate(KgArgs),
    /// Retrieve and verbalize KG facts for a sentence.
    Facts(FactsArgs),
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labelled dataset.
    Eval(EvalArgs),
    /// Compare a baseline and a proposed checkpoint with a signed-rank test.
    Compare(CompareArgs),
    /// Dataset utilities.
    #[command(subcommand)]
    Dataset(DatasetCommand),
}

#[derive(Debug, Args)]
pub struct KgArgs {
    #[arg(long)]
    pub kg: PathBuf,
}

#[derive(Debug, Args)]
pub struct KnowledgeArgs {
    /// Knowledge graph TSV (source, relation, target).
    #[arg(long)]
    pub kg: PathBuf,
    /// Stopword list, one word per line. Defaults to the bundled Indonesian list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactsArgs {
    #[command(flatten)]
    pub knowledge: KnowledgeArgs,
    #[arg(long)]
    pub text: String,
    /// Print every intermediate retrieval step.
    #[arg(long)]
    pub verbose: bool,
    /// Drop repeated triplets before verbalizing.
    #[arg(long)]
    pub dedup_triplets: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    #[command(flatten)]
    pub knowledge: KnowledgeArgs,
    /// Train the NLI-only baseline instead of the fact-fused model.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch history table (TSV).
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// TOML file with [train] and [model] tables; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    #[arg(long)]
    pub min_freq: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub knowledge: KnowledgeArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub proposed: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub knowledge: KnowledgeArgs,
    /// Test examples per paired accuracy block.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub block_size: u64,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Split into train/val/test (64/16/20) JSONL files.
    Split(SplitArgs),
    /// Remove repeated (premise, hypothesis) pairs, keeping the first.
    Dedup(DedupArgs),
    /// Generate pairs through a chat-completion endpoint.
    Gen(GenArgs),
    /// Generate a synthetic dataset whose labels follow from the KG.
    GenKg(GenKgArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving train.jsonl, val.jsonl and test.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Apply the split rule within each label class.
    #[arg(long)]
    pub stratified: bool,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Premise sentences, one per line.
    #[arg(long)]
    pub premises: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Request/response log (JSONL). Defaults to OUTPUT with `.audit.jsonl` appended.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    /// JSON list of {"kind", "text"} templates replacing the built-in prompts.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Skip the paraphrase step.
    #[arg(long)]
    pub no_paraphrase: bool,
    /// TOML file with a [gen] table; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_paraphrases: Option<usize>,
    #[arg(long)]
    pub n_hypotheses: Option<usize>,
    #[arg(long)]
    pub max_words: Option<usize>,
    #[arg(long)]
    pub api_url: Option<String>,
    #[arg(long)]
    pub api_model: Option<String>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenKgArgs {
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub n_per_label: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    train: TrainConfig,
    model: ModelConfig,
    gen: GenConfig,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => toml::from_str(&read_text(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

struct Outcome {
    report: RunReport,
    text: String,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                1
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let started = Instant::now();
    match dispatch(&cli.command, echo) {
        Ok(mut outcome) => {
            outcome.report.set_elapsed(started.elapsed());
            if cli.json {
                let _ = writeln!(out, "{}", outcome.report.to_json());
            } else {
                for w in &outcome.report.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
                let _ = write!(out, "{}", outcome.text);
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, echo: Vec<String>) -> Result<Outcome> {
    match command {
        Command::KgValidate(a) => cmd_kg_validate(a, echo),
        Command::Facts(a) => cmd_facts(a, echo),
        Command::Train(a) => cmd_train(a, echo),
        Command::Eval(a) => cmd_eval(a, echo),
        Command::Compare(a) => cmd_compare(a, echo),
        Command::Dataset(DatasetCommand::Split(a)) => cmd_split(a, echo),
        Command::Dataset(DatasetCommand::Dedup(a)) => cmd_dedup(a, echo),
        Command::Dataset(DatasetCommand::Gen(a)) => cmd_gen(a, echo),
        Command::Dataset(DatasetCommand::GenKg(a)) => cmd_gen_kg(a, echo),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payload serializes")
}

fn cmd_kg_validate(a: &KgArgs, echo: Vec<String>) -> Result<Outcome> {
    let kg = load_kg(&a.kg)?;
    let mut report = RunReport::new("kg-validate", echo);
    report.config = json!({ "kg": a.kg });
    report.result = json!({
        "triplets": kg.len(),
        "entities": kg.entity_count(),
        "duplicates": kg.duplicate_count(),
    });
    let text = format!(
        "{} triplets\n{} entities\n{} duplicates\n",
        kg.len(),
        kg.entity_count(),
        kg.duplicate_count()
    );
    Ok(Outcome { report, text })
}

fn cmd_facts(a: &FactsArgs, echo: Vec<String>) -> Result<Outcome> {
    let kg = load_kg(&a.knowledge.kg)?;
    let sw = load_stopwords(a.knowledge.stopwords.as_deref())?;
    let trace = trace_facts(
        &a.text,
        &kg,
        &sw,
        RetrievalOptions {
            dedup_triplets: a.dedup_triplets,
        },
    );
    let paragraph = trace.paragraph.text().to_string();
    let triplets: Vec<Value> = trace
        .triplets
        .iter()
        .map(|t| json!([t.source(), t.relation(), t.target()]))
        .collect();
    let mut report = RunReport::new("facts", echo);
    report.config = json!({
        "kg": a.knowledge.kg,
        "stopwords": a.knowledge.stopwords,
        "dedup_triplets": a.dedup_triplets,
    });
    report.result = json!({
        "input": a.text,
        "words": trace.words,
        "entities": trace.entities,
        "triplets": triplets,
        "sentences": trace.paragraph.sentences(),
        "paragraph": paragraph,
    });

    let mut text = String::new();
    if a.verbose {
        let triplet_reprs: Vec<String> = trace
            .triplets
            .iter()
            .map(|t| py_tuple(&[t.source(), t.relation(), t.target()]))
            .collect();
        text.push_str("Step\tData\n");
        text.push_str(&format!("Input\t{}\n", py_str(&a.text)));
        text.push_str(&format!("1-2\t{}\n", py_tuple(&trace.words)));
        text.push_str(&format!("3\t[{}]\n", triplet_reprs.join(", ")));
        text.push_str(&format!("4\t{}\n", py_list(trace.paragraph.sentences())));
        text.push_str(&format!("5\t{}\n", py_str(&paragraph)));
        text.push_str(&format!("entities\t{}\n", py_list(&trace.entities)));
        for t in &trace.triplets {
            text.push_str(&format!(
                "provenance\t{}\t{}\t{}\t-> {}\n",
                t.source(),
                t.relation(),
                t.target(),
                verbalize_triplet(t)
            ));
        }
    } else {
        text.push_str(&paragraph);
        text.push('\n');
    }
    if paragraph.is_empty() {
        report.warnings.push("empty fact paragraph".into());
        text.push_str("note: empty fact paragraph\n");
    }
    Ok(Outcome { report, text })
}

fn history_table(history: &TrainHistory) -> String {
    let mut s = String::from(
        "epoch\ttrain_loss\ttrain_accuracy\tval_loss\tprecision\trecall\taccuracy\tf1\n",
    );
    for e in &history.epochs {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            e.epoch,
            e.train_loss,
            e.train_accuracy,
            e.val_loss,
            e.val.precision,
            e.val.recall,
            e.val.accuracy,
            e.val.f1
        ));
    }
    s
}

fn cmd_train(a: &TrainArgs, echo: Vec<String>) -> Result<Outcome> {
    let file = load_file_config(a.config.as_deref())?;
    let mut cfg = file.train;
    set(&mut cfg.seed, a.seed);
    set(&mut cfg.learning_rate, a.learning_rate);
    set(&mut cfg.batch_size, a.batch_size);
    set(&mut cfg.max_epochs, a.max_epochs);
    set(&mut cfg.patience, a.patience);
    set(&mut cfg.init_scale, a.init_scale);
    set(&mut cfg.min_freq, a.min_freq);
    let mut model_cfg = file.model;
    set(&mut model_cfg.embed_dim, a.embed_dim);
    set(&mut model_cfg.hidden_dim, a.hidden_dim);
    if let Some(n) = a.max_len {
        model_cfg.pair_max_len = n;
        model_cfg.fact_max_len = n;
    }
    cfg.validate()?;
    if model_cfg.embed_dim == 0 || model_cfg.hidden_dim == 0 {
        return Err(Error::Config(
            "embed_dim and hidden_dim must be positive".into(),
        ));
    }
    let variant = if a.baseline {
        Variant::Baseline
    } else {
        Variant::Proposed
    };

    let train_set = load_dataset(&a.train)?;
    let val_set = load_dataset(&a.val)?;
    let kg = load_kg(&a.knowledge.kg)?;
    let sw = load_stopwords(a.knowledge.stopwords.as_deref())?;
    let model = prepare_model(variant, model_cfg, &train_set.examples, &kg, &sw, &cfg)?;
    let (model, history) = train(
        model,
        &train_set.examples,
        &val_set.examples,
        &kg,
        &sw,
        &cfg,
    )?;
    save_model(&a.out, &model, Some(cfg))?;
    let table = history_table(&history);
    if let Some(path) = &a.history {
        write_text(path, &table)?;
    }

    let mut report = RunReport::new("train", echo);
    report.seed = Some(cfg.seed);
    report.config = json!({
        "variant": variant,
        "train": cfg,
        "model": model_cfg,
        "train_path": a.train,
        "val_path": a.val,
        "kg": a.knowledge.kg,
        "out": a.out,
    });
    report.result = json!({
        "vocab_size": model.vocab().len(),
        "history": to_value(&history),
        "checkpoint": a.out,
    });
    let best = history.best().expect("at least one epoch");
    let text = format!(
        "{table}trained {variant} model: {} epochs, best epoch {} (val loss {}, val accuracy {}){}\ncheckpoint written to {}\n",
        history.epochs.len(),
        history.best_epoch,
        best.val_loss,
        best.val.accuracy,
        if history.stopped_early { ", stopped early" } else { "" },
        a.out.display()
    );
    Ok(Outcome { report, text })
}

fn metrics_text(m: &Metrics) -> String {
    let mut s = format!(
        "precision\t{:.4}\nrecall\t{:.4}\naccuracy\t{:.4}\nf1\t{:.4}\n\nlabel\ttrue\ttotal\n",
        m.precision, m.recall, m.accuracy, m.f1
    );
    for l in Label::ALL {
        let total: u64 = m.confusion[l.index()].iter().sum();
        s.push_str(&format!("{l}\t{}\t{total}\n", m.per_class_true[l.index()]));
    }
    s
}

fn cmd_eval(a: &EvalArgs, echo: Vec<String>) -> Result<Outcome> {
    let model = load_model(&a.model)?;
    let test = load_dataset(&a.test)?;
    let kg = load_kg(&a.knowledge.kg)?;
    let sw = load_stopwords(a.knowledge.stopwords.as_deref())?;
    let m = evaluate(&model, &test.examples, &kg, &sw)?;
    let mut report = RunReport::new("eval", echo);
    report.config = json!({
        "model": a.model,
        "variant": model.variant(),
        "test": a.test,
        "kg": a.knowledge.kg,
    });
    report.result = to_value(&m);
    let text = format!(
        "{} model on {} examples\n{}",
        model.variant(),
        m.total(),
        metrics_text(&m)
    );
    Ok(Outcome { report, text })
}

fn cmd_compare(a: &CompareArgs, echo: Vec<String>) -> Result<Outcome> {
    let baseline = load_model(&a.baseline)?;
    let proposed = load_model(&a.proposed)?;
    let test = load_dataset(&a.test)?;
    let kg = load_kg(&a.knowledge.kg)?;
    let sw = load_stopwords(a.knowledge.stopwords.as_deref())?;
    let block_size = a.block_size as usize;
    let cmp = compare_models(&baseline, &proposed, &test.examples, &kg, &sw, block_size)?;
    let significant = cmp.wilcoxon.p_value < ALPHA;

    let mut report = RunReport::new("compare", echo);
    if baseline.variant() != Variant::Baseline {
        report.warnings.push(format!(
            "--baseline checkpoint is a {} model",
            baseline.variant()
        ));
    }
    if proposed.variant() != Variant::Proposed {
        report.warnings.push(format!(
            "--proposed checkpoint is a {} model",
            proposed.variant()
        ));
    }
    report.config = json!({
        "baseline": a.baseline,
        "proposed": a.proposed,
        "test": a.test,
        "kg": a.knowledge.kg,
        "block_size": block_size,
        "alpha": ALPHA,
    });
    let mut result = to_value(&cmp);
    result["significant"] = json!(significant);
    report.result = result;

    let w = &cmp.wilcoxon;
    let text = format!(
        "baseline ({})\n{}\nproposed ({})\n{}\nwilcoxon signed-rank on per-block accuracy (block size {block_size}, {} blocks, {} non-zero)\nW+ {}  W- {}  statistic {}  p = {} ({:?})\n{} at alpha = {ALPHA}\n",
        baseline.variant(),
        metrics_text(&cmp.baseline),
        proposed.variant(),
        metrics_text(&cmp.proposed),
        cmp.block_accuracies.len(),
        w.n_effective,
        w.w_plus,
        w.w_minus,
        w.statistic,
        w.p_value,
        w.method,
        if significant { "significant" } else { "not significant" },
    );
    Ok(Outcome { report, text })
}

fn counts_json(d: &[Example]) -> Value {
    let c = label_counts(d);
    json!({ "entailment": c[0], "contradiction": c[1], "neutral": c[2] })
}

fn cmd_split(a: &SplitArgs, echo: Vec<String>) -> Result<Outcome> {
    let d = load_dataset(&a.input)?;
    let parts = split(&d, a.seed, a.stratified)?;
    fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    for (name, part) in [
        ("train", &parts.train),
        ("val", &parts.val),
        ("test", &parts.test),
    ] {
        save_dataset(&a.out_dir.join(format!("{name}.jsonl")), part)?;
    }
    let mut report = RunReport::new("dataset split", echo);
    report.seed = Some(a.seed);
    report.config = json!({ "input": a.input, "out_dir": a.out_dir, "stratified": a.stratified });
    report.result = json!({
        "total": d.len(),
        "train": parts.train.len(),
        "val": parts.val.len(),
        "test": parts.test.len(),
        "label_counts": {
            "train": counts_json(&parts.train),
            "val": counts_json(&parts.val),
            "test": counts_json(&parts.test),
        },
    });
    let text = format!(
        "train {}\nval {}\ntest {}\n",
        parts.train.len(),
        parts.val.len(),
        parts.test.len()
    );
    Ok(Outcome { report, text })
}

fn cmd_dedup(a: &DedupArgs, echo: Vec<String>) -> Result<Outcome> {
    let d = load_dataset(&a.input)?;
    let (out, rep) = dedup(&d);
    save_dataset(&a.output, &out.examples)?;
    let mut report = RunReport::new("dataset dedup", echo);
    report.config = json!({ "input": a.input, "output": a.output });
    report.result = to_value(&rep);
    let text = format!(
        "kept {}\ndropped {}\nconflicting labels {}\n",
        rep.kept, rep.dropped, rep.conflicts
    );
    Ok(Outcome { report, text })
}

#[derive(Deserialize)]
struct TemplateSpec {
    kind: TaskKind,
    text: String,
}

fn load_templates(path: Option<&Path>) -> Result<Vec<GenTemplate>> {
    let Some(path) = path else {
        return Ok(default_templates());
    };
    let specs: Vec<TemplateSpec> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    specs
        .into_iter()
        .map(|s| GenTemplate::new(s.kind, s.text).map_err(Error::from))
        .collect()
}

fn cmd_gen(a: &GenArgs, echo: Vec<String>) -> Result<Outcome> {
    let file = load_file_config(a.config.as_deref())?;
    let mut cfg = file.gen;
    set(&mut cfg.n_paraphrases, a.n_paraphrases);
    set(&mut cfg.n_hypotheses, a.n_hypotheses);
    set(&mut cfg.max_words, a.max_words);
    set(&mut cfg.api_url, a.api_url.clone());
    set(&mut cfg.api_model, a.api_model.clone());
    set(&mut cfg.retry.max_attempts, a.max_attempts);
    cfg.validate()?;
    let mut templates = load_templates(a.templates.as_deref())?;
    if a.no_paraphrase {
        templates.retain(|t| t.kind() != TaskKind::Paraphrase);
    }
    let premises: Vec<String> = read_text(&a.premises)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let mut transport = HttpTransport::from_env(&cfg)?;
    let audit_path = a.audit.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".audit.jsonl");
        PathBuf::from(p)
    });
    let file = File::create(&audit_path).map_err(|source| Error::Io {
        path: audit_path.clone(),
        source,
    })?;
    let mut audit = BufWriter::new(file);
    let (dataset, summary) =
        generate_remote(&premises, &templates, &cfg, &mut transport, &mut audit)?;
    save_dataset(&a.output, &dataset.examples)?;

    let mut report = RunReport::new("dataset gen", echo);
    report.config = json!({
        "gen": cfg,
        "premises": a.premises,
        "output": a.output,
        "audit": audit_path,
        "templates": templates,
    });
    report.result = to_value(&summary);
    let text = format!(
        "{} examples written ({} requests, {} skipped replies, {} duplicates dropped)\n",
        dataset.len(),
        summary.requests,
        summary.skipped,
        summary.dedup.dropped
    );
    Ok(Outcome { report, text })
}

fn cmd_gen_kg(a: &GenKgArgs, echo: Vec<String>) -> Result<Outcome> {
    let kg = load_kg(&a.kg)?;
    let d: LabeledDataset = generate_kg_grounded(&kg, a.n_per_label, a.seed)?;
    save_dataset(&a.output, &d.examples)?;
    let mut report = RunReport::new("dataset gen-kg", echo);
    report.seed = Some(a.seed);
    report.config = json!({ "kg": a.kg, "output": a.output, "n_per_label": a.n_per_label });
    report.result = json!({ "examples": d.len(), "label_counts": counts_json(&d.examples) });
    let c = d.label_counts();
    let text = format!(
        "{} examples written\nentailment {}\ncontradiction {}\nneutral {}\n",
        d.len(),
        c[0],
        c[1],
        c[2]
    );
    Ok(Outcome { report, text })
}
