//! Command-line front end: evaluation grids, dataset translation, statistics,
//! similarity lookups, and dataset validation.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use xqlparse::corpus::{
    dataset_stats, load_dataset, save_records, split_file_name, translate_compass,
    translate_coxql, CorpusError, Dataset, DatasetKind, FieldRemap, Split,
    TRANSLATION_RETRY_CAP,
};
use xqlparse::embed::{top_k, EmbedStore};
use xqlparse::eval::{
    build_backend, build_provider, emit_report, persist_run, run_extraction_eval,
    run_intent_eval, run_parse_eval, BackendSpec, EmbedSpec, EvalRun, ReportFormat, RunConfig,
    Task,
};
use xqlparse::extract::Approach;
use xqlparse::lang::Language;
use xqlparse::query::Registry;
use xqlparse::strategies::StrategyKind;

#[derive(Parser)]
#[command(
    name = "xqlparse",
    version,
    about = "Explanation-request parsing and custom-input extraction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an evaluation grid (languages × strategies/approaches).
    Eval(EvalArgs),
    /// Machine-translate one dataset split into a target language.
    Translate(TranslateArgs),
    /// Print per-split operation and language distributions.
    Stats(StatsArgs),
    /// Show the most similar training questions for a query.
    Similarity(SimilarityArgs),
    /// Validate dataset files; prints a violation report on failure.
    Validate(ValidateArgs),
}

/// Flags shared by every command that reads a dataset directory.
#[derive(Args)]
struct DatasetArgs {
    /// Directory holding `{name}.{split}.{lang}.json` files.
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset name (file prefix). Defaults per task: parsing → "coxql",
    /// intent/extraction → "compass".
    #[arg(long)]
    name: Option<String>,
    /// JSON object renaming foreign record keys, e.g. '{"utterance":"question"}'.
    #[arg(long)]
    remap: Option<String>,
}

impl DatasetArgs {
    fn remap(&self) -> anyhow::Result<Option<FieldRemap>> {
        self.remap
            .as_deref()
            .map(|text| serde_json::from_str(text).context("--remap must be a JSON object"))
            .transpose()
    }
}

/// Flags selecting the completion backend.
#[derive(Args)]
struct BackendArgs {
    /// Offline fixtures: `scripted:<fixtures.json>`.
    #[arg(long, conflicts_with = "backend_url")]
    backend: Option<String>,
    /// OpenAI-compatible completions endpoint.
    #[arg(long)]
    backend_url: Option<String>,
    /// Model identifier sent to the HTTP backend and used in report keys.
    #[arg(long, default_value = "default")]
    model: String,
}

impl BackendArgs {
    fn spec(&self) -> anyhow::Result<BackendSpec> {
        match (&self.backend, &self.backend_url) {
            (Some(value), _) => Ok(BackendSpec::parse_cli(value, &self.model)),
            (None, Some(url)) => {
                Ok(BackendSpec::Http { url: url.clone(), model: self.model.clone() })
            }
            (None, None) => bail!("one of --backend or --backend-url is required"),
        }
    }
}

/// Flags selecting the embedding provider.
#[derive(Args)]
struct EmbedArgs {
    /// `mock` for the deterministic offline embedder.
    #[arg(long, conflicts_with = "embed_url")]
    embed: Option<String>,
    /// OpenAI-compatible embeddings endpoint.
    #[arg(long)]
    embed_url: Option<String>,
    /// Model identifier sent to the embeddings endpoint.
    #[arg(long, default_value = "default")]
    embed_model: String,
}

impl EmbedArgs {
    fn spec(&self) -> anyhow::Result<EmbedSpec> {
        match (self.embed.as_deref(), &self.embed_url) {
            (Some("mock"), _) => Ok(EmbedSpec::Mock),
            (Some(other), _) => bail!("unknown embed provider {other:?}; use mock or --embed-url"),
            (None, Some(url)) => {
                Ok(EmbedSpec::Http { url: url.clone(), model: self.embed_model.clone() })
            }
            (None, None) => bail!("one of --embed or --embed-url is required"),
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// parse | intent | extraction (or the full task names).
    #[arg(long)]
    task: String,
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Comma-separated evaluation languages.
    #[arg(long, value_delimiter = ',', default_value = "en")]
    languages: Vec<String>,
    /// Comma-separated parsing strategies (parse task): nn,gd,mp,mp+,gmp.
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    /// Comma-separated extraction approaches: naive,tanl,gptner,gollie.
    #[arg(long, value_delimiter = ',')]
    approaches: Vec<String>,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    /// Demonstrations per prompt.
    #[arg(long, default_value_t = 20)]
    shots: usize,
    /// Candidate-retrieval width for the guided multi-prompt strategy.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concurrent per-question requests within one grid cell.
    #[arg(long, default_value_t = 4)]
    parallelism: usize,
    /// Root directory for run artifacts (config snapshot, traces, reports).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format printed to stdout: markdown | json | csv.
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Load the full run configuration from a JSON file instead of flags
    /// (with ${VAR} environment interpolation).
    #[arg(long, exclusive = true)]
    config: Option<PathBuf>,
}

fn parse_languages(raw: &[String]) -> anyhow::Result<Vec<Language>> {
    raw.iter()
        .map(|s| Language::from_str(s).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<Vec<_>>>()
}

fn eval_config(args: &EvalArgs) -> anyhow::Result<RunConfig> {
    if let Some(path) = &args.config {
        return Ok(RunConfig::from_json_file(path)?);
    }
    let task = Task::from_str(&args.task).map_err(anyhow::Error::msg)?;
    let strategies = args
        .strategies
        .iter()
        .map(|s| StrategyKind::from_str(s).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let approaches = args
        .approaches
        .iter()
        .map(|s| Approach::from_str(s).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let name = args.dataset.name.clone().unwrap_or_else(|| {
        match task {
            Task::ParseEval => "coxql",
            _ => "compass",
        }
        .to_string()
    });
    let config = RunConfig {
        task,
        dataset_dir: args.dataset.dataset.clone(),
        dataset: name,
        languages: parse_languages(&args.languages)?,
        strategies,
        approaches,
        backend: args.backend.spec()?,
        embed: args.embed.spec()?,
        model: args.backend.model.clone(),
        shots: args.shots,
        k: args.k,
        seed: args.seed,
        parallelism: args.parallelism,
        out_dir: args.out.clone(),
        remap: args.dataset.remap()?,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let config = eval_config(&args)?;
    let format = ReportFormat::from_str(&args.format).map_err(anyhow::Error::msg)?;
    let backend = build_backend(&config.backend)?;
    let provider = build_provider(&config.embed);
    let run: EvalRun = match config.task {
        Task::ParseEval => run_parse_eval(&config, backend.as_ref(), provider.as_ref())?,
        Task::IntentEval => run_intent_eval(&config, backend.as_ref(), provider.as_ref())?,
        Task::ExtractionEval => {
            run_extraction_eval(&config, backend.as_ref(), provider.as_ref())?
        }
        other => bail!("use the dedicated subcommand for the {other} task"),
    };
    print!("{}", emit_report(&run.report, format));
    if let Some(out_root) = &config.out_dir {
        let dir = persist_run(&run, out_root)?;
        eprintln!("run artifacts written to {}", dir.display());
    }
    Ok(())
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// coxql (question-only) or compass (joint question + custom input).
    #[arg(long, default_value = "compass")]
    kind: String,
    #[arg(long, default_value = "test")]
    split: String,
    /// Language of the records to translate.
    #[arg(long, default_value = "en")]
    source_language: String,
    /// Language to translate into.
    #[arg(long)]
    target_language: String,
    #[command(flatten)]
    backend: BackendArgs,
    /// Retry cap for containment-violating joint translations.
    #[arg(long, default_value_t = TRANSLATION_RETRY_CAP)]
    cap: usize,
    /// Output directory; defaults to the dataset directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dataset_kind(raw: &str) -> anyhow::Result<DatasetKind> {
    match raw {
        "coxql" => Ok(DatasetKind::Coxql),
        "compass" => Ok(DatasetKind::Compass),
        other => bail!("unknown dataset kind {other:?}; use coxql or compass"),
    }
}

fn registry_for(kind: DatasetKind) -> Registry {
    match kind {
        DatasetKind::Coxql => Registry::coxql(),
        DatasetKind::Compass => Registry::compass(),
    }
}

fn load_named(
    args: &DatasetArgs,
    kind: DatasetKind,
    registry: &Registry,
) -> anyhow::Result<(String, Dataset)> {
    let name = args.name.clone().unwrap_or_else(|| kind.as_str().to_string());
    let dataset = load_dataset(&args.dataset, &name, kind, registry, args.remap()?.as_ref())?;
    Ok((name, dataset))
}

fn cmd_translate(args: TranslateArgs) -> anyhow::Result<()> {
    let kind = dataset_kind(&args.kind)?;
    let registry = registry_for(kind);
    let split = Split::from_str(&args.split).map_err(anyhow::Error::msg)?;
    let source = Language::from_str(&args.source_language)?;
    let target = Language::from_str(&args.target_language)?;
    let (name, dataset) = load_named(&args.dataset, kind, &registry)?;
    let backend = build_backend(&args.backend.spec()?)?;
    let out_dir = args.out.clone().unwrap_or_else(|| args.dataset.dataset.clone());
    let out_path = out_dir.join(split_file_name(&name, split, target));

    match dataset {
        Dataset::Coxql(bundle) => {
            let mut translated = Vec::new();
            for record in bundle.split(split).iter().filter(|r| r.language == source) {
                translated.push(translate_coxql(record, target, backend.as_ref())?.record);
            }
            save_records(&out_path, &translated)?;
            println!("translated {} records to {}", translated.len(), out_path.display());
        }
        Dataset::Compass(bundle) => {
            let mut translated = Vec::new();
            let mut flagged = Vec::new();
            let mut retried = 0usize;
            for (index, record) in
                bundle.split(split).iter().filter(|r| r.language == source).enumerate()
            {
                match translate_compass(record, target, backend.as_ref(), args.cap) {
                    Ok(outcome) => {
                        if outcome.attempts > 1 {
                            retried += 1;
                        }
                        translated.push(outcome.record);
                    }
                    Err(CorpusError::TranslationFailed { attempts, last_response }) => {
                        flagged.push(serde_json::json!({
                            "index": index,
                            "source": record,
                            "attempts": attempts,
                            "last_response": last_response,
                        }));
                    }
                    Err(other) => return Err(other.into()),
                }
            }
            save_records(&out_path, &translated)?;
            println!(
                "translated {} records ({} needed retries) to {}",
                translated.len(),
                retried,
                out_path.display()
            );
            if !flagged.is_empty() {
                let flagged_path = out_dir.join(format!("{name}.{split}.{target}.flagged.json"));
                save_records(&flagged_path, &flagged)?;
                println!(
                    "{} records exhausted the retry cap; kept for manual repair in {}",
                    flagged.len(),
                    flagged_path.display()
                );
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value = "coxql")]
    kind: String,
}

fn cmd_stats(args: StatsArgs) -> anyhow::Result<()> {
    let kind = dataset_kind(&args.kind)?;
    let registry = registry_for(kind);
    let (_, dataset) = load_named(&args.dataset, kind, &registry)?;
    print!("{}", dataset_stats(&dataset, &registry));
    Ok(())
}

#[derive(Args)]
struct SimilarityArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value = "coxql")]
    kind: String,
    #[arg(long, default_value = "train")]
    split: String,
    #[arg(long, default_value = "en")]
    language: String,
    /// Query to find neighbors for.
    #[arg(long)]
    question: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    embed: EmbedArgs,
}

fn cmd_similarity(args: SimilarityArgs) -> anyhow::Result<()> {
    let kind = dataset_kind(&args.kind)?;
    let registry = registry_for(kind);
    let split = Split::from_str(&args.split).map_err(anyhow::Error::msg)?;
    let language = Language::from_str(&args.language)?;
    let (_, dataset) = load_named(&args.dataset, kind, &registry)?;
    let rows: Vec<(String, String)> = match &dataset {
        Dataset::Coxql(bundle) => bundle
            .split(split)
            .iter()
            .filter(|r| r.language == language)
            .map(|r| (r.question.clone(), r.parse.clone()))
            .collect(),
        Dataset::Compass(bundle) => bundle
            .split(split)
            .iter()
            .filter(|r| r.language == language)
            .map(|r| (r.user_question.clone(), r.operation_name.clone()))
            .collect(),
    };
    if rows.is_empty() {
        bail!("no {language} records in the {split} split");
    }
    let provider = build_provider(&args.embed.spec()?);
    let store = EmbedStore::new(provider.as_ref());
    let questions: Vec<&str> = rows.iter().map(|(q, _)| q.as_str()).collect();
    let corpus = store.embed_all(&questions)?;
    let query = store.embed(&args.question)?;
    println!("| rank | score | question | label |");
    println!("|---:|---:|---|---|");
    for (rank, hit) in top_k(&query, &corpus, args.k).iter().enumerate() {
        let (question, label) = &rows[hit.index];
        println!("| {} | {:.4} | {} | {} |", rank + 1, hit.score, question, label);
    }
    Ok(())
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, default_value = "coxql")]
    kind: String,
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<()> {
    let kind = dataset_kind(&args.kind)?;
    let registry = registry_for(kind);
    match load_named(&args.dataset, kind, &registry) {
        Ok((name, dataset)) => {
            let mut counts = BTreeMap::new();
            for split in Split::ALL {
                counts.insert(split.to_string(), dataset.split_len(split));
            }
            println!(
                "{}",
                serde_json::json!({ "dataset": name, "ok": true, "records": counts })
            );
            Ok(())
        }
        Err(err) => {
            if let Some(CorpusError::Validation(report)) = err.downcast_ref::<CorpusError>() {
                println!("{}", serde_json::to_string_pretty(report)?);
                std::process::exit(1);
            }
            Err(err)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Similarity(args) => cmd_similarity(args),
        Command::Validate(args) => cmd_validate(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
