//! The evaluation harness end to end, fully offline.
//!
//! Runs the embedding-only baseline over the bundled gold dataset with the
//! deterministic mock embedder, prints the report in all three formats, and
//! persists a run directory (config snapshot, reports, per-cell traces).
//! The scripted backend is empty: the baseline never consults a model, and
//! an unexpected prompt would fail loudly rather than fake an answer.
//!
//! Run with `cargo run --example scripted_eval`.

use std::path::PathBuf;

use xqlparse::embed::MockEmbedder;
use xqlparse::eval::{
    emit_report, persist_run, run_parse_eval, BackendSpec, EmbedSpec, ReportFormat, RunConfig,
    Task,
};
use xqlparse::lang::Language;
use xqlparse::llm::ScriptedBackend;
use xqlparse::strategies::StrategyKind;

fn main() -> anyhow::Result<()> {
    let data_dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/data"));
    let out_root = std::env::temp_dir().join("xqlparse-example-runs");

    let config = RunConfig {
        task: Task::ParseEval,
        dataset_dir: data_dir.clone(),
        dataset: "goldset".to_string(),
        languages: vec![Language::En],
        strategies: vec![StrategyKind::Nn],
        approaches: vec![],
        backend: BackendSpec::Scripted { fixtures: PathBuf::from("(inline)") },
        embed: EmbedSpec::Mock,
        model: "mock".to_string(),
        shots: 5,
        k: 3,
        seed: 0,
        parallelism: 4,
        out_dir: Some(out_root.clone()),
        remap: None,
    };

    let backend = ScriptedBackend::new("scripted:inline");
    let provider = MockEmbedder::new();
    let run = run_parse_eval(&config, &backend, &provider)?;

    println!("{}", emit_report(&run.report, ReportFormat::Markdown));
    println!("--- csv ---\n{}", emit_report(&run.report, ReportFormat::Csv));

    let cell = run.report.cell(Language::En, "nn").expect("the grid has one cell");
    println!(
        "nn on en: micro-F1 {:.2} ({} of {} correct, {} failed)",
        cell.micro_f1, cell.correct, cell.total, cell.failed
    );

    let dir = persist_run(&run, &out_root)?;
    println!("\nrun persisted under {}:", dir.display());
    let mut names: Vec<String> = Vec::new();
    for entry in walk(&dir)? {
        names.push(entry.strip_prefix(&dir)?.display().to_string());
    }
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}

fn walk(dir: &std::path::Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            files.extend(walk(&path)?);
        } else {
            files.push(path);
        }
    }
    Ok(files)
}
