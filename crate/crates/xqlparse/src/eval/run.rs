//! The evaluators: one grid cell at a time, per-question requests fanned out
//! across a bounded worker pool, every trace kept for the run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::json;

use crate::corpus::{load_dataset, Dataset, DatasetKind, CoxqlRecord, MIX_ALGORITHM};
use crate::embed::{EmbedStore, EmbeddingProvider};
use crate::extract::{
    build_extraction_prompt, classify_intent_fewshot, extract_one, extraction_versions,
    intent_template_version, matches_gold, score_extraction, CompassRecord, ExtractPool,
    ExtractionResult,
};
use crate::lang::Language;
use crate::llm::{Backend, Tokenizer};
use crate::query::{compare_parses, parse_label, Registry};
use crate::strategies::{
    prompts, run_strategy, StrategyConfig, StrategyContext, TrainExample,
};

use super::{
    CellResult, EvalError, EvalReport, GridCell, RunConfig, RunMetadata, Task, TemplateVersion,
};

/// Per-question artifacts of one grid cell, one JSON value per test instance.
#[derive(Debug, Clone, Serialize)]
pub struct CellTraces {
    pub language: Language,
    pub method: String,
    pub records: Vec<serde_json::Value>,
}

/// A finished run: the report plus everything needed to audit it.
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: EvalReport,
    pub traces: Vec<CellTraces>,
}

/// Maps `f` over `items` with up to `parallelism` threads, preserving input
/// order in the output.
fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    parallelism: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let workers = parallelism.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots = Mutex::new(Vec::new());
    slots.lock().unwrap().resize_with(items.len(), || None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= items.len() {
                    break;
                }
                let result = f(&items[index]);
                slots.lock().unwrap()[index] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every index was processed"))
        .collect()
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn metadata(
    config: &RunConfig,
    backend: &dyn Backend,
    provider: &dyn EmbeddingProvider,
    templates: Vec<TemplateVersion>,
    started_at: String,
) -> RunMetadata {
    RunMetadata {
        config: config.clone(),
        started_at,
        finished_at: now_rfc3339(),
        backend_id: backend.name().to_string(),
        embed_id: provider.name().to_string(),
        seed: config.seed,
        prompt_templates: templates,
        mix_algorithm: MIX_ALGORITHM.to_string(),
    }
}

/// True when both labels parse and agree after canonicalization.
fn labels_match(predicted: &str, gold: &str, registry: &Registry) -> bool {
    match (parse_label(predicted, registry), parse_label(gold, registry)) {
        (Ok(p), Ok(g)) => compare_parses(&p, &g, registry),
        _ => false,
    }
}

/// Same-language records when the split has any, the whole split otherwise —
/// so monolingual pools are preferred but an English-only train split still
/// serves every evaluation language.
fn language_pool<R>(records: &[R], language: Language, lang_of: impl Fn(&R) -> Language) -> Vec<&R> {
    let same: Vec<&R> = records.iter().filter(|r| lang_of(r) == language).collect();
    if same.is_empty() {
        records.iter().collect()
    } else {
        same
    }
}

/// Completion budget for one extracted span.
const EXTRACT_TOKENS: usize = 96;

/// Evaluates every configured strategy over every configured language on the
/// test split, scoring canonical-tree equality against the gold parse.
pub fn run_parse_eval(
    config: &RunConfig,
    backend: &dyn Backend,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalRun, EvalError> {
    config.validate()?;
    let started_at = now_rfc3339();
    let registry = Registry::coxql();
    let dataset = load_dataset(
        &config.dataset_dir,
        &config.dataset,
        DatasetKind::Coxql,
        &registry,
        config.remap.as_ref(),
    )?;
    let Dataset::Coxql(bundle) = dataset else {
        return Err(EvalError::Config("parse evaluation needs a parsing dataset".into()));
    };
    let tokenizer = Tokenizer::for_registry(&registry);
    let store = EmbedStore::new(provider);
    let strategy_config = StrategyConfig {
        gd_shots: config.shots,
        mp_shots: config.shots,
        k: config.k,
        ..StrategyConfig::default()
    };

    let mut grid = Vec::new();
    let mut traces = Vec::new();
    for &language in &config.languages {
        let test: Vec<&CoxqlRecord> =
            bundle.test.iter().filter(|r| r.language == language).collect();
        let pool: Vec<TrainExample> = language_pool(&bundle.train, language, |r| r.language)
            .into_iter()
            .map(|r| TrainExample::new(&r.question, &r.parse))
            .collect();
        let ctx =
            StrategyContext::new(&registry, &pool, &store, backend, &tokenizer, strategy_config)?;
        for &strategy in &config.strategies {
            let outcomes = parallel_map(&test, config.parallelism, |record| {
                run_strategy(strategy, &ctx, &record.question)
            });
            let mut correct = 0;
            let mut failed = 0;
            let mut records = Vec::with_capacity(test.len());
            for (index, (record, outcome)) in test.iter().zip(&outcomes).enumerate() {
                let mut line = json!({
                    "index": index,
                    "question": record.question,
                    "gold": record.parse,
                    "correct": false,
                });
                match outcome {
                    Ok(trace) => {
                        let matched = trace
                            .final_parse
                            .as_deref()
                            .is_some_and(|p| labels_match(p, &record.parse, &registry));
                        if matched {
                            correct += 1;
                        }
                        if !trace.succeeded() {
                            failed += 1;
                        }
                        line["correct"] = json!(matched);
                        line["trace"] = serde_json::to_value(trace).expect("trace serializes");
                    }
                    Err(err) => {
                        failed += 1;
                        line["error"] = json!(err.to_string());
                    }
                }
                records.push(line);
            }
            let mut diagnostics = BTreeMap::new();
            diagnostics
                .insert("failure_rate".to_string(), super::micro_f1(failed, test.len()));
            grid.push(GridCell {
                language,
                method: strategy.as_str().to_string(),
                model: config.model.clone(),
                result: CellResult::from_counts(correct, failed, test.len(), diagnostics),
            });
            traces.push(CellTraces {
                language,
                method: strategy.as_str().to_string(),
                records,
            });
        }
    }
    let templates = TemplateVersion::from_pairs(prompts::versions());
    let report = EvalReport {
        task: Task::ParseEval,
        grid,
        metadata: metadata(config, backend, provider, templates, started_at),
    };
    Ok(EvalRun { report, traces })
}

/// Evaluates few-shot intent classification per language; an answer that
/// normalizes to no registry intent counts as a failure.
pub fn run_intent_eval(
    config: &RunConfig,
    backend: &dyn Backend,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalRun, EvalError> {
    config.validate()?;
    let started_at = now_rfc3339();
    let registry = Registry::compass();
    let dataset = load_dataset(
        &config.dataset_dir,
        &config.dataset,
        DatasetKind::Compass,
        &registry,
        config.remap.as_ref(),
    )?;
    let Dataset::Compass(bundle) = dataset else {
        return Err(EvalError::Config("intent evaluation needs an extraction dataset".into()));
    };
    let store = EmbedStore::new(provider);

    let mut grid = Vec::new();
    let mut traces = Vec::new();
    for &language in &config.languages {
        let test: Vec<&CompassRecord> =
            bundle.test.iter().filter(|r| r.language == language).collect();
        let pool_records: Vec<CompassRecord> = language_pool(&bundle.train, language, |r| {
            r.language
        })
        .into_iter()
        .cloned()
        .collect();
        let pool = ExtractPool::new(&pool_records, &store)?;
        let outcomes = parallel_map(&test, config.parallelism, |record| {
            classify_intent_fewshot(
                &registry,
                &pool,
                backend,
                &record.user_question,
                language,
                config.shots,
            )
        });
        let mut correct = 0;
        let mut failed = 0;
        let mut records = Vec::with_capacity(test.len());
        for (index, (record, outcome)) in test.iter().zip(&outcomes).enumerate() {
            let mut line = json!({
                "index": index,
                "question": record.user_question,
                "gold": record.operation_name,
                "correct": false,
            });
            match outcome {
                Ok(prediction) => {
                    let matched =
                        prediction.intent.as_deref() == Some(record.operation_name.as_str());
                    if matched {
                        correct += 1;
                    }
                    if prediction.intent.is_none() {
                        failed += 1;
                    }
                    line["correct"] = json!(matched);
                    line["prediction"] =
                        serde_json::to_value(prediction).expect("prediction serializes");
                }
                Err(err) => {
                    failed += 1;
                    line["error"] = json!(err.to_string());
                }
            }
            records.push(line);
        }
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("failure_rate".to_string(), super::micro_f1(failed, test.len()));
        grid.push(GridCell {
            language,
            method: "intent_fewshot".to_string(),
            model: config.model.clone(),
            result: CellResult::from_counts(correct, failed, test.len(), diagnostics),
        });
        traces.push(CellTraces { language, method: "intent_fewshot".to_string(), records });
    }
    let (name, sha) = intent_template_version();
    let templates = TemplateVersion::from_pairs(vec![(name, sha)]);
    let report = EvalReport {
        task: Task::IntentEval,
        grid,
        metadata: metadata(config, backend, provider, templates, started_at),
    };
    Ok(EvalRun { report, traces })
}

/// Evaluates every configured extraction approach per language: build the
/// prompt, complete, decode, score exact match, and keep the character
/// overlap as a diagnostic. Decode errors and backend errors count as
/// failures.
pub fn run_extraction_eval(
    config: &RunConfig,
    backend: &dyn Backend,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalRun, EvalError> {
    config.validate()?;
    let started_at = now_rfc3339();
    let registry = Registry::compass();
    let dataset = load_dataset(
        &config.dataset_dir,
        &config.dataset,
        DatasetKind::Compass,
        &registry,
        config.remap.as_ref(),
    )?;
    let Dataset::Compass(bundle) = dataset else {
        return Err(EvalError::Config(
            "extraction evaluation needs an extraction dataset".into(),
        ));
    };
    let store = EmbedStore::new(provider);

    let mut grid = Vec::new();
    let mut traces = Vec::new();
    for &language in &config.languages {
        let test: Vec<&CompassRecord> =
            bundle.test.iter().filter(|r| r.language == language).collect();
        let pool_records: Vec<CompassRecord> = language_pool(&bundle.train, language, |r| {
            r.language
        })
        .into_iter()
        .cloned()
        .collect();
        let pool = ExtractPool::new(&pool_records, &store)?;
        for &approach in &config.approaches {
            let outcomes = parallel_map(&test, config.parallelism, |record| {
                let demos: Vec<CompassRecord> = pool
                    .demonstrations(&record.user_question, config.shots)?
                    .into_iter()
                    .cloned()
                    .collect();
                let prompt = build_extraction_prompt(approach, &record.user_question, &demos);
                let completion = backend.complete(&prompt, EXTRACT_TOKENS)?;
                Ok::<_, EvalError>((prompt, extract_one(approach, &record.user_question, &completion.text)))
            });
            let mut correct = 0;
            let mut failed = 0;
            let mut decoded: Vec<ExtractionResult> = Vec::new();
            let mut decoded_golds: Vec<CompassRecord> = Vec::new();
            let mut records = Vec::with_capacity(test.len());
            for (index, (record, outcome)) in test.iter().zip(&outcomes).enumerate() {
                let mut line = json!({
                    "index": index,
                    "question": record.user_question,
                    "gold": record.custom_input,
                    "correct": false,
                });
                match outcome {
                    Ok((prompt, result)) => {
                        // A decode error is a failure even when the absent
                        // extraction would coincidentally match an empty gold.
                        let matched = result.decode_error.is_none()
                            && matches_gold(result.extracted.as_deref(), &record.custom_input);
                        if matched {
                            correct += 1;
                        }
                        if result.decode_error.is_some() {
                            failed += 1;
                        }
                        line["correct"] = json!(matched);
                        line["prompt"] = json!(prompt);
                        line["result"] =
                            serde_json::to_value(result).expect("result serializes");
                        decoded.push(result.clone());
                        decoded_golds.push((*record).clone());
                    }
                    Err(err) => {
                        failed += 1;
                        line["error"] = json!(err.to_string());
                    }
                }
                records.push(line);
            }
            let mut diagnostics = BTreeMap::new();
            // Overlap is computed over the instances that produced a decoded
            // result; backend failures contribute only to the failure rate.
            let overlap = score_extraction(&decoded, &decoded_golds).char_overlap_f1;
            diagnostics.insert("char_overlap_f1".to_string(), overlap);
            diagnostics.insert("failure_rate".to_string(), super::micro_f1(failed, test.len()));
            grid.push(GridCell {
                language,
                method: approach.as_str().to_string(),
                model: config.model.clone(),
                result: CellResult::from_counts(correct, failed, test.len(), diagnostics),
            });
            traces.push(CellTraces {
                language,
                method: approach.as_str().to_string(),
                records,
            });
        }
    }
    let templates = TemplateVersion::from_pairs(extraction_versions());
    let report = EvalReport {
        task: Task::ExtractionEval,
        grid,
        metadata: metadata(config, backend, provider, templates, started_at),
    };
    Ok(EvalRun { report, traces })
}

/// Writes the audit trail of a run under `out_root`:
///
/// ```text
/// runs/<timestamp>-<task>/
///   config.json      — exact configuration snapshot
///   report.json/.csv/.md
///   traces/<language>.<method>.jsonl — one line per test question
/// ```
pub fn persist_run(run: &EvalRun, out_root: &Path) -> Result<PathBuf, EvalError> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!("{stamp}-{}", run.report.task);
    let mut dir = out_root.join(&base);
    let mut suffix = 1;
    while dir.exists() {
        suffix += 1;
        dir = out_root.join(format!("{base}-{suffix}"));
    }
    let traces_dir = dir.join("traces");
    fs::create_dir_all(&traces_dir)
        .map_err(|source| EvalError::Io { path: traces_dir.display().to_string(), source })?;

    let write = |path: PathBuf, text: String| -> Result<(), EvalError> {
        fs::write(&path, text)
            .map_err(|source| EvalError::Io { path: path.display().to_string(), source })
    };
    let mut config_json = serde_json::to_string_pretty(&run.report.metadata.config)?;
    config_json.push('\n');
    write(dir.join("config.json"), config_json)?;
    write(dir.join("report.json"), run.report.to_json())?;
    write(dir.join("report.csv"), run.report.to_csv())?;
    write(dir.join("report.md"), run.report.to_markdown())?;
    for cell in &run.traces {
        let mut lines = String::new();
        for record in &cell.records {
            lines.push_str(&serde_json::to_string(record)?);
            lines.push('\n');
        }
        write(traces_dir.join(format!("{}.{}.jsonl", cell.language, cell.method)), lines)?;
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{save_records, split_file_name, Split};
    use crate::embed::MockEmbedder;
    use crate::eval::{BackendSpec, EmbedSpec};
    use crate::extract::{encoded_answer, Approach};
    use crate::llm::ScriptedBackend;
    use crate::strategies::StrategyKind;

    fn write_coxql_dataset(dir: &Path) {
        let train = vec![
            CoxqlRecord::new("what does the model predict for this text", "predict", Language::En),
            CoxqlRecord::new("why did the model decide that", "rationalize", Language::En),
            CoxqlRecord::new("show me the 5 most important words", "nlpattribute topk 5", Language::En),
            CoxqlRecord::new("find examples similar to this one", "similar topk 3", Language::En),
            CoxqlRecord::new("how would you flip this prediction", "cfe", Language::En),
        ];
        let test = vec![
            CoxqlRecord::new("what is the prediction for this input", "predict", Language::En),
            CoxqlRecord::new("explain why you chose that label", "rationalize", Language::En),
            CoxqlRecord::new("which words mattered the most", "nlpattribute topk 5", Language::En),
            CoxqlRecord::new("give me similar training examples", "similar topk 3", Language::En),
        ];
        save_records(&dir.join(split_file_name("toy", Split::Train, Language::En)), &train)
            .unwrap();
        save_records(&dir.join(split_file_name("toy", Split::Test, Language::En)), &test)
            .unwrap();
    }

    fn parse_config(dir: &Path, strategies: Vec<StrategyKind>, parallelism: usize) -> RunConfig {
        RunConfig {
            task: Task::ParseEval,
            dataset_dir: dir.to_path_buf(),
            dataset: "toy".into(),
            languages: vec![Language::En],
            strategies,
            approaches: vec![],
            backend: BackendSpec::Scripted { fixtures: "unused.json".into() },
            embed: EmbedSpec::Mock,
            model: "scripted".into(),
            shots: 3,
            k: 2,
            seed: 17,
            parallelism,
            out_dir: None,
            remap: None,
        }
    }

    #[test]
    fn nearest_neighbor_eval_scores_and_accounts_every_instance() {
        let dir = tempfile::tempdir().unwrap();
        write_coxql_dataset(dir.path());
        let config = parse_config(dir.path(), vec![StrategyKind::Nn], 2);
        let backend = ScriptedBackend::new("never-called");
        let provider = MockEmbedder::new();
        let run = run_parse_eval(&config, &backend, &provider).unwrap();
        let cell = run.report.cell(Language::En, "nn").unwrap();
        assert_eq!(cell.total, 4);
        assert_eq!(cell.correct + cell.incorrect() + cell.failed, cell.total);
        assert!(cell.micro_f1 >= 0.0 && cell.micro_f1 <= 100.0);
        assert_eq!(run.traces.len(), 1);
        assert_eq!(run.traces[0].records.len(), 4);
        assert_eq!(run.report.metadata.embed_id, "mock-trigram-256");
        assert_eq!(run.report.metadata.seed, 17);
        assert!(!run.report.metadata.prompt_templates.is_empty());
    }

    #[test]
    fn reproducibility_identical_config_gives_byte_identical_reports() {
        let dir = tempfile::tempdir().unwrap();
        write_coxql_dataset(dir.path());
        // Parallelism 4 exercises the worker pool; output order must stay
        // deterministic regardless.
        let config = parse_config(dir.path(), vec![StrategyKind::Nn], 4);
        let backend = ScriptedBackend::new("never-called");
        let provider = MockEmbedder::new();
        let a = run_parse_eval(&config, &backend, &provider).unwrap();
        let b = run_parse_eval(&config, &backend, &provider).unwrap();
        assert_eq!(
            a.report.without_timestamps().to_json(),
            b.report.without_timestamps().to_json()
        );
        let traces_a = serde_json::to_string(&a.traces).unwrap();
        let traces_b = serde_json::to_string(&b.traces).unwrap();
        assert_eq!(traces_a, traces_b);
    }

    #[test]
    fn a_strategy_that_always_fails_scores_zero_with_full_failure_counts() {
        let dir = tempfile::tempdir().unwrap();
        write_coxql_dataset(dir.path());
        let config = parse_config(dir.path(), vec![StrategyKind::Mp], 1);
        // No fixtures: every request is a missing-fixture backend error.
        let backend = ScriptedBackend::new("empty");
        let provider = MockEmbedder::new();
        let run = run_parse_eval(&config, &backend, &provider).unwrap();
        let cell = run.report.cell(Language::En, "mp").unwrap();
        assert_eq!(cell.micro_f1, 0.0);
        assert_eq!(cell.failed, cell.total);
        assert_eq!(cell.diagnostics["failure_rate"], 100.0);
        assert!(run.traces[0].records[0]["error"].is_string());
    }

    fn write_compass_dataset(dir: &Path) -> (Vec<CompassRecord>, Vec<CompassRecord>) {
        let mk = |q: &str, op: &str, span: &str| CompassRecord {
            user_question: q.to_string(),
            operation_name: op.to_string(),
            custom_input: span.to_string(),
            language: Language::En,
        };
        let train = vec![
            mk("flip the label of the service was slow", "cfe", "the service was slow"),
            mk("what do you predict for i loved it", "predict", "i loved it"),
            mk("explain the prediction for the food was cold", "rationalize", "the food was cold"),
            mk("can you learn from my corrections", "learn", ""),
        ];
        let test = vec![
            mk("flip the label of the movie was dull", "cfe", "the movie was dull"),
            mk("what do you predict for what a great day", "predict", "what a great day"),
            mk("are you able to learn from feedback", "learn", ""),
        ];
        save_records(&dir.join(split_file_name("spans", Split::Train, Language::En)), &train)
            .unwrap();
        save_records(&dir.join(split_file_name("spans", Split::Test, Language::En)), &test)
            .unwrap();
        (train, test)
    }

    fn extraction_config(dir: &Path, approaches: Vec<Approach>) -> RunConfig {
        RunConfig {
            task: Task::ExtractionEval,
            dataset_dir: dir.to_path_buf(),
            dataset: "spans".into(),
            languages: vec![Language::En],
            strategies: vec![],
            approaches,
            backend: BackendSpec::Scripted { fixtures: "unused.json".into() },
            embed: EmbedSpec::Mock,
            model: "scripted".into(),
            shots: 2,
            k: 3,
            seed: 5,
            parallelism: 2,
            out_dir: None,
            remap: None,
        }
    }

    #[test]
    fn gold_encoded_fixtures_score_one_hundred_for_every_approach() {
        let dir = tempfile::tempdir().unwrap();
        let (train, test) = write_compass_dataset(dir.path());
        let config = extraction_config(dir.path(), Approach::ALL.to_vec());

        // Build fixtures by encoding each gold span exactly as a perfect
        // model would answer, reusing the evaluator's own prompt builder.
        let provider = MockEmbedder::new();
        let store = EmbedStore::new(&provider);
        let pool = ExtractPool::new(&train, &store).unwrap();
        let mut backend = ScriptedBackend::new("gold");
        for approach in Approach::ALL {
            for record in &test {
                let demos: Vec<CompassRecord> = pool
                    .demonstrations(&record.user_question, config.shots)
                    .unwrap()
                    .into_iter()
                    .cloned()
                    .collect();
                let prompt = build_extraction_prompt(approach, &record.user_question, &demos);
                backend.insert(
                    &prompt,
                    encoded_answer(approach, &record.user_question, &record.custom_input),
                );
            }
        }

        let run = run_extraction_eval(&config, &backend, &provider).unwrap();
        for approach in Approach::ALL {
            let cell = run.report.cell(Language::En, approach.as_str()).unwrap();
            assert_eq!(cell.micro_f1, 100.0, "{approach} should be perfect");
            assert_eq!(cell.failed, 0);
            assert_eq!(cell.diagnostics["char_overlap_f1"], 100.0);
        }
    }

    #[test]
    fn decoder_breaking_outputs_score_zero_and_count_as_failures() {
        let dir = tempfile::tempdir().unwrap();
        let (train, test) = write_compass_dataset(dir.path());
        let config = extraction_config(dir.path(), vec![Approach::Gollie]);
        let provider = MockEmbedder::new();
        let store = EmbedStore::new(&provider);
        let pool = ExtractPool::new(&train, &store).unwrap();
        let mut backend = ScriptedBackend::new("broken");
        for record in &test {
            let demos: Vec<CompassRecord> = pool
                .demonstrations(&record.user_question, config.shots)
                .unwrap()
                .into_iter()
                .cloned()
                .collect();
            let prompt = build_extraction_prompt(Approach::Gollie, &record.user_question, &demos);
            backend.insert(&prompt, "this is not a JSON list");
        }
        let run = run_extraction_eval(&config, &backend, &provider).unwrap();
        let cell = run.report.cell(Language::En, "gollie").unwrap();
        assert_eq!(cell.micro_f1, 0.0);
        assert_eq!(cell.failed, cell.total);
        let result = &run.traces[0].records[0]["result"];
        assert_eq!(result["decode_error"]["kind"], "not_a_list");
    }

    #[test]
    fn intent_eval_covers_exactly_the_configured_languages() {
        let dir = tempfile::tempdir().unwrap();
        let (train, test) = write_compass_dataset(dir.path());
        // Mirror the English files as German ones so both languages exist.
        let de = |records: &[CompassRecord]| -> Vec<CompassRecord> {
            records
                .iter()
                .map(|r| CompassRecord { language: Language::De, ..r.clone() })
                .collect()
        };
        save_records(
            &dir.path().join(split_file_name("spans", Split::Train, Language::De)),
            &de(&train),
        )
        .unwrap();
        save_records(
            &dir.path().join(split_file_name("spans", Split::Test, Language::De)),
            &de(&test),
        )
        .unwrap();

        let mut config = extraction_config(dir.path(), vec![]);
        config.task = Task::IntentEval;
        config.languages = vec![Language::En, Language::De];

        let provider = MockEmbedder::new();
        let store = EmbedStore::new(&provider);
        let mut backend = ScriptedBackend::new("echo-gold");
        let registry = Registry::compass();
        for language in [Language::En, Language::De] {
            let train_lang = if language == Language::En { train.clone() } else { de(&train) };
            let test_lang = if language == Language::En { test.clone() } else { de(&test) };
            let pool = ExtractPool::new(&train_lang, &store).unwrap();
            for record in &test_lang {
                let demos = pool.demonstrations(&record.user_question, config.shots).unwrap();
                let pairs: Vec<(&str, &str)> = demos
                    .iter()
                    .map(|d| (d.user_question.as_str(), d.operation_name.as_str()))
                    .collect();
                let prompt =
                    crate::extract::intent_prompt(&registry, &record.user_question, &pairs);
                backend.insert(&prompt, record.operation_name.clone());
            }
        }

        let run = run_intent_eval(&config, &backend, &provider).unwrap();
        let mut langs: Vec<Language> = run.report.grid.iter().map(|c| c.language).collect();
        langs.dedup();
        assert_eq!(langs, vec![Language::En, Language::De]);
        for cell in &run.report.grid {
            assert_eq!(cell.result.micro_f1, 100.0);
            assert_eq!(cell.method, "intent_fewshot");
        }
    }

    #[test]
    fn persist_run_lays_out_the_audit_directory() {
        let dir = tempfile::tempdir().unwrap();
        write_coxql_dataset(dir.path());
        let config = parse_config(dir.path(), vec![StrategyKind::Nn], 1);
        let backend = ScriptedBackend::new("never-called");
        let provider = MockEmbedder::new();
        let run = run_parse_eval(&config, &backend, &provider).unwrap();

        let out_root = dir.path().join("runs");
        let run_dir = persist_run(&run, &out_root).unwrap();
        assert!(run_dir.file_name().unwrap().to_str().unwrap().ends_with("-parse_eval"));
        for name in ["config.json", "report.json", "report.csv", "report.md"] {
            assert!(run_dir.join(name).exists(), "{name} missing");
        }
        let trace_file = run_dir.join("traces/en.nn.jsonl");
        let lines = fs::read_to_string(trace_file).unwrap();
        assert_eq!(lines.lines().count(), 4);
        // A second run in the same second gets a distinct directory.
        let second = persist_run(&run, &out_root).unwrap();
        assert_ne!(second, run_dir);
        // The config snapshot reloads into the identical RunConfig.
        let snapshot: RunConfig =
            serde_json::from_str(&fs::read_to_string(run_dir.join("config.json")).unwrap())
                .unwrap();
        assert_eq!(snapshot, config);
    }
}
