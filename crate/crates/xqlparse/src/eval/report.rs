//! Report grid, micro-F1, and the three output formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lang::Language;

use super::{RunConfig, Task};

/// `100 · correct / total`, the micro-F1 of single-label exact-match
/// evaluation: every instance gets exactly one prediction, so precision,
/// recall, and accuracy coincide.
pub fn micro_f1(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

/// Micro-F1 over aligned prediction/gold label slices.
pub fn micro_f1_labels<T: PartialEq>(predictions: &[T], golds: &[T]) -> f64 {
    assert_eq!(predictions.len(), golds.len(), "predictions and golds must align");
    let correct = predictions.iter().zip(golds).filter(|(p, g)| p == g).count();
    micro_f1(correct, predictions.len())
}

/// One grid cell's metric with full provenance. Failures (unparseable
/// outputs, decode errors, backend errors) count against micro-F1 like any
/// wrong answer, and are additionally broken out in `failed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// Micro-F1 in percent, in [0, 100].
    pub micro_f1: f64,
    pub total: usize,
    pub correct: usize,
    /// Instances that failed outright rather than answering wrong.
    pub failed: usize,
    /// Secondary metrics, e.g. `char_overlap_f1` for extraction cells.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl CellResult {
    pub fn from_counts(
        correct: usize,
        failed: usize,
        total: usize,
        diagnostics: BTreeMap<String, f64>,
    ) -> CellResult {
        assert!(correct + failed <= total, "correct + failed must not exceed total");
        CellResult { micro_f1: micro_f1(correct, total), total, correct, failed, diagnostics }
    }

    /// Wrong but well-formed answers: `correct + incorrect + failed = total`.
    pub fn incorrect(&self) -> usize {
        self.total - self.correct - self.failed
    }
}

/// One (language, method, model) cell of the evaluation grid. `method` is a
/// strategy name, an extraction approach, or `intent_fewshot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub language: Language,
    pub method: String,
    pub model: String,
    pub result: CellResult,
}

/// A named prompt template and the fingerprint of its exact bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateVersion {
    pub name: String,
    pub sha: String,
}

impl TemplateVersion {
    pub fn from_pairs(pairs: Vec<(&'static str, String)>) -> Vec<TemplateVersion> {
        pairs
            .into_iter()
            .map(|(name, sha)| TemplateVersion { name: name.to_string(), sha })
            .collect()
    }
}

/// Everything needed to audit or reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Exact configuration the run executed with.
    pub config: RunConfig,
    pub started_at: String,
    pub finished_at: String,
    /// Backend's self-reported identifier.
    pub backend_id: String,
    /// Embedding provider's self-reported identifier.
    pub embed_id: String,
    pub seed: u64,
    pub prompt_templates: Vec<TemplateVersion>,
    /// Identifier of the seeded sampling procedure used anywhere randomness
    /// enters (dataset mixes).
    pub mix_algorithm: String,
}

/// The result of one evaluation run: a grid of cells plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub grid: Vec<GridCell>,
    pub metadata: RunMetadata,
}

impl EvalReport {
    /// Looks up one cell's result.
    pub fn cell(&self, language: Language, method: &str) -> Option<&CellResult> {
        self.grid
            .iter()
            .find(|c| c.language == language && c.method == method)
            .map(|c| &c.result)
    }

    /// Pretty JSON, the machine-readable source of truth.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat cell dump: one row per grid cell, diagnostics as extra columns.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<&str> = Vec::new();
        for cell in &self.grid {
            for key in cell.result.diagnostics.keys() {
                if !keys.contains(&key.as_str()) {
                    keys.push(key);
                }
            }
        }
        keys.sort_unstable();
        let mut out = String::from("task,model,language,method,micro_f1,total,correct,incorrect,failed");
        for key in &keys {
            out.push(',');
            out.push_str(key);
        }
        out.push('\n');
        for cell in &self.grid {
            let r = &cell.result;
            let _ = write!(
                out,
                "{},{},{},{},{:.2},{},{},{},{}",
                self.task,
                cell.model,
                cell.language,
                cell.method,
                r.micro_f1,
                r.total,
                r.correct,
                r.incorrect(),
                r.failed
            );
            for key in &keys {
                out.push(',');
                if let Some(value) = r.diagnostics.get(*key) {
                    let _ = write!(out, "{value:.2}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Languages in first-appearance order — the column order of the grid.
    fn languages(&self) -> Vec<Language> {
        let mut out = Vec::new();
        for cell in &self.grid {
            if !out.contains(&cell.language) {
                out.push(cell.language);
            }
        }
        out
    }

    /// Methods in first-appearance order — the row order of the grid.
    fn methods(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for cell in &self.grid {
            if !out.contains(&cell.method.as_str()) {
                out.push(&cell.method);
            }
        }
        out
    }

    fn markdown_grid(
        &self,
        out: &mut String,
        languages: &[Language],
        value: impl Fn(&CellResult) -> Option<f64>,
    ) {
        out.push_str("| method |");
        for language in languages {
            let _ = write!(out, " {language} |");
        }
        out.push_str("\n|---|");
        for _ in languages {
            out.push_str("---:|");
        }
        out.push('\n');
        for method in self.methods() {
            let _ = write!(out, "| {method} |");
            for &language in languages {
                match self.cell(language, method).and_then(&value) {
                    Some(v) => {
                        let _ = write!(out, " {v:.2} |");
                    }
                    None => out.push_str(" — |"),
                }
            }
            out.push('\n');
        }
    }

    /// Micro-F1 grid with languages as columns and methods as rows, plus a
    /// second table per diagnostic metric when cells carry any.
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "## {} — {} (backend {})\n\nMicro-F1 (%), {} instances per cell where stated.\n\n",
            self.task,
            self.metadata.config.dataset,
            self.metadata.backend_id,
            self.grid.first().map(|c| c.result.total.to_string()).unwrap_or_else(|| "0".into()),
        );
        if self.grid.is_empty() {
            out.push_str("(empty grid)\n");
            return out;
        }
        let languages = self.languages();
        self.markdown_grid(&mut out, &languages, |r| Some(r.micro_f1));
        let mut diagnostic_keys: Vec<String> = Vec::new();
        for cell in &self.grid {
            for key in cell.result.diagnostics.keys() {
                if !diagnostic_keys.contains(key) {
                    diagnostic_keys.push(key.clone());
                }
            }
        }
        diagnostic_keys.sort_unstable();
        for key in diagnostic_keys {
            let _ = write!(out, "\n{key} (diagnostic):\n\n");
            self.markdown_grid(&mut out, &languages, |r| r.diagnostics.get(&key).copied());
        }
        out
    }

    /// Copy with the wall-clock fields blanked, for byte-level
    /// reproducibility comparisons.
    pub fn without_timestamps(&self) -> EvalReport {
        let mut copy = self.clone();
        copy.metadata.started_at = String::new();
        copy.metadata.finished_at = String::new();
        copy
    }
}

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// Renders a report in the requested format.
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Markdown => report.to_markdown(),
    }
}
