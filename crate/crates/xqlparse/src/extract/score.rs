//! Span scoring: strict exact match, plus a softer overlap diagnostic.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{nfc, CompassRecord, ExtractionResult};

/// Aggregate extraction quality over one (language, approach, model) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionScore {
    pub total: usize,
    pub correct: usize,
    /// `100 · correct / total` — with one prediction per instance this
    /// micro-F1 equals accuracy.
    pub micro_f1: f64,
    /// Mean character-overlap F1 (in %), which gives partial credit to
    /// truncated or over-long spans that exact match scores as 0.
    pub char_overlap_f1: f64,
}

/// Score `results[i]` against `golds[i]`. An instance is correct when the
/// extracted span equals the gold span after NFC normalization and
/// whitespace trimming; absent extractions match only an empty gold.
pub fn score_extraction(results: &[ExtractionResult], golds: &[CompassRecord]) -> ExtractionScore {
    assert_eq!(results.len(), golds.len(), "results and golds must align");
    let total = golds.len();
    let mut correct = 0;
    let mut overlap_sum = 0.0;
    for (result, gold) in results.iter().zip(golds) {
        if matches_gold(result.extracted.as_deref(), &gold.custom_input) {
            correct += 1;
        }
        let predicted = normalize(result.extracted.as_deref().unwrap_or(""));
        overlap_sum += char_overlap(&predicted, &normalize(&gold.custom_input));
    }
    ExtractionScore {
        total,
        correct,
        micro_f1: percentage(correct, total),
        char_overlap_f1: if total == 0 { 0.0 } else { 100.0 * overlap_sum / total as f64 },
    }
}

/// The per-instance correctness rule on its own: exact match after NFC
/// normalization and trimming, with an absent extraction matching only an
/// empty gold span.
pub fn matches_gold(extracted: Option<&str>, gold: &str) -> bool {
    normalize(extracted.unwrap_or("")) == normalize(gold)
}

fn normalize(text: &str) -> String {
    nfc(text.trim())
}

fn percentage(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

/// F1 over character multisets; both-empty counts as a perfect match.
fn char_overlap(predicted: &str, expected: &str) -> f64 {
    if predicted.is_empty() && expected.is_empty() {
        return 1.0;
    }
    if predicted.is_empty() || expected.is_empty() {
        return 0.0;
    }
    let p = char_counts(predicted);
    let e = char_counts(expected);
    let mut intersection = 0usize;
    for (c, &np) in &p {
        if let Some(&ne) = e.get(c) {
            intersection += np.min(ne);
        }
    }
    if intersection == 0 {
        return 0.0;
    }
    let precision = intersection as f64 / predicted.chars().count() as f64;
    let recall = intersection as f64 / expected.chars().count() as f64;
    2.0 * precision * recall / (precision + recall)
}

fn char_counts(text: &str) -> HashMap<char, usize> {
    let mut counts = HashMap::new();
    for c in text.chars() {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts
}
