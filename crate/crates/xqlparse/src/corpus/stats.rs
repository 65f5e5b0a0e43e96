//! Per-split dataset statistics: operation and language distributions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::query::{parse_label, Registry};

use super::{Dataset, DatasetKind, Split};

/// Counts for one split. Both breakdowns sum to `total`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub total: usize,
    pub by_operation: BTreeMap<String, usize>,
    pub by_language: BTreeMap<String, usize>,
}

impl SplitStats {
    fn count(&mut self, operation: String, language: String) {
        self.total += 1;
        *self.by_operation.entry(operation).or_default() += 1;
        *self.by_language.entry(language).or_default() += 1;
    }
}

/// Distributions for a whole dataset, keyed by split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub dataset: String,
    pub kind: DatasetKind,
    pub splits: BTreeMap<Split, SplitStats>,
}

/// Tallies operation and language counts per split. For parsing records the
/// operation is the main clause of the gold label — the last non-filter
/// clause — resolved against `registry`; extraction records carry their
/// operation name directly.
pub fn dataset_stats(dataset: &Dataset, registry: &Registry) -> DatasetStats {
    let mut splits: BTreeMap<Split, SplitStats> = BTreeMap::new();
    for split in Split::ALL {
        let mut stats = SplitStats::default();
        match dataset {
            Dataset::Coxql(bundle) => {
                for record in bundle.split(split) {
                    let operation = parse_label(&record.parse, registry)
                        .ok()
                        .and_then(|tree| {
                            tree.main_clause(registry).map(|c| c.op.clone())
                        })
                        .unwrap_or_else(|| "(invalid)".to_string());
                    stats.count(operation, record.language.to_string());
                }
            }
            Dataset::Compass(bundle) => {
                for record in bundle.split(split) {
                    stats.count(record.operation_name.clone(), record.language.to_string());
                }
            }
        }
        if stats.total > 0 {
            splits.insert(split, stats);
        }
    }
    DatasetStats { dataset: dataset.name().to_string(), kind: dataset.kind(), splits }
}

fn render_counts(
    f: &mut fmt::Formatter<'_>,
    header: &str,
    counts: &BTreeMap<String, usize>,
) -> fmt::Result {
    writeln!(f, "| {header} | count |")?;
    writeln!(f, "|---|---:|")?;
    for (key, count) in counts {
        writeln!(f, "| {key} | {count} |")?;
    }
    Ok(())
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} ({})", self.dataset, self.kind)?;
        for (split, stats) in &self.splits {
            writeln!(f, "\n## {split} — {} records\n", stats.total)?;
            render_counts(f, "operation", &stats.by_operation)?;
            writeln!(f)?;
            render_counts(f, "language", &stats.by_language)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CoxqlRecord, DatasetBundle};
    use crate::extract::CompassRecord;
    use crate::lang::Language;

    #[test]
    fn parsing_stats_use_the_main_clause_and_sum_to_the_split_size() {
        let mut bundle = DatasetBundle::new("toy");
        bundle.train = vec![
            CoxqlRecord::new("q1", "predict", Language::En),
            CoxqlRecord::new("q2", "filter id 3 and predict", Language::En),
            CoxqlRecord::new("q3", "filter id 4 and nlpattribute topk 5", Language::De),
        ];
        let registry = Registry::coxql();
        let stats = dataset_stats(&Dataset::Coxql(bundle), &registry);
        let train = &stats.splits[&Split::Train];
        assert_eq!(train.total, 3);
        assert_eq!(train.by_operation["predict"], 2, "filtered predict still counts as predict");
        assert_eq!(train.by_operation["nlpattribute"], 1);
        assert_eq!(train.by_operation.values().sum::<usize>(), train.total);
        assert_eq!(train.by_language.values().sum::<usize>(), train.total);
        assert!(!stats.splits.contains_key(&Split::Test), "empty splits are omitted");
    }

    #[test]
    fn extraction_stats_count_operation_names_directly() {
        let mut bundle = DatasetBundle::new("spans");
        bundle.test = vec![
            CompassRecord {
                user_question: "q".into(),
                operation_name: "cfe".into(),
                custom_input: "".into(),
                language: Language::Zh,
            },
            CompassRecord {
                user_question: "r".into(),
                operation_name: "predict".into(),
                custom_input: "".into(),
                language: Language::Zh,
            },
        ];
        let registry = Registry::compass();
        let stats = dataset_stats(&Dataset::Compass(bundle), &registry);
        let test = &stats.splits[&Split::Test];
        assert_eq!(test.by_operation["cfe"], 1);
        assert_eq!(test.by_language["zh"], 2);
        let table = stats.to_string();
        assert!(table.contains("| cfe | 1 |"));
        assert!(table.contains("## test — 2 records"));
    }
}
