//! File loaders with schema validation and a field-name remap hook.
//!
//! A dataset lives in one directory as a family of JSON files named
//! `{dataset}.{split}.{lang}.json`, each holding a flat array of records.
//! Loading validates every record — gold labels must parse, custom inputs
//! must stay contained in their questions — and collects all violations with
//! file names and record indices rather than stopping at the first.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::extract::{validate_containment, CompassRecord};
use crate::lang::Language;
use crate::query::{parse_label, Registry};

use super::{CorpusError, CoxqlRecord, Dataset, DatasetBundle, DatasetKind};

/// Dataset portion: training pool or held-out test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Train, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}, expected train or test")),
        }
    }
}

/// Renames foreign JSON keys to the canonical ones before deserialization,
/// so files that call the question `utterance` or the label `gold_label`
/// load without rewriting them. Maps source key → canonical key.
pub type FieldRemap = BTreeMap<String, String>;

/// One schema or content problem found while loading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// File the record came from.
    pub file: String,
    /// Zero-based index of the record inside the file's array.
    pub index: usize,
    pub message: String,
}

/// Every violation found across a load, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, file: &str, index: usize, message: String) {
        self.violations.push(Violation { file: file.to_string(), index, message });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "\n  {}[{}]: {}", v.file, v.index, v.message)?;
        }
        if self.violations.len() > 8 {
            write!(f, "\n  … and {} more", self.violations.len() - 8)?;
        }
        Ok(())
    }
}

/// Canonical file name for one split of one language:
/// `{dataset}.{split}.{lang}.json`.
pub fn split_file_name(dataset: &str, split: Split, language: Language) -> String {
    format!("{dataset}.{split}.{language}.json")
}

/// Reads a file into a vector of JSON objects with remapped keys applied.
fn read_objects(
    path: &Path,
    remap: Option<&FieldRemap>,
) -> Result<Vec<serde_json::Map<String, Value>>, CorpusError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: display.clone(), source })?;
    let values: Vec<Value> = serde_json::from_str(&text)
        .map_err(|source| CorpusError::Json { path: display.clone(), source })?;
    let mut objects = Vec::with_capacity(values.len());
    for value in values {
        let mut object = match value {
            Value::Object(map) => map,
            other => {
                return Err(CorpusError::Json {
                    path: display,
                    source: serde::de::Error::custom(format!(
                        "expected an array of objects, found {other}"
                    )),
                })
            }
        };
        if let Some(remap) = remap {
            for (from, to) in remap {
                if object.contains_key(from) && !object.contains_key(to) {
                    let value = object.remove(from).expect("key checked above");
                    object.insert(to.clone(), value);
                }
            }
        }
        objects.push(object);
    }
    Ok(objects)
}

/// Pulls a required string field out of an object, reporting a violation on
/// absence or wrong type.
fn take_string(
    object: &serde_json::Map<String, Value>,
    key: &str,
    file: &str,
    index: usize,
    report: &mut ValidationReport,
) -> Option<String> {
    match object.get(key) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            report.push(file, index, format!("field {key:?} must be a string, found {other}"));
            None
        }
        None => {
            report.push(file, index, format!("missing required field {key:?}"));
            None
        }
    }
}

/// Checks an optional per-record `language` field against the language the
/// file name declares.
fn check_language(
    object: &serde_json::Map<String, Value>,
    file_language: Language,
    file: &str,
    index: usize,
    report: &mut ValidationReport,
) {
    if let Some(value) = object.get("language") {
        match value.as_str().map(Language::from_str) {
            Some(Ok(lang)) if lang == file_language => {}
            Some(Ok(lang)) => report.push(
                file,
                index,
                format!("record says language {lang} but the file name says {file_language}"),
            ),
            _ => report.push(file, index, format!("invalid language field {value}")),
        }
    }
}

/// Loads and validates one parsing-dataset file. Every gold label must parse
/// under `registry`; all failures are collected into the returned report.
pub fn load_coxql_split(
    path: &Path,
    language: Language,
    registry: &Registry,
    remap: Option<&FieldRemap>,
) -> Result<Vec<CoxqlRecord>, CorpusError> {
    let file = path.display().to_string();
    let mut report = ValidationReport::default();
    let mut records = Vec::new();
    for (index, object) in read_objects(path, remap)?.into_iter().enumerate() {
        let question = take_string(&object, "question", &file, index, &mut report);
        let parse = take_string(&object, "parse", &file, index, &mut report);
        check_language(&object, language, &file, index, &mut report);
        let (Some(question), Some(parse)) = (question, parse) else { continue };
        if let Err(err) = parse_label(&parse, registry) {
            report.push(&file, index, format!("gold parse {parse:?} is invalid: {err}"));
            continue;
        }
        records.push(CoxqlRecord { question, parse, language });
    }
    if report.is_empty() {
        Ok(records)
    } else {
        Err(CorpusError::Validation(report))
    }
}

/// Loads and validates one extraction-dataset file. Operation names must be
/// in `registry` and every non-empty custom input must be a contiguous
/// substring of its question.
pub fn load_compass_split(
    path: &Path,
    language: Language,
    registry: &Registry,
    remap: Option<&FieldRemap>,
) -> Result<Vec<CompassRecord>, CorpusError> {
    let file = path.display().to_string();
    let mut report = ValidationReport::default();
    let mut records = Vec::new();
    for (index, object) in read_objects(path, remap)?.into_iter().enumerate() {
        let user_question = take_string(&object, "user_question", &file, index, &mut report);
        let operation_name = take_string(&object, "operation_name", &file, index, &mut report);
        // Absent custom_input means "none declared" and is stored as empty.
        let custom_input = match object.get("custom_input") {
            None | Some(Value::Null) => Some(String::new()),
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                report.push(
                    &file,
                    index,
                    format!("field \"custom_input\" must be a string, found {other}"),
                );
                None
            }
        };
        check_language(&object, language, &file, index, &mut report);
        let (Some(user_question), Some(operation_name), Some(custom_input)) =
            (user_question, operation_name, custom_input)
        else {
            continue;
        };
        if registry.get(&operation_name).is_none() {
            report.push(&file, index, format!("unknown operation {operation_name:?}"));
            continue;
        }
        if !custom_input.is_empty() && !validate_containment(&custom_input, &user_question) {
            report.push(
                &file,
                index,
                format!(
                    "custom_input {custom_input:?} is not a contiguous substring of \
                     user_question (containment rule)"
                ),
            );
            continue;
        }
        records.push(CompassRecord { user_question, operation_name, custom_input, language });
    }
    if report.is_empty() {
        Ok(records)
    } else {
        Err(CorpusError::Validation(report))
    }
}

/// Loads every `{name}.{split}.{lang}.json` file found under `dir` into one
/// bundle, validating as it goes. Missing split/language combinations are
/// fine; a directory with no matching files at all is an error. `registry`
/// must be the operation registry matching `kind`.
pub fn load_dataset(
    dir: &Path,
    name: &str,
    kind: DatasetKind,
    registry: &Registry,
    remap: Option<&FieldRemap>,
) -> Result<Dataset, CorpusError> {
    let mut coxql = DatasetBundle::<CoxqlRecord>::new(name);
    let mut compass = DatasetBundle::<CompassRecord>::new(name);
    let mut report = ValidationReport::default();
    let mut found = false;
    for split in Split::ALL {
        for language in Language::ALL {
            let path = dir.join(split_file_name(name, split, language));
            if !path.exists() {
                continue;
            }
            found = true;
            let outcome = match kind {
                DatasetKind::Coxql => load_coxql_split(&path, language, registry, remap)
                    .map(|records| coxql.split_mut(split).extend(records)),
                DatasetKind::Compass => load_compass_split(&path, language, registry, remap)
                    .map(|records| compass.split_mut(split).extend(records)),
            };
            match outcome {
                Ok(()) => {}
                Err(CorpusError::Validation(mut file_report)) => {
                    report.violations.append(&mut file_report.violations);
                }
                Err(other) => return Err(other),
            }
        }
    }
    if !found {
        return Err(CorpusError::NoFiles {
            dir: dir.display().to_string(),
            dataset: name.to_string(),
        });
    }
    if !report.is_empty() {
        return Err(CorpusError::Validation(report));
    }
    Ok(match kind {
        DatasetKind::Coxql => Dataset::Coxql(coxql),
        DatasetKind::Compass => Dataset::Compass(compass),
    })
}

/// Writes records as a pretty-printed JSON array, so a load–save cycle is
/// stable apart from key ordering and whitespace.
pub fn save_records<R: Serialize>(path: &Path, records: &[R]) -> Result<(), CorpusError> {
    let mut text = serde_json::to_string_pretty(records)
        .expect("records serialize to JSON");
    text.push('\n');
    fs::write(path, text)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })
}
