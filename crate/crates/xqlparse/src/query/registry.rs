//! Operation registries.
//!
//! A registry is the inventory of operations one deployed assistant exposes:
//! each operation has a category, a typed slot signature, and a flag saying
//! whether users may hand it a custom input alongside the dataset. Registries
//! are plain JSON documents so a deployment can extend the language without
//! recompiling; two registries ship with the crate (see [`Registry::coxql`]
//! and [`Registry::compass`]).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::token;

/// Functional grouping of operations, mirroring the assistant's capability menu.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    LocalPrediction,
    GlobalPrediction,
    LocalExplanation,
    Perturbation,
    Data,
    Modification,
    Meta,
    Filter,
    Logic,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::LocalPrediction => "local_prediction",
            Category::GlobalPrediction => "global_prediction",
            Category::LocalExplanation => "local_explanation",
            Category::Perturbation => "perturbation",
            Category::Data => "data",
            Category::Modification => "modification",
            Category::Meta => "meta",
            Category::Filter => "filter",
            Category::Logic => "logic",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a slot is rendered in the label string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    /// Rendered as `<slot-name> <value>` where the value is a decimal integer,
    /// e.g. `topk 10`.
    Integer,
    /// Rendered as the bare value, drawn from a closed vocabulary,
    /// e.g. `lime`.
    EnumToken,
    /// Rendered as the bare value, any identifier except the reserved
    /// connectors, e.g. a label name passed to a filter.
    FreeToken,
    /// Signature documentation only (e.g. an implicit instance argument);
    /// contributes nothing to the rendered label and is never bound.
    None,
}

/// One argument of an operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    /// Closed vocabulary for [`SlotKind::EnumToken`] slots; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub allowed_values: Vec<String>,
    pub required: bool,
    /// Value assumed when an optional slot is omitted. Every optional slot
    /// that is rendered must carry one, so canonicalisation is total.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
}

impl SlotSpec {
    /// Whether the slot appears in the rendered label at all.
    pub fn is_rendered(&self) -> bool {
        self.kind != SlotKind::None
    }
}

/// One operation of the query language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationSpec {
    pub name: String,
    pub category: Category,
    #[serde(default)]
    pub slots: Vec<SlotSpec>,
    pub accepts_custom_input: bool,
    #[serde(default)]
    pub description: String,
}

impl OperationSpec {
    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Slots that appear in the rendered label, in declaration order.
    pub fn rendered_slots(&self) -> impl Iterator<Item = &SlotSpec> {
        self.slots.iter().filter(|s| s.is_rendered())
    }
}

/// What went wrong while loading or validating a registry document.
#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("failed to read registry file: {0}")]
    Io(#[from] std::io::Error),
    #[error("registry is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("registry declares no operations")]
    Empty,
    #[error("duplicate operation `{0}`")]
    DuplicateOperation(String),
    #[error("operation name `{0}` is not a valid keyword token")]
    BadOperationName(String),
    #[error("logic operation `{0}` is not a supported connector (only `and` / `or` are)")]
    UnsupportedConnector(String),
    #[error("operation `{op}` declares duplicate slot `{slot}`")]
    DuplicateSlot { op: String, slot: String },
    #[error("operation `{op}`: slot name `{slot}` is not a valid keyword token")]
    BadSlotName { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: enum_token slots need a non-empty allowed_values list")]
    EmptyEnum { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: allowed_values is only meaningful on enum_token slots")]
    UnexpectedAllowedValues { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: `{value}` is not a valid value for this slot")]
    BadAllowedValue { op: String, slot: String, value: String },
    #[error("operation `{op}` slot `{slot}`: default `{value}` is not a valid value for this slot")]
    BadDefault { op: String, slot: String, value: String },
    #[error("operation `{op}` slot `{slot}`: optional rendered slots must carry a default")]
    OptionalWithoutDefault { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: required slots cannot carry a default")]
    DefaultOnRequired { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: kind `none` slots take no values, defaults, or required flag")]
    NoneSlotWithPayload { op: String, slot: String },
}

/// A validated set of operations, with by-name lookup.
#[derive(Debug, Clone)]
pub struct Registry {
    ops: Vec<OperationSpec>,
    by_name: HashMap<String, usize>,
}

impl Registry {
    /// Parse and validate a registry from its JSON text.
    pub fn from_json(json: &str) -> Result<Registry, RegistryError> {
        #[derive(Deserialize)]
        struct Document {
            operations: Vec<OperationSpec>,
        }
        let doc: Document = serde_json::from_str(json)?;
        Registry::from_operations(doc.operations)
    }

    /// Load a registry document from disk.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
        Registry::from_json(&fs::read_to_string(path)?)
    }

    /// Build a registry from already-deserialised operations, validating them.
    pub fn from_operations(ops: Vec<OperationSpec>) -> Result<Registry, RegistryError> {
        if ops.is_empty() {
            return Err(RegistryError::Empty);
        }
        let mut by_name = HashMap::new();
        for (idx, op) in ops.iter().enumerate() {
            if !token::is_free_token(&op.name) && !token::RESERVED.contains(&op.name.as_str()) {
                return Err(RegistryError::BadOperationName(op.name.clone()));
            }
            if op.category == Category::Logic && !token::RESERVED.contains(&op.name.as_str()) {
                return Err(RegistryError::UnsupportedConnector(op.name.clone()));
            }
            if by_name.insert(op.name.clone(), idx).is_some() {
                return Err(RegistryError::DuplicateOperation(op.name.clone()));
            }
            validate_slots(op)?;
        }
        Ok(Registry { ops, by_name })
    }

    /// The fine-grained registry bundled with the crate: 31 operations over
    /// nine categories, including filters and connectors.
    pub fn coxql() -> Registry {
        Registry::from_json(include_str!("../../assets/registries/coxql.json"))
            .expect("bundled registry is valid")
    }

    /// The coarse intent registry bundled with the crate: 11 slot-free
    /// operations that all accept a custom input.
    pub fn compass() -> Registry {
        Registry::from_json(include_str!("../../assets/registries/compass.json"))
            .expect("bundled registry is valid")
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Operations in declaration order.
    pub fn operations(&self) -> &[OperationSpec] {
        &self.ops
    }

    pub fn get(&self, name: &str) -> Option<&OperationSpec> {
        self.by_name.get(name).map(|&idx| &self.ops[idx])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Names of the logic operations, i.e. the clause connectors this
    /// registry admits. Empty for single-clause languages.
    pub fn connector_names(&self) -> Vec<&str> {
        self.ops
            .iter()
            .filter(|op| op.category == Category::Logic)
            .map(|op| op.name.as_str())
            .collect()
    }

    /// Operations that may serve as a clause, i.e. everything except the
    /// connectors.
    pub fn clause_operations(&self) -> impl Iterator<Item = &OperationSpec> {
        self.ops.iter().filter(|op| op.category != Category::Logic)
    }
}

fn validate_slots(op: &OperationSpec) -> Result<(), RegistryError> {
    let mut seen = HashSet::new();
    for slot in &op.slots {
        let err_ids = || (op.name.clone(), slot.name.clone());
        if !seen.insert(slot.name.as_str()) {
            let (op, slot) = err_ids();
            return Err(RegistryError::DuplicateSlot { op, slot });
        }
        if !token::is_free_token(&slot.name) {
            let (op, slot) = err_ids();
            return Err(RegistryError::BadSlotName { op, slot });
        }
        if slot.kind != SlotKind::EnumToken && !slot.allowed_values.is_empty() {
            let (op, slot) = err_ids();
            return Err(RegistryError::UnexpectedAllowedValues { op, slot });
        }
        match slot.kind {
            SlotKind::None => {
                if slot.required || slot.default.is_some() {
                    let (op, slot) = err_ids();
                    return Err(RegistryError::NoneSlotWithPayload { op, slot });
                }
                continue;
            }
            SlotKind::EnumToken => {
                if slot.allowed_values.is_empty() {
                    let (op, slot) = err_ids();
                    return Err(RegistryError::EmptyEnum { op, slot });
                }
                let mut values = HashSet::new();
                for value in &slot.allowed_values {
                    if !token::is_free_token(value) || !values.insert(value.as_str()) {
                        let (op, slot) = err_ids();
                        return Err(RegistryError::BadAllowedValue {
                            op,
                            slot,
                            value: value.clone(),
                        });
                    }
                }
            }
            SlotKind::Integer | SlotKind::FreeToken => {}
        }
        let value_ok = |v: &str| match slot.kind {
            SlotKind::Integer => token::is_int_token(v),
            SlotKind::EnumToken => slot.allowed_values.iter().any(|a| a == v),
            SlotKind::FreeToken => token::is_free_token(v),
            SlotKind::None => false,
        };
        match (&slot.default, slot.required) {
            (Some(_), true) => {
                let (op, slot) = err_ids();
                return Err(RegistryError::DefaultOnRequired { op, slot });
            }
            (Some(value), false) if !value_ok(value) => {
                let (op, slot) = err_ids();
                return Err(RegistryError::BadDefault {
                    op,
                    slot,
                    value: value.clone(),
                });
            }
            (None, false) => {
                let (op, slot) = err_ids();
                return Err(RegistryError::OptionalWithoutDefault { op, slot });
            }
            _ => {}
        }
    }
    Ok(())
}
