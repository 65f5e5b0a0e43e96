//! The typed query language: parse labels, fill defaults, serialize back.
//!
//! Run with `cargo run --example parse_and_serialize`.

use std::collections::BTreeSet;

use xqlparse::query::{
    canonicalize, parse_label, serialize, template_check, CheckResult, Registry,
};

fn main() {
    let registry = Registry::coxql();
    let categories: BTreeSet<&str> = registry
        .operations()
        .iter()
        .map(|op| op.category.as_str())
        .collect();
    println!(
        "registry: {} operations across {} categories\n",
        registry.operations().len(),
        categories.len()
    );

    // A filtered attribution request. Parsing yields a typed tree, not text.
    let label = "filter id 68 and influence topk 10";
    let tree = parse_label(label, &registry).expect("label is well-formed");
    println!("label:  {label}");
    for clause in &tree.clauses {
        println!("  clause op={:?} bindings={:?}", clause.op, clause.bindings);
    }

    // Omitted slots pick up their registry defaults under canonicalization,
    // so two labels that differ only in elided defaults compare equal.
    let sparse = parse_label("nlpattribute", &registry).expect("parses");
    let filled = canonicalize(&sparse, &registry).expect("canonicalizes");
    println!(
        "\nsparse label:    nlpattribute\ncanonical form:  {}",
        serialize(&filled, &registry).expect("serializes")
    );

    // template_check is the gate strategies apply to model answers. It
    // distinguishes "already canonical", "salvageable by truncation and
    // default filling", and "rejected" — the difference between the plain
    // and repair-enabled template strategies.
    for candidate in [
        "score accuracy",
        "nlpattribute",
        "nlpattribute topk 5 attention trailing junk",
        "score roc_auc",
        "filter id and predict",
    ] {
        match template_check(candidate, &registry) {
            CheckResult::Valid { .. } => println!("valid     {candidate}"),
            CheckResult::Repaired { canonical, .. } => {
                println!("repaired  {candidate}  ->  {canonical}")
            }
            CheckResult::Rejected { error } => println!("rejected  {candidate}  ({error})"),
        }
    }
}
