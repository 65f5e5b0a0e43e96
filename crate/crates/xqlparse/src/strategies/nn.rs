//! Nearest-neighbour parsing: retrieval only, no generation.
//!
//! The question is embedded and compared against every training question;
//! the gold parse of the single most similar one is returned verbatim. This
//! is the floor the generation-backed strategies are measured against — it
//! can only ever answer with parses that already exist in the training
//! split, but it also can never produce an ungrammatical label.

use super::{ParsingTrace, StrategyContext, StrategyError, StrategyKind};

/// Copy the gold parse of the most similar training example.
pub fn parse_nn(
    ctx: &StrategyContext<'_>,
    question: &str,
) -> Result<ParsingTrace, StrategyError> {
    let mut trace = ParsingTrace::new(StrategyKind::Nn);
    let qvec = ctx.embed_question(question)?;
    let (index, score) = ctx.nearest(&qvec);
    trace.stage(
        "nearest_neighbor",
        None,
        None,
        format!(
            "train[{index}] (cosine {score:.4}): {:?}",
            ctx.train()[index].question
        ),
    );
    Ok(trace.succeed(ctx.canonical_label(index).to_string()))
}
