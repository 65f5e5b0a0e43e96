//! Guided decoding: one generation under the full grammar.
//!
//! The prompt carries the most similar training examples as demonstrations;
//! the grammar guarantees the output is a canonical label whenever the
//! generation runs to completion, no matter how the backend misbehaves.

use crate::llm::constrained_generate;
use crate::query::{canonicalize, parse_label, serialize};

use super::{
    prompts, DemonstrationSet, ParsingTrace, StrategyContext, StrategyError, StrategyKind,
};

/// The demonstrations and prompt [`parse_gd`] will use for `question`.
pub fn gd_stage(
    ctx: &StrategyContext<'_>,
    question: &str,
) -> Result<(DemonstrationSet, String), StrategyError> {
    let qvec = ctx.embed_question(question)?;
    let demos = ctx.demonstrations(&qvec, ctx.config.gd_shots);
    let prompt = prompts::gd_prompt(question, &demos);
    Ok((demos, prompt))
}

/// Parse by constrained generation under the grammar of all canonical labels.
pub fn parse_gd(
    ctx: &StrategyContext<'_>,
    question: &str,
) -> Result<ParsingTrace, StrategyError> {
    let mut trace = ParsingTrace::new(StrategyKind::Gd);
    let (demos, prompt) = gd_stage(ctx, question)?;
    trace.stage(
        "demonstration_selection",
        None,
        None,
        format!(
            "{} shots, train indices {:?}",
            demos.entries.len(),
            demos.source_indices
        ),
    );

    let out = constrained_generate(
        ctx.backend,
        ctx.tokenizer,
        ctx.grammar(),
        &prompt,
        ctx.config.limits,
    )?;
    let mut prompts_sent = out.prompts.clone().into_iter();
    let first = prompts_sent.next().unwrap_or(prompt);
    trace.stage(
        "constrained_generation",
        Some(first),
        Some(out.text.clone()),
        format!("finish {:?}, {} steps, {} rounds", out.finish_reason, out.steps, out.repair_rounds),
    );
    trace.stages.last_mut().expect("just pushed").extra_prompts = prompts_sent.collect();

    match parse_label(&out.text, ctx.registry) {
        Ok(tree) => {
            let canonical = serialize(&canonicalize(&tree, ctx.registry)?, ctx.registry)?;
            Ok(trace.succeed(canonical))
        }
        Err(err) => Ok(trace.fail(format!(
            "generation finished {:?} with an incomplete label: {err}",
            out.finish_reason
        ))),
    }
}
