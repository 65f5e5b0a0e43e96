//! Few-shot prompt assembly for the four extraction approaches.
//!
//! One compiled-in template per approach; demonstrations are rendered as
//! `[User Question]`/`[Custom Input]` pairs whose answers are written by the
//! approach's own encoder, so a model that imitates the examples produces
//! decodable output.

use sha2::{Digest, Sha256};

use super::decode::encoded_answer;
use super::{Approach, CompassRecord};

const NAIVE: &str = include_str!("../../assets/prompts/extract/naive.txt");
const TANL: &str = include_str!("../../assets/prompts/extract/tanl.txt");
const GPTNER: &str = include_str!("../../assets/prompts/extract/gptner.txt");
const GOLLIE: &str = include_str!("../../assets/prompts/extract/gollie.txt");

fn template(approach: Approach) -> &'static str {
    match approach {
        Approach::Naive => NAIVE,
        Approach::Tanl => TANL,
        Approach::GptNer => GPTNER,
        Approach::Gollie => GOLLIE,
    }
}

/// `(approach name, first 8 hex digits of the template's SHA-256)`.
pub fn extraction_versions() -> Vec<(&'static str, String)> {
    Approach::ALL
        .into_iter()
        .map(|a| {
            let digest = Sha256::digest(template(a).as_bytes());
            let fp: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
            (a.as_str(), fp)
        })
        .collect()
}

/// The full prompt for extracting from `question` under `approach`, with
/// `demos` rendered in the approach's own answer format.
pub fn build_extraction_prompt(
    approach: Approach,
    question: &str,
    demos: &[CompassRecord],
) -> String {
    let mut blocks = String::new();
    for demo in demos {
        let answer = encoded_answer(approach, &demo.user_question, &demo.custom_input);
        blocks.push_str(&format!(
            "[User Question] {}\n[Custom Input] {answer}\n\n",
            demo.user_question
        ));
    }
    let rendered = template(approach)
        .replace("{demonstrations}", &blocks)
        .replace("{question}", question);
    format!("{rendered} ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Language;

    fn demo(question: &str, span: &str) -> CompassRecord {
        CompassRecord {
            user_question: question.to_string(),
            operation_name: "predict".to_string(),
            custom_input: span.to_string(),
            language: Language::En,
        }
    }

    #[test]
    fn naive_prompt_carries_one_pair_per_demo() {
        let demos: Vec<CompassRecord> = (0..10)
            .map(|i| demo(&format!("question {i} about text {i}"), &format!("text {i}")))
            .collect();
        let prompt = build_extraction_prompt(Approach::Naive, "rate this film", &demos);
        // 10 answered pairs plus the final unanswered question
        assert_eq!(prompt.matches("[User Question]").count(), 11);
        assert_eq!(prompt.matches("[Custom Input]").count(), 11);
        assert!(prompt.ends_with("[User Question] rate this film\n[Custom Input] "));
    }

    #[test]
    fn tanl_prompt_shows_the_inline_format() {
        let prompt = build_extraction_prompt(Approach::Tanl, "q", &[]);
        assert!(prompt.contains("[ extracted_text | custom_input ]"));
    }

    #[test]
    fn tanl_demo_answers_are_annotated_questions() {
        let demos = vec![demo("please rate the book I read", "the book")];
        let prompt = build_extraction_prompt(Approach::Tanl, "q", &demos);
        assert!(prompt.contains("[Custom Input] please rate [ the book | custom_input ] I read"));
    }

    #[test]
    fn gptner_prompt_shows_the_marker_tokens() {
        let prompt = build_extraction_prompt(Approach::GptNer, "q", &[]);
        assert!(prompt.contains("special tokens @@##"));
    }

    #[test]
    fn gollie_prompt_embeds_the_schema_snippet() {
        let prompt = build_extraction_prompt(Approach::Gollie, "q", &[]);
        assert!(prompt.contains("@dataclass"));
        assert!(prompt.contains("class CustomInput(Entity):"));
        let demos = vec![demo("rate the movie", "the movie")];
        let prompt = build_extraction_prompt(Approach::Gollie, "q", &demos);
        assert!(prompt.contains("[Custom Input] [\"the movie\"]"));
    }

    #[test]
    fn versions_cover_every_approach() {
        let versions = extraction_versions();
        assert_eq!(versions.len(), 4);
        for (_, fp) in &versions {
            assert_eq!(fp.len(), 8);
        }
    }
}
