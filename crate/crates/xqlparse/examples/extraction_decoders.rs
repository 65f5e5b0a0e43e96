//! The four span-extraction output formats: encoders, strict decoders, and
//! the typed errors that make failures countable.
//!
//! Each approach fixes how a model must answer "which part of the question
//! is the custom input?": echo the span (naive), repeat the question with
//! the span bracketed inline (TANL), mark it with `@@`/`##` (GPT-NER), or
//! return a JSON-ish string list (GOLLIE). Encoders render what a perfect
//! model would say; decoders accept exactly that shape and reject everything
//! else with a typed error instead of a guess.
//!
//! Run with `cargo run --example extraction_decoders`.

use xqlparse::extract::{
    decode, encoded_answer, validate_containment, Approach, DecodeError,
};

fn main() {
    let question = "Flip the prediction of the service was painfully slow.";
    let span = "the service was painfully slow";

    // Containment is the data invariant every record and every translation
    // must satisfy: the span occurs verbatim inside the question (after NFC).
    assert!(validate_containment(span, question));

    println!("question: {question}\nspan:     {span}\n");
    for approach in Approach::ALL {
        let answer = encoded_answer(approach, question, span);
        let decoded = decode(approach, &answer).expect("own encoding always decodes");
        println!("{approach:8} answer:  {answer}");
        println!("{:8} decoded: {:?}", "", decoded.extracted);
        assert_eq!(decoded.extracted.as_deref(), Some(span));
    }

    // Declared absence: when there is no custom input, every approach
    // encodes an empty answer and decodes it back to "no span".
    let empty = encoded_answer(Approach::Tanl, question, "");
    println!("\nempty span under tanl encodes as {empty:?}");
    assert_eq!(decode(Approach::Tanl, &empty).expect("decodes").extracted, None);

    // Strictness: inline formats require their annotation; a bare echo of
    // the question means the model ignored the format, and that is an error
    // with a name, not a silent miss.
    println!("\n--- typed decode errors ---");
    let cases = [
        (Approach::Tanl, question),
        (Approach::GptNer, "Flip the prediction of @@the service"),
        (Approach::Gollie, "this is not a list"),
    ];
    for (approach, raw) in cases {
        let err = decode(approach, raw).expect_err("malformed output must not decode");
        println!("{approach:8} {raw:45?} -> {err}");
    }
    assert!(matches!(decode(Approach::Tanl, question), Err(DecodeError::MissingAnnotation)));
}
