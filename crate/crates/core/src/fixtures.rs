//! Recorded reply fixtures for the three rainy scenarios, shipped with the
//! crate so the parser, grader, and mock backend work offline.

use crate::gateway::{BackendKind, Transcript, TRANSCRIPT_SCHEMA_VERSION};
use crate::prompt::PromptLibrary;
use crate::scenario::builtin_scenario;

pub const COMMON_SENSE_RAINY_ANSWER: &str =
    include_str!("../fixtures/answers/common_sense_rainy.txt");
pub const ARITHMETIC_RAINY_ANSWER: &str = include_str!("../fixtures/answers/arithmetic_rainy.txt");
pub const HYBRID_RAINY_ANSWER: &str = include_str!("../fixtures/answers/hybrid_rainy.txt");

/// The recorded reply for a built-in scenario id, if one exists.
pub fn paper_answer_for(scenario_id: &str) -> Option<&'static str> {
    match scenario_id {
        "common-sense-rainy" => Some(COMMON_SENSE_RAINY_ANSWER),
        "arithmetic-rainy" => Some(ARITHMETIC_RAINY_ANSWER),
        "hybrid-rainy" => Some(HYBRID_RAINY_ANSWER),
        _ => None,
    }
}

/// The recorded replies wrapped as sample-0 transcripts of their scenarios.
pub fn paper_transcripts() -> Vec<Transcript> {
    ["common-sense-rainy", "arithmetic-rainy", "hybrid-rainy"]
        .into_iter()
        .map(|id| {
            let scenario = builtin_scenario(id).expect("builtin scenario");
            let prompt = PromptLibrary::builtin()
                .render(&scenario)
                .expect("render builtin scenario");
            Transcript {
                schema_version: TRANSCRIPT_SCHEMA_VERSION,
                scenario_id: id.to_string(),
                sample_index: 0,
                prompt_text: prompt.text,
                response_text: paper_answer_for(id).unwrap().to_string(),
                model_name: "recorded-fixture".into(),
                created_at: "2024-01-01T00:00:00+00:00".into(),
                latency_ms: 0,
                backend: BackendKind::Replay,
                retries: 0,
                error: None,
            }
        })
        .collect()
}
