//! Generation prompt assembly and answer retrieval.

use crate::backends::{BackendError, ChatBackend, ChatRequest};
use crate::prompts::{fill, PromptError, PromptSet};
use crate::types::{ContextPassage, PipelineMode, Query};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerationError {
    #[error("no context passages to generate from; use the no-context prompt instead")]
    EmptyContext,
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Separator between passages inside the background block.
pub const DOCUMENT_SEPARATOR: &str = "\n\n";

fn system_for(
    query: &Query,
    mode: PipelineMode,
    prompts: &PromptSet,
) -> Result<String, GenerationError> {
    let r = prompts.get(query.lang)?;
    Ok(if mode.scores_translations() {
        r.qtt_system.clone()
    } else {
        r.plain_system.clone()
    })
}

/// Builds the chat request for the generator.
///
/// Visible passages are joined in the given (rerank) order, separated by a
/// blank line. Filtered-out entries are skipped. QTT and hard modes use the
/// quality-aware system message; the other modes use the plain one.
pub fn build_generation_prompt(
    query: &Query,
    context: &[ContextPassage],
    mode: PipelineMode,
    prompts: &PromptSet,
) -> Result<ChatRequest, GenerationError> {
    let documents: Vec<&str> = context
        .iter()
        .filter(|p| p.is_visible())
        .map(ContextPassage::display_text)
        .collect();
    if documents.is_empty() {
        return Err(GenerationError::EmptyContext);
    }
    let joined = documents.join(DOCUMENT_SEPARATOR);
    let user = fill(
        prompts.user_template(),
        &[("documents", &joined), ("question", &query.text)],
    );
    Ok(ChatRequest::new(system_for(query, mode, prompts)?, user))
}

/// Prompt without a background block, for queries whose context ended up
/// empty.
pub fn build_no_context_prompt(
    query: &Query,
    mode: PipelineMode,
    prompts: &PromptSet,
) -> Result<ChatRequest, GenerationError> {
    let user = fill(prompts.user_no_context_template(), &[("question", &query.text)]);
    Ok(ChatRequest::new(system_for(query, mode, prompts)?, user))
}

/// The raw completion. Callers trim it before scoring.
pub fn generate_answer(
    request: &ChatRequest,
    generator: &dyn ChatBackend,
) -> Result<String, BackendError> {
    request.validate()?;
    generator.chat_complete(request)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::{EchoChat, ScriptedChat};
    use crate::metrics::char_trigram_recall;
    use crate::types::{LanguageCode, Passage};

    fn ko_query() -> Query {
        Query::new("q1", "대한민국의 수도는 어디인가?", LanguageCode::KO).unwrap()
    }

    fn docs() -> Vec<ContextPassage> {
        vec![
            ContextPassage::original(
                Passage::new("a", "서울은 대한민국의 수도이다.", Some(LanguageCode::KO)).unwrap(),
            ),
            ContextPassage::translated(
                Passage::new("b", "Seoul is large.", Some(LanguageCode::EN)).unwrap(),
                "⟦ko⟧Seoul is large.".into(),
            ),
        ]
    }

    #[test]
    fn user_message_layout() {
        let req =
            build_generation_prompt(&ko_query(), &docs(), PipelineMode::Qtt, &PromptSet::builtin())
                .unwrap();
        assert_eq!(
            req.user,
            "Background: 서울은 대한민국의 수도이다.\n\n⟦ko⟧Seoul is large.\n\nQuestion: 대한민국의 수도는 어디인가?"
        );
        assert!(req.system.starts_with("이제부터 너는 내 유능한 비서야."));
        assert!(req.system.contains("점수"));
    }

    #[test]
    fn baseline_system_has_no_score_vocabulary() {
        let prompts = PromptSet::builtin();
        for mode in [PipelineMode::Base, PipelineMode::Cross, PipelineMode::Dkm] {
            let req = build_generation_prompt(&ko_query(), &docs(), mode, &prompts).unwrap();
            assert!(!req.system.contains("점수"), "{mode}: {}", req.system);
            assert!(req.system.ends_with("반드시 한국어로 대답해 줘."));
        }
    }

    #[test]
    fn filtered_entries_are_skipped_and_empty_is_an_error() {
        let prompts = PromptSet::builtin();
        let dropped = ContextPassage::dropped(
            Passage::new("x", "text", Some(LanguageCode::EN)).unwrap(),
            "mt down",
        );
        let req = build_generation_prompt(
            &ko_query(),
            &[dropped.clone(), docs()[0].clone()],
            PipelineMode::Cross,
            &prompts,
        )
        .unwrap();
        assert!(!req.user.contains("text\n"));
        assert_eq!(
            build_generation_prompt(&ko_query(), &[dropped], PipelineMode::Cross, &prompts),
            Err(GenerationError::EmptyContext)
        );
        let fallback = build_no_context_prompt(&ko_query(), PipelineMode::Hard, &prompts).unwrap();
        assert_eq!(fallback.user, "Question: 대한민국의 수도는 어디인가?");
    }

    #[test]
    fn echo_answers_with_first_context_line() {
        let prompts = PromptSet::builtin();
        let req = build_generation_prompt(&ko_query(), &docs(), PipelineMode::Base, &prompts).unwrap();
        let answer = generate_answer(&req, &EchoChat).unwrap();
        assert_eq!(answer, "Background: 서울은 대한민국의 수도이다.");
    }

    #[test]
    fn scripted_gold_answer_scores_full_recall() {
        let prompts = PromptSet::builtin();
        let req = build_generation_prompt(&ko_query(), &docs(), PipelineMode::Qtt, &prompts).unwrap();
        let chat = ScriptedChat::new().with_response(req.system.clone(), req.user.clone(), " 서울 ");
        let answer = generate_answer(&req, &chat).unwrap();
        assert_eq!(answer, " 서울 ");
        assert_eq!(char_trigram_recall("서울", answer.trim()).unwrap(), 1.0);
    }

    #[test]
    fn unregistered_language_is_a_prompt_error() {
        let q = Query::new("q", "Who?", LanguageCode::EN).unwrap();
        assert!(matches!(
            build_generation_prompt(&q, &docs(), PipelineMode::Qtt, &PromptSet::builtin()),
            Err(GenerationError::Prompt(_))
        ));
    }
}
