//! Rendered prompts and tags compared byte-for-byte with checked-in files.

use std::path::PathBuf;

use qttrag::generate::build_generation_prompt;
use qttrag::quality::{attach_tag, build_assessment_prompt, parse_tag, render_tag};
use qttrag::{ContextPassage, LanguageCode, Passage, PipelineMode, PromptSet, QualityScores, Query};

const ORIGINAL: &str = "John Tyler was the tenth president of the United States.";

struct Case {
    lang: LanguageCode,
    translated: &'static str,
    native: &'static str,
    question: &'static str,
    scores: (f64, f64, f64),
}

fn cases() -> [Case; 3] {
    [
        Case {
            lang: LanguageCode::KO,
            translated: "존 타일러는 미국의 제10대 대통령이다.",
            native: "존 타일러는 1841년에 대통령직에 올랐다.",
            question: "존 타일러는 몇 번째 대통령인가?",
            scores: (4.5, 4.8, 4.5),
        },
        Case {
            lang: LanguageCode::FI,
            translated: "John Tyler oli Yhdysvaltain kymmenes presidentti.",
            native: "John Tyler nousi presidentiksi vuonna 1841.",
            question: "Monesko presidentti John Tyler oli?",
            scores: (4.5, 4.5, 4.5),
        },
        Case {
            lang: LanguageCode::ZH,
            translated: "约翰·泰勒是美国第十任总统。",
            native: "约翰·泰勒于1841年就任总统。",
            question: "约翰·泰勒是第几任总统？",
            scores: (4.8, 4.5, 4.2),
        },
    ]
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn assessment_prompts_match_golden() {
    let prompts = PromptSet::builtin();
    for case in cases() {
        let rendered = build_assessment_prompt(ORIGINAL, case.translated, case.lang, &prompts).unwrap();
        assert_eq!(
            rendered + "\n",
            golden(&format!("assessment_{}.txt", case.lang)),
            "assessment prompt for {}",
            case.lang
        );
    }
}

#[test]
fn generation_prompts_match_golden() {
    let prompts = PromptSet::builtin();
    for case in cases() {
        let (s, g, n) = case.scores;
        let translated = ContextPassage::translated(
            Passage::new("en-tyler", ORIGINAL, Some(LanguageCode::EN)).unwrap(),
            case.translated.to_string(),
        );
        let context = vec![
            ContextPassage::original(Passage::new("native", case.native, Some(case.lang)).unwrap()),
            attach_tag(translated, QualityScores::new(s, g, n).unwrap(), case.lang, &prompts).unwrap(),
        ];
        let query = Query::new("q", case.question, case.lang).unwrap();
        let request = build_generation_prompt(&query, &context, PipelineMode::Qtt, &prompts).unwrap();
        let rendered = format!("[system]\n{}\n[user]\n{}\n", request.system, request.user);
        assert_eq!(
            rendered,
            golden(&format!("generation_{}.txt", case.lang)),
            "generation prompt for {}",
            case.lang
        );
    }
}

#[test]
fn appendix_tags_render_exactly() {
    let prompts = PromptSet::builtin();
    let expected = [
        (
            LanguageCode::KO,
            (2.5, 2.0, 2.3),
            " [점수] 의미론적 일치성: 2.5, 문법적 정확성: 2.0, 자연스러움과 유창성: 2.3",
        ),
        (
            LanguageCode::FI,
            (4.5, 4.5, 4.5),
            " [pisteet] Semanttinen johdonmukaisuus: 4.5, Kieliopillinen tarkkuus: 4.5, Luontevuus ja sujuvuus: 4.5",
        ),
        (
            LanguageCode::ZH,
            (4.8, 4.5, 4.2),
            " [分数] 语义一致性: 4.8, 语法准确性: 4.5, 语言流畅度: 4.2",
        ),
        (
            LanguageCode::FI,
            (2.5, 2.0, 2.0),
            " [pisteet] Semanttinen johdonmukaisuus: 2.5, Kieliopillinen tarkkuus: 2.0, Luontevuus ja sujuvuus: 2.0",
        ),
        (
            LanguageCode::ZH,
            (2.5, 1.0, 1.0),
            " [分数] 语义一致性: 2.5, 语法准确性: 1.0, 语言流畅度: 1.0",
        ),
    ];
    for (lang, (s, g, n), tag) in expected {
        let scores = QualityScores::new(s, g, n).unwrap();
        assert_eq!(render_tag(&scores, lang, &prompts).unwrap(), tag);
        assert_eq!(parse_tag(tag, lang, &prompts).unwrap(), scores);
    }
}
