use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const MAX_ANSWER_CHARS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    TwoFields,
    EnglishOnly,
    SingleQuestion,
    NoLocationReference,
    ShortAnswer,
    /// Left to the synthesizer's own second pass.
    Answerability,
    /// Left to the synthesizer's own second pass.
    MultiHop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    ExtraFields,
    MissingField,
    NonLatinScript,
    MultipleQuestions,
    LocationReference,
    LongAnswer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Delegated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    fn pass(check: Check) -> Self {
        CheckResult {
            check,
            status: CheckStatus::Pass,
            violation: None,
            detail: String::new(),
        }
    }

    fn fail(check: Check, violation: Violation, detail: impl Into<String>) -> Self {
        CheckResult {
            check,
            status: CheckStatus::Fail,
            violation: Some(violation),
            detail: detail.into(),
        }
    }

    fn delegated(check: Check) -> Self {
        CheckResult {
            check,
            status: CheckStatus::Delegated,
            violation: None,
            detail: "checked by the synthesizer's second pass, not mechanically".into(),
        }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

static LOCATION: LazyLock<Vec<(Regex, &'static str)>> = LazyLock::new(|| {
    [
        (r"(?i)\b(?:figure|fig\.?|table|chart|exhibit|appendix|item)\s*#?\s*\d+[a-z]?\b", "figure/table number"),
        (r"(?i)\bp{1,2}\.\s*\d+", "page abbreviation"),
        (r"(?i)\bpages?\b", "page reference"),
        (r"(?i)\bsection[\s_-]*ids?\b", "section id"),
        (r"(?i)\bsection\s+\d+(?:\.\d+)*\b", "section number"),
    ]
    .into_iter()
    .map(|(p, label)| (Regex::new(p).unwrap(), label))
    .collect()
});

/// Latin script plus the punctuation, currency and math symbols that
/// English text commonly carries.
fn is_latin(c: char) -> bool {
    matches!(c as u32,
        0x0000..=0x024F
        | 0x1E00..=0x1EFF
        | 0x2000..=0x206F
        | 0x20A0..=0x20CF
        | 0x2100..=0x218F
        | 0x2190..=0x22FF)
}

const ABBREVIATIONS: [&str; 14] = [
    "inc", "corp", "co", "ltd", "mr", "mrs", "ms", "dr", "no", "vs", "st", "e.g", "i.e", "u.s",
];

/// Counts sentences: a boundary is `.`, `!` or `?` followed by whitespace
/// and then an uppercase letter or digit, unless the word before is an
/// abbreviation or a single letter.
pub fn sentence_count(text: &str) -> usize {
    let chars: Vec<char> = text.trim().chars().collect();
    if chars.is_empty() {
        return 0;
    }
    let mut count = 1;
    for i in 0..chars.len() {
        if !matches!(chars[i], '.' | '!' | '?') || !chars.get(i + 1).is_some_and(|c| c.is_whitespace()) {
            continue;
        }
        let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
        if !next.is_some_and(|c| c.is_uppercase() || c.is_ascii_digit()) {
            continue;
        }
        let word: String = chars[..i]
            .iter()
            .rev()
            .take_while(|c| !c.is_whitespace())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect::<String>()
            .to_lowercase();
        let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
        if chars[i] == '.' && (word.chars().count() == 1 || ABBREVIATIONS.contains(&word)) {
            continue;
        }
        count += 1;
    }
    count
}

/// Mechanical checks on a synthesizer's raw output object. Semantic checks
/// are reported as delegated.
pub fn validate_qa(fields: &Map<String, Value>) -> Vec<CheckResult> {
    let text = |key: &str| fields.get(key).and_then(Value::as_str).map(str::trim).unwrap_or("");
    let question = text("question");
    let answer = text("answer");
    let mut results = Vec::with_capacity(7);

    let extra: Vec<&str> = fields
        .keys()
        .map(String::as_str)
        .filter(|k| *k != "question" && *k != "answer")
        .collect();
    let missing: Vec<&str> = ["question", "answer"]
        .into_iter()
        .filter(|k| fields.get(*k).and_then(Value::as_str).is_none_or(|v| v.trim().is_empty()))
        .collect();
    results.push(if !extra.is_empty() {
        CheckResult::fail(Check::TwoFields, Violation::ExtraFields, format!("unexpected fields: {}", extra.join(", ")))
    } else if !missing.is_empty() {
        CheckResult::fail(
            Check::TwoFields,
            Violation::MissingField,
            format!("missing or empty string fields: {}", missing.join(", ")),
        )
    } else {
        CheckResult::pass(Check::TwoFields)
    });

    let foreign: String = format!("{question}{answer}").chars().filter(|c| !is_latin(*c)).take(8).collect();
    results.push(if foreign.is_empty() {
        CheckResult::pass(Check::EnglishOnly)
    } else {
        CheckResult::fail(Check::EnglishOnly, Violation::NonLatinScript, format!("non-Latin characters: {foreign}"))
    });

    let marks = question.chars().filter(|c| matches!(c, '?' | '？')).count();
    results.push(if marks <= 1 {
        CheckResult::pass(Check::SingleQuestion)
    } else {
        CheckResult::fail(Check::SingleQuestion, Violation::MultipleQuestions, format!("{marks} question marks"))
    });

    let hit = LOCATION.iter().find_map(|(re, label)| re.find(question).map(|m| (m.as_str(), *label)));
    results.push(match hit {
        None => CheckResult::pass(Check::NoLocationReference),
        Some((found, label)) => CheckResult::fail(
            Check::NoLocationReference,
            Violation::LocationReference,
            format!("{label}: `{found}`"),
        ),
    });

    let length = answer.chars().count();
    let sentences = sentence_count(answer);
    results.push(if length > MAX_ANSWER_CHARS {
        CheckResult::fail(Check::ShortAnswer, Violation::LongAnswer, format!("{length} characters"))
    } else if answer.contains("\n\n") {
        CheckResult::fail(Check::ShortAnswer, Violation::LongAnswer, "answer spans several paragraphs")
    } else if sentences > 1 {
        CheckResult::fail(Check::ShortAnswer, Violation::LongAnswer, format!("{sentences} sentences"))
    } else {
        CheckResult::pass(Check::ShortAnswer)
    });

    results.push(CheckResult::delegated(Check::Answerability));
    results.push(CheckResult::delegated(Check::MultiHop));
    results
}

pub fn violations(results: &[CheckResult]) -> Vec<Violation> {
    results.iter().filter_map(|r| r.violation).collect()
}
