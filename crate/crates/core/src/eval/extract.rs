use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::clients::{ChatMessage, PolicyClient, SamplingParams};
use crate::prompts::fill;

static BOLD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*\*(.+?)\*\*").unwrap());
pub(crate) static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[-+−]?\$?\d[\d,]*(?:\.\d+)?\s?%?").unwrap());
static ANSWER_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:so,?\s+|thus,?\s+|therefore,?\s+)?(?:the\s+)?(?:final\s+)?answer(?:\s+is)?\s*[:\-]?\s*").unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    Rule,
    Model,
    /// The extractor model failed and the rule was used instead.
    RuleFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub text: String,
    pub method: ExtractionMethod,
}

/// Drops a leading reasoning block, if any.
pub(crate) fn strip_think(text: &str) -> &str {
    match text.find("</think>") {
        Some(i) => &text[i + "</think>".len()..],
        None => text,
    }
}

/// Sentences split at `.`, `!` or `?` followed by whitespace or the end, so
/// decimals stay intact.
pub(crate) fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (n, &(i, c)) in chars.iter().enumerate() {
        if matches!(c, '.' | '!' | '?' | '\n') {
            let at_end = n + 1 == chars.len();
            let next_space = chars.get(n + 1).is_some_and(|(_, d)| d.is_whitespace());
            if c == '\n' || at_end || next_space {
                let end = i + c.len_utf8();
                let piece = text[start..end].trim();
                if !piece.is_empty() && piece.chars().any(char::is_alphanumeric) {
                    out.push(piece);
                }
                start = end;
            }
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() && tail.chars().any(char::is_alphanumeric) {
        out.push(tail);
    }
    out
}

/// Rule-based extraction: the last bold span, else the first number in the
/// last sentence, else the last sentence itself.
pub fn extract_answer_rule(response: &str) -> String {
    let text = strip_think(response).trim();
    if let Some(m) = BOLD.captures_iter(text).last() {
        return m[1].trim().to_string();
    }
    let Some(last) = sentences(text).last().copied() else {
        return text.to_string();
    };
    if let Some(m) = NUMBER.find(last) {
        return m.as_str().trim().to_string();
    }
    let phrase = ANSWER_PREFIX.replace(last, "");
    let phrase = phrase.trim().trim_end_matches(['.', '!', '?']).trim();
    if phrase.is_empty() {
        last.to_string()
    } else {
        phrase.to_string()
    }
}

/// Extraction through a model with the extraction prompt, falling back to
/// the rule when the model is unavailable or returns nothing.
pub fn extract_answer(
    question: &str,
    response: &str,
    extractor: Option<&dyn PolicyClient>,
    template: &str,
) -> Extraction {
    let Some(client) = extractor else {
        return Extraction {
            text: extract_answer_rule(response),
            method: ExtractionMethod::Rule,
        };
    };
    let prompt = fill(template, &[("question", question), ("response", response)]);
    match client.complete(&[ChatMessage::user(prompt)], &[], &SamplingParams::default()) {
        Ok(text) if !strip_think(&text).trim().is_empty() => Extraction {
            text: strip_think(&text).trim().to_string(),
            method: ExtractionMethod::Model,
        },
        _ => Extraction {
            text: extract_answer_rule(response),
            method: ExtractionMethod::RuleFallback,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::{ScriptedClient, ScriptedResponse, ScriptedScenario};

    #[test]
    fn appendix_final_sentence() {
        assert_eq!(
            extract_answer_rule("Rounded to three decimal places, the ratio is 0.105 (or 10.5%)."),
            "0.105"
        );
        assert_eq!(
            extract_answer_rule("<think>\nx\n</think>\nThe revenue was **$6,779,511 thousand**.\nRounded, the ratio is **0.105** (or 10.5%)."),
            "0.105"
        );
    }

    #[test]
    fn phrases() {
        assert_eq!(extract_answer_rule("Unanswerable"), "Unanswerable");
        assert_eq!(
            extract_answer_rule("The filing lists two offices. The answer is Los Gatos, California."),
            "Los Gatos, California"
        );
        assert_eq!(extract_answer_rule("   "), "");
    }

    #[test]
    fn sentence_split_keeps_decimals() {
        assert_eq!(sentences("It is 0.105. Next one! Done"), ["It is 0.105.", "Next one!", "Done"]);
    }

    #[test]
    fn model_then_fallback() {
        let model = ScriptedClient::ordered("x", ["0.105"]);
        let e = extract_answer("q", "long answer 7", Some(&model), "{question} {response}");
        assert_eq!(e, Extraction { text: "0.105".into(), method: ExtractionMethod::Model });
        let down = ScriptedClient::new(
            "x",
            ScriptedScenario::from_responses(vec![ScriptedResponse::error("unavailable", "no")]),
        );
        let e = extract_answer("q", "It is 7.", Some(&down), "{question} {response}");
        assert_eq!(e, Extraction { text: "7".into(), method: ExtractionMethod::RuleFallback });
    }
}
