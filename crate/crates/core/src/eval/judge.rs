use serde::{Deserialize, Serialize};

use super::extract::strip_think;
use crate::clients::{ChatMessage, ClientError, PolicyClient, SamplingParams};
use crate::prompts::fill;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub correct: bool,
    /// False when the reply matched no known verdict word and was scored as
    /// incorrect.
    pub parsed: bool,
    pub raw: String,
}

/// Reads the verdict from the first word of the reply. Anything unexpected
/// counts as incorrect.
pub fn parse_verdict(reply: &str) -> (bool, bool) {
    let text = strip_think(reply);
    let word: String = text
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_uppercase();
    match word.as_str() {
        "CORRECT" | "TRUE" | "YES" => (true, true),
        "INCORRECT" | "WRONG" | "FALSE" | "NO" => (false, true),
        _ => (false, false),
    }
}

pub fn judge_score(
    question: &str,
    gold: &str,
    prediction: &str,
    judge: &dyn PolicyClient,
    template: &str,
) -> Result<JudgeVerdict, ClientError> {
    let prompt = fill(template, &[("question", question), ("gold", gold), ("prediction", prediction)]);
    let raw = judge.complete(&[ChatMessage::user(prompt)], &[], &SamplingParams::default())?;
    let (correct, parsed) = parse_verdict(&raw);
    Ok(JudgeVerdict { correct, parsed, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::ScriptedClient;

    fn verdict(reply: &str) -> JudgeVerdict {
        let judge = ScriptedClient::ordered("j", [reply]);
        judge_score("q", "g", "p", &judge, crate::prompts::JUDGE).unwrap()
    }

    #[test]
    fn verdicts() {
        assert!(verdict("CORRECT").correct);
        let wrong = verdict("wrong because the ratio differs");
        assert!(!wrong.correct && wrong.parsed);
        let maybe = verdict("maybe");
        assert!(!maybe.correct && !maybe.parsed);
        assert!(verdict("<think>\nclose enough\n</think>\n**Correct**").correct);
        assert!(!verdict("INCORRECT.").correct);
    }

    #[test]
    fn prompt_is_filled() {
        let judge = ScriptedClient::ordered("j", ["CORRECT"]);
        judge_score("Q?", "0.105", "0.105 (or 10.5%)", &judge, "{question}|{gold}|{prediction}").unwrap();
        let expected = crate::clients::request_key(&[ChatMessage::user("Q?|0.105|0.105 (or 10.5%)")], &[]);
        assert_eq!(judge.log()[0].input_hash, expected);
    }
}
