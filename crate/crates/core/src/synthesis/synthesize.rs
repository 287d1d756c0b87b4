use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::explore::{render_exploration, ExplorationTrajectory};
use super::validate::{validate_qa, CheckResult};
use super::{QAPair, SynthesisError};
use crate::clients::{ChatMessage, PolicyClient, SamplingParams};
use crate::document::{serialize_xml, Outline};
use crate::prompts::{fill, PromptSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisAttempt {
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckResult>,
}

impl SynthesisAttempt {
    fn passed(&self) -> bool {
        self.parse_error.is_none() && self.checks.iter().all(|c| !c.failed())
    }

    fn failure_notes(&self) -> String {
        match &self.parse_error {
            Some(e) => format!("- output is not a JSON object: {e}"),
            None => self
                .checks
                .iter()
                .filter(|c| c.failed())
                .map(|c| {
                    let name = serde_json::to_value(c.check).ok().and_then(|v| v.as_str().map(str::to_string));
                    format!("- {}: {}", name.unwrap_or_default(), c.detail)
                })
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOutcome {
    pub attempts: Vec<SynthesisAttempt>,
    /// Set when an attempt passed every mechanical check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa: Option<QAPair>,
}

impl SynthesisOutcome {
    /// Whether any attempt produced a JSON object at all.
    pub fn produced_object(&self) -> bool {
        self.attempts.iter().any(|a| a.parse_error.is_none())
    }
}

/// Finds the JSON object in a synthesizer reply: a fenced block if there is
/// one, else the span from the first `{` to the last `}`.
pub fn extract_json_object(raw: &str) -> Result<Map<String, Value>, String> {
    let text = match raw.find("</think>") {
        Some(i) => &raw[i + "</think>".len()..],
        None => raw,
    };
    let fenced = text.find("```").and_then(|open| {
        let body = &text[open + 3..];
        let body = body.find('\n').map(|nl| &body[nl + 1..]).unwrap_or(body);
        body.find("```").map(|close| &body[..close])
    });
    let candidate = match fenced {
        Some(f) if f.contains('{') => f,
        _ => text,
    };
    let (Some(start), Some(end)) = (candidate.find('{'), candidate.rfind('}')) else {
        return Err("no JSON object found".into());
    };
    if end < start {
        return Err("no JSON object found".into());
    }
    match serde_json::from_str::<Value>(&candidate[start..=end]) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err("not an object".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn attempt(raw: String) -> SynthesisAttempt {
    match extract_json_object(&raw) {
        Ok(fields) => SynthesisAttempt {
            checks: validate_qa(&fields),
            raw,
            parse_error: None,
        },
        Err(e) => SynthesisAttempt {
            raw,
            parse_error: Some(e),
            checks: Vec::new(),
        },
    }
}

/// Asks the synthesizer for one QA pair grounded in `traj`. A pair failing
/// the mechanical checks is sent back once with the failure notes; if the
/// second answer fails too the pair is discarded.
pub fn synthesize(
    traj: &ExplorationTrajectory,
    outline: &Outline,
    synthesizer: &dyn PolicyClient,
    sampling: &SamplingParams,
    prompts: &PromptSet,
) -> Result<SynthesisOutcome, SynthesisError> {
    if traj.steps.is_empty() {
        return Err(SynthesisError::EmptyTrajectory);
    }
    let user = fill(
        &prompts.synthesize_user,
        &[("document_outline", &serialize_xml(outline)), ("trajectory", &render_exploration(traj))],
    );
    let mut messages = vec![ChatMessage::system(prompts.synthesize_system.clone()), ChatMessage::user(user)];
    let mut outcome = SynthesisOutcome {
        attempts: Vec::new(),
        qa: None,
    };
    for round in 0..2 {
        let raw = synthesizer
            .complete(&messages, &[], sampling)
            .map_err(SynthesisError::SynthesizerUnavailable)?;
        let a = attempt(raw);
        if a.passed() {
            let fields = extract_json_object(&a.raw).unwrap_or_default();
            let text = |k: &str| fields.get(k).and_then(Value::as_str).unwrap_or("").trim().to_string();
            outcome.qa = Some(QAPair {
                question: text("question"),
                answer: text("answer"),
            });
            outcome.attempts.push(a);
            break;
        }
        if round == 0 {
            messages.push(ChatMessage::assistant(a.raw.clone()));
            messages.push(ChatMessage::user(fill(&prompts.synthesize_retry, &[("failures", &a.failure_notes())])));
        }
        outcome.attempts.push(a);
    }
    Ok(outcome)
}
