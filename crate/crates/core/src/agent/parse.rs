use serde_json::Value;

use crate::toolkit::ToolCall;

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const CALL_OPEN: &str = "<tool_call>";
const CALL_CLOSE: &str = "</tool_call>";

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedAction {
    ToolCall(ToolCall),
    FinalAnswer(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOutput {
    pub thought: String,
    pub action: ParsedAction,
    /// Non-fatal oddities, such as extra tool calls that were dropped.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{reason}")]
pub struct ParseFailure {
    pub thought: String,
    pub reason: String,
}

/// Splits off the reasoning block. A missing opening tag is tolerated, since
/// some chat templates inject `<think>` into the prompt.
fn split_think(raw: &str) -> (String, String) {
    let Some(close) = raw.find(THINK_CLOSE) else {
        return (String::new(), raw.to_string());
    };
    let head = &raw[..close];
    let thought = match head.find(THINK_OPEN) {
        Some(open) => &head[open + THINK_OPEN.len()..],
        None => head,
    };
    let before = head.find(THINK_OPEN).map(|open| &head[..open]).unwrap_or("");
    let rest = format!("{before}{}", &raw[close + THINK_CLOSE.len()..]);
    (thought.trim().to_string(), rest)
}

/// Every `<tool_call>` payload in order; an unclosed last block runs to the
/// end of the text.
fn tool_call_blocks(text: &str) -> (Vec<&str>, String) {
    let mut blocks = Vec::new();
    let mut outside = String::new();
    let mut rest = text;
    while let Some(open) = rest.find(CALL_OPEN) {
        outside.push_str(&rest[..open]);
        let body = &rest[open + CALL_OPEN.len()..];
        match body.find(CALL_CLOSE) {
            Some(close) => {
                blocks.push(body[..close].trim());
                rest = &body[close + CALL_CLOSE.len()..];
            }
            None => {
                blocks.push(body.trim());
                rest = "";
            }
        }
    }
    outside.push_str(rest);
    (blocks, outside)
}

fn parse_call(payload: &str) -> Result<ToolCall, String> {
    let value: Value = serde_json::from_str(payload).map_err(|e| format!("tool call is not valid JSON: {e}"))?;
    let obj = value.as_object().ok_or("tool call must be a JSON object")?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or("tool call has no string field `name`")?;
    let arguments = match obj.get("arguments") {
        None | Some(Value::Null) => Value::Object(Default::default()),
        Some(Value::String(s)) => {
            serde_json::from_str(s).map_err(|e| format!("tool call arguments are not valid JSON: {e}"))?
        }
        Some(other) => other.clone(),
    };
    Ok(ToolCall::new(name, arguments))
}

/// Reads one policy turn: the `<think>` block becomes the thought, the first
/// `<tool_call>` block the action, and otherwise the remaining text is the
/// final answer.
pub fn parse_policy_output(raw: &str) -> Result<ParsedOutput, ParseFailure> {
    let (mut thought, rest) = split_think(raw);
    let (blocks, outside) = tool_call_blocks(&rest);
    let fail = |thought: &str, reason: String| ParseFailure {
        thought: thought.to_string(),
        reason,
    };

    if blocks.is_empty() {
        let answer = rest.trim();
        if answer.is_empty() {
            return Err(fail(&thought, "the reply has neither a tool call nor answer text".into()));
        }
        return Ok(ParsedOutput {
            thought,
            action: ParsedAction::FinalAnswer(answer.to_string()),
            warnings: Vec::new(),
        });
    }

    let outside = outside.trim();
    if thought.is_empty() {
        thought = outside.to_string();
    }
    let call = parse_call(blocks[0]).map_err(|reason| fail(&thought, reason))?;
    let warnings = if blocks.len() > 1 {
        vec![format!("{} extra tool call(s) ignored; only the first is executed", blocks.len() - 1)]
    } else {
        Vec::new()
    };
    Ok(ParsedOutput {
        thought,
        action: ParsedAction::ToolCall(call),
        warnings,
    })
}
