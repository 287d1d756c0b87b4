use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{SourceTag, SynthesisConfig};
use crate::agent::{call_id, parse_policy_output, ParsedAction};
use crate::clients::{ChatMessage, PolicyClient};
use crate::document::serialize_xml;
use crate::prompts::{fill, PromptSet};
use crate::toolkit::{tool_schemas, ToolCall, Toolkit};

static INTENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<intent>(.*?)</intent>").unwrap());

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationStep {
    pub intent: String,
    pub action: ToolCall,
    pub observation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplorationStop {
    /// The explorer replied without a tool call.
    ModelStopped,
    DepthCap,
    /// Too many turns were spent on duplicates or unparseable output.
    TurnCap,
    ExplorerError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationTrajectory {
    pub id: String,
    pub doc_id: String,
    pub source_tag: SourceTag,
    pub steps: Vec<ExplorationStep>,
    pub stopped_by: ExplorationStop,
    pub suppressed_duplicates: usize,
    pub malformed_turns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Pulls the `<intent>` block out of an explorer turn, returning it and the
/// remaining text.
pub fn split_intent(raw: &str) -> (String, String) {
    match INTENT.captures(raw) {
        Some(c) => {
            let whole = c.get(0).unwrap();
            let rest = format!("{}{}", &raw[..whole.start()], &raw[whole.end()..]);
            (c[1].trim().to_string(), rest)
        }
        None => (String::new(), raw.to_string()),
    }
}

/// Intent-guided exploration of one document. Stops when the explorer
/// replies without a tool call, at the depth cap for `source_tag`, or after
/// twice that many turns. Repeated calls are not executed and do not enter
/// the trajectory; the explorer is told about them instead.
pub fn explore(
    id: &str,
    toolkit: &Toolkit<'_>,
    explorer: &dyn PolicyClient,
    source_tag: SourceTag,
    cfg: &SynthesisConfig,
    prompts: &PromptSet,
) -> ExplorationTrajectory {
    let max_depth = cfg.max_depth(source_tag);
    let mut traj = ExplorationTrajectory {
        id: id.to_string(),
        doc_id: toolkit.outline.doc_id.clone(),
        source_tag,
        steps: Vec::new(),
        stopped_by: ExplorationStop::DepthCap,
        suppressed_duplicates: 0,
        malformed_turns: 0,
        error: None,
    };
    let outline_xml = serialize_xml(toolkit.outline);
    let mut messages = vec![
        ChatMessage::system(prompts.explore_system.clone()),
        ChatMessage::user(fill(&prompts.explore_kickoff, &[("document_outline", &outline_xml)])),
    ];
    let tools = tool_schemas();
    let mut seen = BTreeSet::new();
    let mut turns = 0;

    while traj.steps.len() < max_depth {
        if turns == 2 * max_depth {
            traj.stopped_by = ExplorationStop::TurnCap;
            return traj;
        }
        turns += 1;
        let raw = match explorer.complete(&messages, &tools, &cfg.sampling) {
            Ok(raw) => raw,
            Err(e) => {
                traj.stopped_by = ExplorationStop::ExplorerError;
                traj.error = Some(e.to_string());
                return traj;
            }
        };
        let (intent, rest) = split_intent(&raw);
        messages.push(ChatMessage::assistant(raw.clone()));
        match parse_policy_output(&rest) {
            Ok(out) => match out.action {
                ParsedAction::FinalAnswer(_) => {
                    traj.stopped_by = ExplorationStop::ModelStopped;
                    return traj;
                }
                ParsedAction::ToolCall(call) => {
                    if !seen.insert(call.signature()) {
                        traj.suppressed_duplicates += 1;
                        messages.push(ChatMessage::tool(prompts.duplicate_call.clone(), call_id(turns)));
                        continue;
                    }
                    let result = toolkit.dispatch(&call);
                    debug!(doc = %traj.doc_id, depth = traj.steps.len() + 1, tool = %call.name, "exploration step");
                    messages.push(ChatMessage::tool(result.rendered.clone(), call_id(turns)));
                    traj.steps.push(ExplorationStep {
                        intent: if intent.is_empty() { out.thought } else { intent },
                        action: call,
                        observation: result.rendered,
                    });
                }
            },
            Err(failure) => {
                traj.malformed_turns += 1;
                messages.push(ChatMessage::user(fill(&prompts.malformed_output, &[("reason", &failure.reason)])));
            }
        }
    }
    traj
}

/// Text form of the evidence trajectory handed to the synthesizer.
pub fn render_exploration(traj: &ExplorationTrajectory) -> String {
    traj.steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                "Step {}\nIntent: {}\nAction: {} {}\nObservation:\n{}",
                i + 1,
                s.intent,
                s.action.name,
                s.action.arguments,
                s.observation
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}
