//! The reasoning-acting episode loop over the document toolkit.

mod history;
mod parse;
mod trace;

use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::clients::{ChatMessage, ClientError, PolicyClient, SamplingParams};
use crate::document::serialize_xml;
use crate::prompts::{fill, PromptSet};
use crate::toolkit::{tool_schemas, ToolCall, Toolkit};

pub use history::{assistant_content, call_id, format_history, render_action, render_thought, task_context};
pub use parse::{parse_policy_output, ParseFailure, ParsedAction, ParsedOutput};
pub use trace::{read_trace, write_trace, TraceManifest, TRACE_FORMAT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    ToolCall(ToolCall),
    FinalAnswer { text: String },
    /// A turn that could not be parsed. Kept so repair turns stay visible.
    Invalid { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub thought: String,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<String>,
    /// Policy output exactly as received.
    pub raw: String,
    /// User message sent just before this turn when an answer was forced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Step {
    pub fn is_forced(&self) -> bool {
        self.forced_prompt.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FinalAnswer,
    /// The step budget ran out and an answer was forced.
    StepLimit,
    PolicyError,
    /// Too many consecutive unparseable turns; an answer was forced.
    MalformedOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub doc_id: String,
    pub question: String,
    pub task_context: String,
    pub steps: Vec<Step>,
    pub terminated_by: Termination,
}

impl Trajectory {
    /// Text of the last step when it is an answer.
    pub fn final_answer(&self) -> Option<&str> {
        match self.steps.last().map(|s| &s.action) {
            Some(Action::FinalAnswer { text }) => Some(text),
            _ => None,
        }
    }

    pub fn tool_calls(&self) -> impl Iterator<Item = &ToolCall> {
        self.steps.iter().filter_map(|s| match &s.action {
            Action::ToolCall(call) => Some(call),
            _ => None,
        })
    }

    /// Raw policy outputs in call order, enough to replay the episode.
    pub fn policy_script(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.raw.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub max_steps: usize,
    pub sampling: SamplingParams,
    pub retry_on_malformed: usize,
    /// Refuse to start when the task context is longer than this many chars.
    pub context_budget_chars: Option<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_steps: 20,
            sampling: SamplingParams::default(),
            retry_on_malformed: 2,
            context_budget_chars: None,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum AgentError {
    #[error("max_steps must be at least 1")]
    InvalidConfig,
    #[error("policy unavailable: {source}")]
    PolicyUnavailable {
        source: ClientError,
        partial: Box<Trajectory>,
    },
    #[error("context overflow: {message}")]
    ContextOverflow {
        message: String,
        partial: Box<Trajectory>,
    },
}

impl AgentError {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            AgentError::InvalidConfig => None,
            AgentError::PolicyUnavailable { partial, .. } | AgentError::ContextOverflow { partial, .. } => {
                Some(partial)
            }
        }
    }
}

struct Episode<'a> {
    toolkit: &'a Toolkit<'a>,
    policy: &'a dyn PolicyClient,
    config: &'a AgentConfig,
    prompts: &'a PromptSet,
    traj: Trajectory,
}

impl Episode<'_> {
    fn call(&mut self, messages: &[ChatMessage], tools: &[serde_json::Value]) -> Result<String, AgentError> {
        self.policy
            .complete(messages, tools, &self.config.sampling)
            .map_err(|e| {
                let mut partial = self.traj.clone();
                partial.terminated_by = Termination::PolicyError;
                match e {
                    ClientError::ContextOverflow(message) => AgentError::ContextOverflow {
                        message,
                        partial: Box::new(partial),
                    },
                    source => AgentError::PolicyUnavailable {
                        source,
                        partial: Box::new(partial),
                    },
                }
            })
    }

    fn run(mut self) -> Result<(Trajectory, String), AgentError> {
        let tools = tool_schemas();
        let mut malformed = 0usize;
        while self.traj.steps.len() < self.config.max_steps {
            let messages = format_history(&self.traj.task_context, &self.traj.steps);
            let raw = self.call(&messages, &tools)?;
            match parse_policy_output(&raw) {
                Ok(out) => {
                    malformed = 0;
                    match out.action {
                        ParsedAction::FinalAnswer(text) => {
                            self.traj.steps.push(Step {
                                thought: out.thought,
                                action: Action::FinalAnswer { text: text.clone() },
                                observation: None,
                                raw,
                                forced_prompt: None,
                                warnings: out.warnings,
                            });
                            self.traj.terminated_by = Termination::FinalAnswer;
                            return Ok((self.traj, text));
                        }
                        ParsedAction::ToolCall(call) => {
                            let result = self.toolkit.dispatch(&call);
                            debug!(step = self.traj.steps.len() + 1, tool = %call.name, ok = result.ok, "tool call");
                            let mut warnings = out.warnings;
                            warnings.extend(result.error_note);
                            self.traj.steps.push(Step {
                                thought: out.thought,
                                action: Action::ToolCall(call),
                                observation: Some(result.rendered),
                                raw,
                                forced_prompt: None,
                                warnings,
                            });
                        }
                    }
                }
                Err(failure) => {
                    malformed += 1;
                    debug!(step = self.traj.steps.len() + 1, reason = %failure.reason, "malformed policy output");
                    let give_up = malformed > self.config.retry_on_malformed;
                    let observation =
                        (!give_up).then(|| fill(&self.prompts.malformed_output, &[("reason", &failure.reason)]));
                    self.traj.steps.push(Step {
                        thought: failure.thought,
                        action: Action::Invalid { reason: failure.reason },
                        observation,
                        raw,
                        forced_prompt: None,
                        warnings: Vec::new(),
                    });
                    if give_up {
                        return self.force(Termination::MalformedOutput);
                    }
                }
            }
        }
        self.force(Termination::StepLimit)
    }

    /// One last call with no tools offered.
    fn force(mut self, reason: Termination) -> Result<(Trajectory, String), AgentError> {
        let prompt = self.prompts.forced_answer.clone();
        let mut messages = format_history(&self.traj.task_context, &self.traj.steps);
        messages.push(ChatMessage::user(prompt.clone()));
        let raw = self.call(&messages, &[])?;
        let (thought, action, answer) = match parse_policy_output(&raw) {
            Ok(ParsedOutput {
                thought,
                action: ParsedAction::FinalAnswer(text),
                ..
            }) => (thought, Action::FinalAnswer { text: text.clone() }, text),
            Ok(out) => (
                out.thought,
                Action::Invalid {
                    reason: "tool call issued after the forced-answer prompt".into(),
                },
                String::new(),
            ),
            Err(failure) => (failure.thought, Action::Invalid { reason: failure.reason }, String::new()),
        };
        self.traj.steps.push(Step {
            thought,
            action,
            observation: None,
            raw,
            forced_prompt: Some(prompt),
            warnings: Vec::new(),
        });
        self.traj.terminated_by = reason;
        Ok((self.traj, answer))
    }
}

/// Runs one question against the document behind `toolkit` until the policy
/// answers, the step budget runs out (an answer is then forced), or the
/// policy fails.
pub fn run_episode(
    question: &str,
    toolkit: &Toolkit<'_>,
    policy: &dyn PolicyClient,
    config: &AgentConfig,
    prompts: &PromptSet,
) -> Result<(Trajectory, String), AgentError> {
    if config.max_steps == 0 {
        return Err(AgentError::InvalidConfig);
    }
    let outline_xml = serialize_xml(toolkit.outline);
    let traj = Trajectory {
        doc_id: toolkit.outline.doc_id.clone(),
        question: question.to_string(),
        task_context: task_context(&prompts.agent_system, &outline_xml, question),
        steps: Vec::new(),
        terminated_by: Termination::PolicyError,
    };
    if let Some(budget) = config.context_budget_chars {
        let len = traj.task_context.chars().count();
        if len > budget {
            return Err(AgentError::ContextOverflow {
                message: format!("task context is {len} chars, budget is {budget}"),
                partial: Box::new(traj),
            });
        }
    }
    Episode {
        toolkit,
        policy,
        config,
        prompts,
        traj,
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::{ScriptedClient, ScriptedResponse, ScriptedScenario};
    use crate::document::{Element, ElementKind, Outline, SectionNode};
    use crate::toolkit::ToolkitConfig;

    fn outline() -> Outline {
        Outline::new(
            "d",
            vec![SectionNode {
                section_id: "1".into(),
                title: "Costs".into(),
                level: 1,
                page_span: (1, 1),
                elements: vec![Element {
                    element_id: "paragraph-1".into(),
                    kind: ElementKind::Paragraph,
                    text: "Advertising expenses were $7 million.".into(),
                    caption: None,
                    generated_caption: None,
                    page_num: 1,
                    media_ref: None,
                    table_html: None,
                }],
                children: vec![],
            }],
        )
    }

    const SEARCH: &str = "<think>\nlook\n</think>\n<tool_call>\n{\"name\": \"search\", \"arguments\": {\"keywords\": [\"advertising\"]}}\n</tool_call>";

    fn episode(policy: &ScriptedClient, config: &AgentConfig) -> Result<(Trajectory, String), AgentError> {
        let o = outline();
        let summarizer = ScriptedClient::ordered("sum", Vec::<String>::new());
        let tk_cfg = ToolkitConfig::default();
        let toolkit = Toolkit::new(&o, &summarizer, &tk_cfg);
        run_episode("How much?", &toolkit, policy, config, &PromptSet::default())
    }

    #[test]
    fn immediate_answer() {
        let policy = ScriptedClient::ordered("p", ["42"]);
        let (traj, answer) = episode(&policy, &AgentConfig::default()).unwrap();
        assert_eq!(answer, "42");
        assert_eq!(traj.steps.len(), 1);
        assert_eq!(traj.tool_calls().count(), 0);
        assert_eq!(traj.terminated_by, Termination::FinalAnswer);
        assert!(traj.task_context.contains("<document doc_id=\"d\">"));
        assert!(traj.task_context.ends_with("How much?."));
    }

    #[test]
    fn repairs_then_valid_call() {
        let policy = ScriptedClient::ordered(
            "p",
            ["<tool_call>{bad</tool_call>", "<tool_call>{\"name\": 1}</tool_call>", SEARCH, "It was $7 million."],
        );
        let (traj, answer) = episode(&policy, &AgentConfig::default()).unwrap();
        assert_eq!(answer, "It was $7 million.");
        let kinds: Vec<&str> = traj
            .steps
            .iter()
            .map(|s| match s.action {
                Action::Invalid { .. } => "invalid",
                Action::ToolCall(_) => "tool",
                Action::FinalAnswer { .. } => "answer",
            })
            .collect();
        assert_eq!(kinds, ["invalid", "invalid", "tool", "answer"]);
        assert!(traj.steps[0].observation.as_deref().unwrap().starts_with("Your previous output could not be parsed"));
        assert!(traj.steps[2].observation.as_deref().unwrap().contains("found 1 results"));
    }

    #[test]
    fn malformed_past_limit_forces_answer() {
        let policy = ScriptedClient::ordered("p", ["<tool_call>{</tool_call>", "<tool_call>{</tool_call>", "<tool_call>{</tool_call>", "7"]);
        let (traj, answer) = episode(&policy, &AgentConfig::default()).unwrap();
        assert_eq!(answer, "7");
        assert_eq!(traj.steps.len(), 4);
        assert!(traj.steps[2].observation.is_none());
        assert!(traj.steps[3].is_forced());
        assert_eq!(traj.terminated_by, Termination::MalformedOutput);
    }

    #[test]
    fn step_limit_forces_answer_without_tools() {
        let policy = ScriptedClient::ordered("p", [SEARCH, SEARCH, "final"]);
        let config = AgentConfig {
            max_steps: 2,
            ..AgentConfig::default()
        };
        let (traj, answer) = episode(&policy, &config).unwrap();
        assert_eq!(answer, "final");
        assert_eq!(traj.steps.len(), 3);
        assert_eq!(traj.terminated_by, Termination::StepLimit);
        let last_call = policy.log().last().unwrap().input_hash.clone();
        let forced_messages = {
            let mut m = format_history(&traj.task_context, &traj.steps[..2]);
            m.push(ChatMessage::user(PromptSet::default().forced_answer));
            m
        };
        assert_eq!(last_call, crate::clients::request_key(&forced_messages, &[]));
    }

    #[test]
    fn policy_failure_keeps_partial() {
        let policy = ScriptedClient::new(
            "p",
            ScriptedScenario::from_responses(vec![
                ScriptedResponse::Text(SEARCH.into()),
                ScriptedResponse::error("unavailable", "down"),
            ]),
        );
        let err = episode(&policy, &AgentConfig::default()).unwrap_err();
        assert!(matches!(err, AgentError::PolicyUnavailable { .. }));
        let partial = err.partial().unwrap();
        assert_eq!(partial.steps.len(), 1);
        assert_eq!(partial.terminated_by, Termination::PolicyError);

        let policy = ScriptedClient::new(
            "p",
            ScriptedScenario::from_responses(vec![ScriptedResponse::error("context_overflow", "too long")]),
        );
        assert!(matches!(episode(&policy, &AgentConfig::default()), Err(AgentError::ContextOverflow { .. })));
    }

    #[test]
    fn budget_checked_before_any_call() {
        let policy = ScriptedClient::ordered("p", ["42"]);
        let config = AgentConfig {
            context_budget_chars: Some(10),
            ..AgentConfig::default()
        };
        assert!(matches!(episode(&policy, &config), Err(AgentError::ContextOverflow { .. })));
        assert_eq!(policy.calls(), 0);
    }

    #[test]
    fn action_serialization() {
        let a = Action::ToolCall(ToolCall::new("read", serde_json::json!({"section_ids": ["1"], "goal": "g"})));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"type":"tool_call","name":"read","arguments":{"section_ids":["1"],"goal":"g"}}"#
        );
    }
}
