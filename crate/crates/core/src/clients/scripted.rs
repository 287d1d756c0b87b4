use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::replay::{request_key, summarize_key, ReplayEntry};
use super::{ChatMessage, ClientError, PolicyClient, SamplingParams, SummarizeRequest, SummarizerClient};
use crate::jsonl::read_jsonl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// Responses are served in sequence regardless of input.
    Ordered,
    /// Responses are looked up by the hash of the request.
    Keyed,
}

/// A canned response: plain text, or `{"error": kind, "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedResponse {
    Text(String),
    Error {
        error: String,
        #[serde(default)]
        message: String,
    },
}

impl ScriptedResponse {
    pub fn error(kind: &str, message: &str) -> Self {
        ScriptedResponse::Error {
            error: kind.to_string(),
            message: message.to_string(),
        }
    }

    fn resolve(&self) -> Result<String, ClientError> {
        match self {
            ScriptedResponse::Text(text) => Ok(text.clone()),
            ScriptedResponse::Error { error, message } => Err(match error.as_str() {
                "auth" | "auth_failure" => ClientError::AuthFailure(message.clone()),
                "context_overflow" => ClientError::ContextOverflow(message.clone()),
                "invalid_response" => ClientError::InvalidResponse(message.clone()),
                _ => ClientError::Unavailable(message.clone()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum Responses {
    List(Vec<ScriptedResponse>),
    Keyed(BTreeMap<String, ScriptedResponse>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct ScriptedScenario {
    pub strictness: Strictness,
    ordered: Vec<ScriptedResponse>,
    keyed: BTreeMap<String, ScriptedResponse>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    strictness: Strictness,
    responses: Responses,
}

impl TryFrom<RawScenario> for ScriptedScenario {
    type Error = String;

    fn try_from(raw: RawScenario) -> Result<Self, String> {
        match (raw.strictness, raw.responses) {
            (Strictness::Ordered, Responses::List(list)) => Ok(ScriptedScenario::from_responses(list)),
            (Strictness::Keyed, Responses::Keyed(map)) => Ok(ScriptedScenario::keyed(map)),
            (Strictness::Keyed, Responses::List(list)) if list.is_empty() => Ok(ScriptedScenario::keyed(BTreeMap::new())),
            (Strictness::Ordered, Responses::Keyed(_)) => Err("ordered scenario needs a response list".into()),
            (Strictness::Keyed, Responses::List(_)) => Err("keyed scenario needs a key -> response map".into()),
        }
    }
}

impl From<ScriptedScenario> for RawScenario {
    fn from(s: ScriptedScenario) -> Self {
        RawScenario {
            strictness: s.strictness,
            responses: match s.strictness {
                Strictness::Ordered => Responses::List(s.ordered),
                Strictness::Keyed => Responses::Keyed(s.keyed),
            },
        }
    }
}

impl ScriptedScenario {
    pub fn ordered<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        Self::from_responses(texts.into_iter().map(|t| ScriptedResponse::Text(t.into())).collect())
    }

    pub fn from_responses(responses: Vec<ScriptedResponse>) -> Self {
        ScriptedScenario {
            strictness: Strictness::Ordered,
            ordered: responses,
            keyed: BTreeMap::new(),
        }
    }

    pub fn keyed(map: BTreeMap<String, ScriptedResponse>) -> Self {
        ScriptedScenario {
            strictness: Strictness::Keyed,
            ordered: Vec::new(),
            keyed: map,
        }
    }

    pub fn from_value(value: Value) -> Result<Self, String> {
        serde_json::from_value(value).map_err(|e| e.to_string())
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Builds a keyed scenario from a log written by a `ReplayRecorder`.
    pub fn from_replay_log(path: &Path) -> Result<Self, String> {
        let entries: Vec<ReplayEntry> = read_jsonl(path).map_err(|e| e.to_string())?;
        Ok(Self::keyed(
            entries
                .into_iter()
                .map(|e| (e.key, ScriptedResponse::Text(e.response)))
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        match self.strictness {
            Strictness::Ordered => self.ordered.len(),
            Strictness::Keyed => self.keyed.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One served (or refused) request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLogEntry {
    pub call: usize,
    pub input_hash: String,
    pub outcome: String,
}

/// Deterministic client that replays a [`ScriptedScenario`].
///
/// Serves both the policy and the summarizer contract. Ordered scenarios
/// advance a shared cursor under a lock, so concurrent callers see a single
/// global sequence.
#[derive(Debug)]
pub struct ScriptedClient {
    identity: String,
    scenario: ScriptedScenario,
    state: Mutex<State>,
}

#[derive(Debug, Default)]
struct State {
    cursor: usize,
    log: Vec<RunLogEntry>,
}

impl ScriptedClient {
    pub fn new(identity: impl Into<String>, scenario: ScriptedScenario) -> Self {
        ScriptedClient {
            identity: identity.into(),
            scenario,
            state: Mutex::new(State::default()),
        }
    }

    pub fn ordered<S: Into<String>>(identity: impl Into<String>, texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(identity, ScriptedScenario::ordered(texts))
    }

    pub fn calls(&self) -> usize {
        self.lock().log.len()
    }

    pub fn log(&self) -> Vec<RunLogEntry> {
        self.lock().log.clone()
    }

    /// Ordered responses not yet served.
    pub fn remaining(&self) -> usize {
        match self.scenario.strictness {
            Strictness::Ordered => self.scenario.ordered.len().saturating_sub(self.lock().cursor),
            Strictness::Keyed => self.scenario.keyed.len(),
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn serve(&self, key: String) -> Result<String, ClientError> {
        let mut state = self.lock();
        let call = state.log.len() + 1;
        let picked = match self.scenario.strictness {
            Strictness::Ordered => match self.scenario.ordered.get(state.cursor) {
                Some(response) => {
                    state.cursor += 1;
                    response.resolve()
                }
                None => Err(ClientError::ScenarioExhausted {
                    client: self.identity.clone(),
                    calls: state.cursor,
                }),
            },
            Strictness::Keyed => match self.scenario.keyed.get(&key) {
                Some(response) => response.resolve(),
                None => Err(ClientError::KeyMiss {
                    client: self.identity.clone(),
                    key: key.clone(),
                    nearest: nearest_key(self.scenario.keyed.keys(), &key),
                }),
            },
        };
        let outcome = match &picked {
            Ok(_) => "ok".to_string(),
            Err(e) => format!("error: {e}"),
        };
        state.log.push(RunLogEntry {
            call,
            input_hash: key,
            outcome,
        });
        picked
    }
}

fn nearest_key<'a>(keys: impl Iterator<Item = &'a String>, key: &str) -> Option<String> {
    keys.max_by_key(|k| {
        let shared = k.bytes().zip(key.bytes()).take_while(|(a, b)| a == b).count();
        (shared, std::cmp::Reverse((*k).clone()))
    })
    .cloned()
}

impl PolicyClient for ScriptedClient {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn complete(&self, messages: &[ChatMessage], tools: &[Value], _sampling: &SamplingParams) -> Result<String, ClientError> {
        self.serve(request_key(messages, tools))
    }
}

impl SummarizerClient for ScriptedClient {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn summarize(&self, request: &SummarizeRequest) -> Result<String, ClientError> {
        self.serve(summarize_key(request))
    }
}
