//! Model endpoint contracts and their scripted and HTTP implementations.
//!
//! Everything above this module talks to [`PolicyClient`] and
//! [`SummarizerClient`] only.

mod http;
mod replay;
mod scripted;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use http::{
    AttemptRecord, EndpointConfig, HttpClient, HttpResponse, HttpSummarizer, Transport, TransportError,
    UreqTransport,
};
pub use replay::{request_key, summarize_key, ReplayEntry, ReplayRecorder};
pub use scripted::{RunLogEntry, ScriptedClient, ScriptedResponse, ScriptedScenario, Strictness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::new(Role::Assistant, content)
    }

    pub fn tool(content: impl Into<String>, call_id: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Tool,
            content: content.into(),
            tool_call_id: Some(call_id.into()),
        }
    }

    fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage {
            role,
            content: content.into(),
            tool_call_id: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub presence_penalty: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.6,
            top_p: 0.95,
            presence_penalty: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("endpoint unavailable: {0}")]
    Unavailable(String),
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("context length exceeded: {0}")]
    ContextOverflow(String),
    #[error("invalid response: {0}")]
    InvalidResponse(String),
    #[error("scripted client `{client}` exhausted after {calls} calls")]
    ScenarioExhausted { client: String, calls: usize },
    #[error("scripted client `{client}` has no response for key {key} (nearest: {})", nearest.as_deref().unwrap_or("none"))]
    KeyMiss {
        client: String,
        key: String,
        nearest: Option<String>,
    },
}

/// Chat-with-tools endpoint. Output is raw text with `<think>` and
/// `<tool_call>` markup.
pub trait PolicyClient: Send + Sync {
    fn identity(&self) -> String;

    fn complete(
        &self,
        messages: &[ChatMessage],
        tools: &[Value],
        sampling: &SamplingParams,
    ) -> Result<String, ClientError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarizeRequest {
    pub goal: String,
    pub text: String,
    #[serde(default)]
    pub media: Vec<String>,
}

/// Multimodal reader used by the read tool and for caption generation.
pub trait SummarizerClient: Send + Sync {
    fn identity(&self) -> String;

    /// Whether media refs can be attached as images rather than path strings.
    fn supports_media(&self) -> bool {
        false
    }

    fn summarize(&self, request: &SummarizeRequest) -> Result<String, ClientError>;
}

impl<T: PolicyClient + ?Sized> PolicyClient for std::sync::Arc<T> {
    fn identity(&self) -> String {
        (**self).identity()
    }

    fn complete(&self, messages: &[ChatMessage], tools: &[Value], sampling: &SamplingParams) -> Result<String, ClientError> {
        (**self).complete(messages, tools, sampling)
    }
}

impl<T: SummarizerClient + ?Sized> SummarizerClient for std::sync::Arc<T> {
    fn identity(&self) -> String {
        (**self).identity()
    }

    fn supports_media(&self) -> bool {
        (**self).supports_media()
    }

    fn summarize(&self, request: &SummarizeRequest) -> Result<String, ClientError> {
        (**self).summarize(request)
    }
}
