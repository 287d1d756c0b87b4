use std::sync::Mutex;
use std::time::Duration;

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::replay::{request_key, summarize_key, ReplayEntry, ReplayRecorder};
use super::{ChatMessage, ClientError, PolicyClient, Role, SamplingParams, SummarizeRequest, SummarizerClient};
use crate::prompts;

/// Connection settings for one OpenAI-compatible chat endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    #[serde(default)]
    pub supports_media: bool,
}

fn default_timeout() -> u64 {
    300
}

fn default_attempts() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
            max_tokens: None,
            supports_media: false,
        }
    }

    fn completions_url(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Sends one JSON POST. Swapped out in tests.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, headers: &[(String, String)], body: &str) -> Result<HttpResponse, TransportError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        UreqTransport { agent }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, url: &str, headers: &[(String, String)], body: &str) -> Result<HttpResponse, TransportError> {
        let mut request = self.agent.post(url).header("Content-Type", "application/json");
        for (name, value) in headers {
            request = request.header(name.as_str(), value.as_str());
        }
        let mut response = request.send(body).map_err(|e| TransportError(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// One attempt against the endpoint, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttemptRecord {
    pub attempt: u32,
    pub status: Option<u16>,
    pub outcome: String,
}

type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

/// OpenAI-compatible chat client with retry and optional replay recording.
pub struct HttpClient {
    config: EndpointConfig,
    transport: Box<dyn Transport>,
    recorder: Option<ReplayRecorder>,
    attempts: Mutex<Vec<AttemptRecord>>,
    sleep: Sleeper,
}

impl HttpClient {
    pub fn new(config: EndpointConfig) -> Self {
        let transport = UreqTransport::new(Duration::from_secs(config.timeout_secs));
        Self::with_transport(config, Box::new(transport))
    }

    pub fn with_transport(config: EndpointConfig, transport: Box<dyn Transport>) -> Self {
        HttpClient {
            config,
            transport,
            recorder: None,
            attempts: Mutex::new(Vec::new()),
            sleep: Box::new(std::thread::sleep),
        }
    }

    pub fn with_recorder(mut self, recorder: ReplayRecorder) -> Self {
        self.recorder = Some(recorder);
        self
    }

    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    pub fn attempts(&self) -> Vec<AttemptRecord> {
        self.attempts.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn log_attempt(&self, attempt: u32, status: Option<u16>, outcome: impl Into<String>) {
        let outcome = outcome.into();
        tracing::debug!(model = %self.config.model, attempt, ?status, %outcome, "chat attempt");
        self.attempts
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(AttemptRecord { attempt, status, outcome });
    }

    /// Posts a request body, retrying transient failures with exponential backoff.
    fn post_with_retry(&self, body: &Value) -> Result<Value, ClientError> {
        let key = match self.config.api_key.as_deref() {
            Some(k) if !k.trim().is_empty() => k,
            _ => {
                return Err(ClientError::AuthFailure(format!(
                    "no API key configured for model `{}`",
                    self.config.model
                )))
            }
        };
        let url = self.config.completions_url();
        let headers = vec![("Authorization".to_string(), format!("Bearer {key}"))];
        let payload = body.to_string();
        let max_attempts = self.config.max_attempts.max(1);
        let mut last_error = String::new();

        for attempt in 1..=max_attempts {
            if attempt > 1 {
                let delay = self.config.backoff_ms.saturating_mul(1 << (attempt - 2).min(16));
                (self.sleep)(Duration::from_millis(delay));
            }
            match self.transport.post_json(&url, &headers, &payload) {
                Err(e) => {
                    self.log_attempt(attempt, None, format!("transport error: {e}"));
                    last_error = e.0;
                }
                Ok(resp) if resp.status == 200 => {
                    self.log_attempt(attempt, Some(200), "ok");
                    return serde_json::from_str(&resp.body)
                        .map_err(|e| ClientError::InvalidResponse(format!("body is not JSON: {e}")));
                }
                Ok(resp) => {
                    let status = resp.status;
                    self.log_attempt(attempt, Some(status), truncate(&resp.body, 200));
                    match status {
                        401 | 403 => return Err(ClientError::AuthFailure(truncate(&resp.body, 500))),
                        400 | 413 if mentions_context_limit(&resp.body) => {
                            return Err(ClientError::ContextOverflow(truncate(&resp.body, 500)))
                        }
                        429 | 500..=599 => last_error = format!("HTTP {status}: {}", truncate(&resp.body, 200)),
                        _ => {
                            return Err(ClientError::Unavailable(format!(
                                "HTTP {status}: {}",
                                truncate(&resp.body, 500)
                            )))
                        }
                    }
                }
            }
        }
        Err(ClientError::Unavailable(format!(
            "gave up after {max_attempts} attempts: {last_error}"
        )))
    }

    fn record(&self, key: String, request: Value, response: &str) {
        if let Some(recorder) = &self.recorder {
            let entry = ReplayEntry {
                key,
                identity: self.config.model.clone(),
                request,
                response: response.to_string(),
            };
            if let Err(e) = recorder.record(&entry) {
                tracing::warn!("replay log write failed: {e}");
            }
        }
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

fn mentions_context_limit(body: &str) -> bool {
    let lower = body.to_lowercase();
    lower.contains("context_length") || (lower.contains("context") && (lower.contains("length") || lower.contains("too long") || lower.contains("maximum")))
}

/// Wraps bare function schemas in the `{"type": "function", ...}` envelope.
fn wire_tools(tools: &[Value]) -> Vec<Value> {
    tools
        .iter()
        .map(|t| {
            if t.get("type").and_then(Value::as_str) == Some("function") && t.get("function").is_some() {
                t.clone()
            } else {
                json!({ "type": "function", "function": t })
            }
        })
        .collect()
}

/// Converts transcript messages to the wire dialect. Assistant turns carrying
/// `<tool_call>` markup become structured `tool_calls` so the following tool
/// messages have something to answer.
fn wire_messages(messages: &[ChatMessage]) -> Vec<Value> {
    let mut out = Vec::with_capacity(messages.len());
    let mut pending_ids: Vec<String> = messages
        .iter()
        .filter(|m| m.role == Role::Tool)
        .filter_map(|m| m.tool_call_id.clone())
        .collect();
    pending_ids.reverse();
    for message in messages {
        match message.role {
            Role::Assistant => {
                if let Some((content, name, arguments)) = split_tool_call(&message.content) {
                    let id = pending_ids.pop().unwrap_or_else(|| "call_0".to_string());
                    out.push(json!({
                        "role": "assistant",
                        "content": content,
                        "tool_calls": [{
                            "id": id,
                            "type": "function",
                            "function": { "name": name, "arguments": arguments }
                        }]
                    }));
                } else {
                    out.push(json!({ "role": "assistant", "content": message.content }));
                }
            }
            _ => out.push(serde_json::to_value(message).unwrap_or(Value::Null)),
        }
    }
    out
}

fn split_tool_call(content: &str) -> Option<(String, String, String)> {
    let start = content.find("<tool_call>")?;
    let end = content[start..].find("</tool_call>")? + start;
    let payload: Value = serde_json::from_str(content[start + "<tool_call>".len()..end].trim()).ok()?;
    let name = payload.get("name")?.as_str()?.to_string();
    let arguments = match payload.get("arguments") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => "{}".to_string(),
    };
    let rest = format!("{}{}", &content[..start], &content[end + "</tool_call>".len()..]);
    Some((rest.trim().to_string(), name, arguments))
}

/// Renders a chat completion response in the transcript markup used by the
/// agent parser.
fn response_text(body: &Value) -> Result<String, ClientError> {
    let message = body
        .pointer("/choices/0/message")
        .ok_or_else(|| ClientError::InvalidResponse("response has no choices[0].message".into()))?;
    let mut text = String::new();
    let reasoning = message
        .get("reasoning_content")
        .or_else(|| message.get("reasoning"))
        .and_then(Value::as_str)
        .map(str::trim)
        .unwrap_or("");
    if !reasoning.is_empty() {
        text.push_str(&format!("<think>\n{reasoning}\n</think>\n"));
    }
    let content = message.get("content").and_then(Value::as_str).unwrap_or("").trim();
    text.push_str(content);
    if let Some(call) = message.pointer("/tool_calls/0/function") {
        let name = call.get("name").and_then(Value::as_str).unwrap_or("");
        let arguments = match call.get("arguments") {
            Some(Value::String(s)) => Value::String(s.clone()),
            Some(other) => Value::String(other.to_string()),
            None => Value::String("{}".into()),
        };
        if !content.is_empty() {
            text.push('\n');
        }
        text.push_str(&format!(
            "<tool_call>\n{}\n</tool_call>",
            json!({ "name": name, "arguments": arguments })
        ));
    }
    if text.trim().is_empty() {
        return Err(ClientError::InvalidResponse("empty completion".into()));
    }
    Ok(text)
}

impl PolicyClient for HttpClient {
    fn identity(&self) -> String {
        format!("http:{}", self.config.model)
    }

    fn complete(&self, messages: &[ChatMessage], tools: &[Value], sampling: &SamplingParams) -> Result<String, ClientError> {
        let mut body = json!({
            "model": self.config.model,
            "messages": wire_messages(messages),
            "temperature": sampling.temperature,
            "top_p": sampling.top_p,
            "presence_penalty": sampling.presence_penalty,
        });
        if !tools.is_empty() {
            body["tools"] = Value::Array(wire_tools(tools));
        }
        if let Some(max) = self.config.max_tokens {
            body["max_tokens"] = json!(max);
        }
        let response = self.post_with_retry(&body)?;
        let text = response_text(&response)?;
        self.record(
            request_key(messages, tools),
            json!({ "messages": messages, "tools": tools }),
            &text,
        );
        Ok(text)
    }
}

/// Summarizer backed by a chat endpoint. Media refs are sent as inline
/// images when the endpoint supports them, otherwise listed as paths.
pub struct HttpSummarizer {
    inner: HttpClient,
}

impl HttpSummarizer {
    pub fn new(inner: HttpClient) -> Self {
        HttpSummarizer { inner }
    }

    fn user_content(&self, request: &SummarizeRequest) -> Value {
        let text = prompts::render_summarize_request(&request.goal, &request.text, &request.media, !self.supports_media());
        if !self.supports_media() || request.media.is_empty() {
            return Value::String(text);
        }
        let mut parts = vec![json!({ "type": "text", "text": text })];
        for media in &request.media {
            let url = if media.starts_with("http://") || media.starts_with("https://") || media.starts_with("data:") {
                media.clone()
            } else {
                match std::fs::read(media) {
                    Ok(bytes) => format!(
                        "data:{};base64,{}",
                        mime_for(media),
                        base64::engine::general_purpose::STANDARD.encode(bytes)
                    ),
                    Err(_) => continue,
                }
            };
            parts.push(json!({ "type": "image_url", "image_url": { "url": url } }));
        }
        Value::Array(parts)
    }
}

fn mime_for(path: &str) -> &'static str {
    let lower = path.to_ascii_lowercase();
    if lower.ends_with(".png") {
        "image/png"
    } else if lower.ends_with(".webp") {
        "image/webp"
    } else if lower.ends_with(".gif") {
        "image/gif"
    } else {
        "image/jpeg"
    }
}

impl SummarizerClient for HttpSummarizer {
    fn identity(&self) -> String {
        self.inner.identity()
    }

    fn supports_media(&self) -> bool {
        self.inner.config.supports_media
    }

    fn summarize(&self, request: &SummarizeRequest) -> Result<String, ClientError> {
        let mut body = json!({
            "model": self.inner.config.model,
            "messages": [
                { "role": "system", "content": prompts::SUMMARIZER_SYSTEM },
                { "role": "user", "content": self.user_content(request) }
            ],
            "temperature": 0.0,
        });
        if let Some(max) = self.inner.config.max_tokens {
            body["max_tokens"] = json!(max);
        }
        let response = self.inner.post_with_retry(&body)?;
        let text = response_text(&response)?;
        self.inner
            .record(summarize_key(request), json!({ "summarize": request }), &text);
        Ok(text)
    }
}
