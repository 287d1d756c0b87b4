//! The agent-facing `search` and `read` tools and call dispatch.

mod read;
mod schema;
mod search;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clients::SummarizerClient;
use crate::document::Outline;

pub use read::{read, render_read, ReadResult};
pub use schema::{read_schema, render_schema, search_schema, tool_schemas, validate_arguments};
pub use search::{fold, normalize_whitespace, render_search, search, SearchField, SearchHit};

pub const SEARCH: &str = "search";
pub const READ: &str = "read";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToolError {
    #[error("search needs at least one non-blank keyword")]
    EmptyKeywords,
    #[error("read needs a non-empty goal")]
    EmptyGoal,
    #[error("unknown section ids: {}", unknown.join(", "))]
    UnknownSectionId {
        unknown: Vec<String>,
        processed: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    /// Characters of context kept on each side of a search match.
    pub window: usize,
    /// Most search items rendered in one observation.
    pub hit_cap: usize,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            window: 300,
            hit_cap: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub name: String,
    pub arguments: Value,
}

impl ToolCall {
    pub fn new(name: impl Into<String>, arguments: Value) -> Self {
        ToolCall {
            name: name.into(),
            arguments,
        }
    }

    /// Arguments as an object, decoding them first if they arrived as a
    /// JSON-encoded string.
    pub fn normalized_arguments(&self) -> Result<Value, String> {
        match &self.arguments {
            Value::String(s) => {
                serde_json::from_str(s).map_err(|e| format!("arguments string is not valid JSON: {e}"))
            }
            other => Ok(other.clone()),
        }
    }

    /// Canonical identity used for duplicate detection.
    pub fn signature(&self) -> String {
        let args = self.normalized_arguments().unwrap_or_else(|_| self.arguments.clone());
        format!("{}:{}", self.name, crate::jsonl::canonical_json(&args))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub rendered: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_note: Option<String>,
}

impl ToolResult {
    fn failure(note: String) -> Self {
        ToolResult {
            rendered: format!("Tool call failed: {note}"),
            ok: false,
            error_note: Some(note),
        }
    }
}

/// Tools bound to one document.
#[derive(Clone, Copy)]
pub struct Toolkit<'a> {
    pub outline: &'a Outline,
    pub summarizer: &'a dyn SummarizerClient,
    pub config: &'a ToolkitConfig,
}

impl<'a> Toolkit<'a> {
    pub fn new(outline: &'a Outline, summarizer: &'a dyn SummarizerClient, config: &'a ToolkitConfig) -> Self {
        Toolkit {
            outline,
            summarizer,
            config,
        }
    }

    /// Validates and runs one call. Every outcome, including bad calls,
    /// renders to a non-empty observation.
    pub fn dispatch(&self, call: &ToolCall) -> ToolResult {
        let schema = match call.name.as_str() {
            SEARCH => search_schema(),
            READ => read_schema(),
            other => {
                return ToolResult::failure(format!(
                    "unknown tool `{other}`. Available tools are `{SEARCH}` and `{READ}`."
                ))
            }
        };
        let args = match call.normalized_arguments() {
            Ok(a) => a,
            Err(e) => return ToolResult::failure(e),
        };
        if let Err(e) = validate_arguments(&schema, &args) {
            return ToolResult::failure(format!("invalid arguments for `{}`: {e}", call.name));
        }
        let strings = |key: &str| -> Vec<String> {
            args[key]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).map(str::to_string).collect())
                .unwrap_or_default()
        };

        if call.name == SEARCH {
            let keywords = strings("keywords");
            match search(self.outline, &keywords, self.config.window) {
                Ok(hits) => ToolResult {
                    rendered: render_search(&keywords, &hits, self.config.hit_cap),
                    ok: true,
                    error_note: None,
                },
                Err(e) => ToolResult::failure(e.to_string()),
            }
        } else {
            let ids = strings("section_ids");
            let goal = args["goal"].as_str().unwrap_or("");
            match read(self.outline, &ids, goal, self.summarizer) {
                Ok(result) => {
                    let mut notes = Vec::new();
                    if !result.unknown_ids.is_empty() {
                        notes.push(format!("unknown section ids: {}", result.unknown_ids.join(", ")));
                    }
                    if let Some(e) = &result.summarizer_error {
                        notes.push(format!("summarizer unavailable: {e}"));
                    }
                    ToolResult {
                        rendered: render_read(&result),
                        ok: result.summarizer_error.is_none(),
                        error_note: (!notes.is_empty()).then(|| notes.join("; ")),
                    }
                }
                Err(ToolError::UnknownSectionId { unknown, .. }) => {
                    let note = if unknown.is_empty() {
                        "no section ids given".to_string()
                    } else {
                        format!("none of the section ids {} exist in the document outline", read::quote_ids(&unknown))
                    };
                    ToolResult::failure(note)
                }
                Err(e) => ToolResult::failure(e.to_string()),
            }
        }
    }
}
