use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatMessage, SummarizeRequest};
use crate::jsonl::{canonical_json, sha256_hex, write_line};

/// Hash of a chat request. Sampling parameters are not part of the key.
pub fn request_key(messages: &[ChatMessage], tools: &[Value]) -> String {
    let value = json!({ "messages": messages, "tools": tools });
    sha256_hex(&canonical_json(&value))
}

pub fn summarize_key(request: &SummarizeRequest) -> String {
    let value = json!({ "summarize": request });
    sha256_hex(&canonical_json(&value))
}

/// One recorded exchange in a replay log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub key: String,
    pub identity: String,
    pub request: Value,
    pub response: String,
}

/// Appends exchanges to a JSONL replay log as they happen.
#[derive(Debug)]
pub struct ReplayRecorder {
    out: Mutex<BufWriter<File>>,
}

impl ReplayRecorder {
    pub fn create(path: &Path) -> io::Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(ReplayRecorder {
            out: Mutex::new(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn record(&self, entry: &ReplayEntry) -> io::Result<()> {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        write_line(&mut *out, entry)?;
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_ignores_object_key_order() {
        let a = vec![json!({"name": "search", "parameters": {"b": 1, "a": 2}})];
        let b = vec![json!({"parameters": {"a": 2, "b": 1}, "name": "search"})];
        let msgs = [ChatMessage::user("hi")];
        assert_eq!(request_key(&msgs, &a), request_key(&msgs, &b));
    }

    #[test]
    fn key_depends_on_content() {
        let k1 = request_key(&[ChatMessage::user("a")], &[]);
        let k2 = request_key(&[ChatMessage::user("b")], &[]);
        assert_ne!(k1, k2);
        assert_eq!(k1.len(), 64);
    }
}
