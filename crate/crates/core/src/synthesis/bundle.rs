use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::pipeline::{ClientProvider, DocClients};
use crate::clients::{ClientError, ScriptedClient, ScriptedScenario};

/// Scripted responses for every model role used on one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocScenarios {
    pub explorer: ScriptedScenario,
    pub synthesizer: ScriptedScenario,
    pub teacher: ScriptedScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<ScriptedScenario>,
    pub summarizer: ScriptedScenario,
}

/// Per-document scenarios for an offline synthesis run, plus optional
/// expected counts used by tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBundle {
    pub documents: BTreeMap<String, DocScenarios>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Value>,
}

impl ScenarioBundle {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl ClientProvider for ScenarioBundle {
    fn clients_for(&self, doc_id: &str) -> Result<DocClients, ClientError> {
        let s = self
            .documents
            .get(doc_id)
            .ok_or_else(|| ClientError::Unavailable(format!("no scenarios for document `{doc_id}`")))?;
        let client = |role: &str, scenario: &ScriptedScenario| {
            Arc::new(ScriptedClient::new(format!("{doc_id}/{role}"), scenario.clone()))
        };
        Ok(DocClients {
            explorer: client("explorer", &s.explorer),
            synthesizer: client("synthesizer", &s.synthesizer),
            teacher: client("teacher", &s.teacher),
            judge: s.judge.as_ref().map(|j| client("judge", j) as _),
            summarizer: client("summarizer", &s.summarizer),
        })
    }
}
