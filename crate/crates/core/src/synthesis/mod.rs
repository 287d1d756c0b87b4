//! Exploration-then-synthesis data generation: explore a document with
//! intents, synthesize a QA pair from the evidence, check it, and keep
//! teacher trajectories that answer it correctly.

mod bundle;
mod explore;
mod pipeline;
mod rejection;
mod synthesize;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clients::{ClientError, SamplingParams};

pub use bundle::{DocScenarios, ScenarioBundle};
pub use explore::{explore, render_exploration, split_intent, ExplorationStep, ExplorationStop, ExplorationTrajectory};
pub use pipeline::{
    load_manifest, run_pipeline, write_outputs, ClientProvider, CorpusEntry, DocClients, DocReport, PipelineConfig,
    PipelineError, PipelineOutput, QaRecord, StageReport, TrainingTrajectory,
};
pub use rejection::{reject_sample, AcceptanceMethod, RejectionAttempt, RejectionOutcome};
pub use synthesize::{extract_json_object, synthesize, SynthesisAttempt, SynthesisOutcome};
pub use validate::{sentence_count, validate_qa, violations, Check, CheckResult, CheckStatus, Violation, MAX_ANSWER_CHARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Longdocurl,
    Mmdocrag,
    Dude,
    Cuad,
    Other,
}

impl SourceTag {
    pub const ALL: [SourceTag; 5] = [
        SourceTag::Longdocurl,
        SourceTag::Mmdocrag,
        SourceTag::Dude,
        SourceTag::Cuad,
        SourceTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::Longdocurl => "longdocurl",
            SourceTag::Mmdocrag => "mmdocrag",
            SourceTag::Dude => "dude",
            SourceTag::Cuad => "cuad",
            SourceTag::Other => "other",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown source tag `{s}`"))
    }
}

/// A synthesized question with its reference answer. Only these two fields
/// are ever serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QAPair {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceRule {
    /// Judge model verdict, with the rule as fallback.
    Judge,
    ExactMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub max_depth_by_source: BTreeMap<SourceTag, usize>,
    pub k_rejection_samples: usize,
    pub acceptance_rule: AcceptanceRule,
    /// Exploration trajectories (and so QA pairs) per document.
    pub explorations_per_doc: usize,
    pub sampling: SamplingParams,
}

pub const DEFAULT_MAX_DEPTH: usize = 20;

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_depth_by_source: BTreeMap::from([
                (SourceTag::Longdocurl, 20),
                (SourceTag::Mmdocrag, 20),
                (SourceTag::Dude, 15),
                (SourceTag::Cuad, 15),
                (SourceTag::Other, DEFAULT_MAX_DEPTH),
            ]),
            k_rejection_samples: 3,
            acceptance_rule: AcceptanceRule::Judge,
            explorations_per_doc: 1,
            sampling: SamplingParams::default(),
        }
    }
}

impl SynthesisConfig {
    pub fn max_depth(&self, tag: SourceTag) -> usize {
        self.max_depth_by_source
            .get(&tag)
            .or_else(|| self.max_depth_by_source.get(&SourceTag::Other))
            .copied()
            .unwrap_or(DEFAULT_MAX_DEPTH)
            .max(1)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SynthesisError {
    #[error("exploration trajectory has no steps")]
    EmptyTrajectory,
    #[error("synthesizer unavailable: {0}")]
    SynthesizerUnavailable(ClientError),
    #[error("teacher unavailable: {0}")]
    TeacherUnavailable(String),
}
