use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use super::explore::{explore, ExplorationTrajectory};
use super::rejection::{reject_sample, RejectionAttempt};
use super::synthesize::{synthesize, SynthesisAttempt};
use super::{QAPair, SourceTag, SynthesisConfig};
use crate::agent::{AgentConfig, Trajectory};
use crate::clients::{ClientError, PolicyClient, SummarizerClient};
use crate::document::{build_outline, doc_id_from_path, ingest_parsed, InputFormat, OutlineOptions};
use crate::jsonl::write_jsonl;
use crate::prompts::PromptSet;
use crate::toolkit::{Toolkit, ToolkitConfig};

/// One document of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub source_tag: SourceTag,
    #[serde(default)]
    pub format: InputFormat,
    /// Defaults to the id found in the layout file or its file name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("invalid manifest {path}: {message}")]
    Schema { path: String, message: String },
}

/// Reads a manifest (a JSON list of entries) and resolves relative document
/// paths against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<CorpusEntry>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut entries: Vec<CorpusEntry> = serde_json::from_str(&text).map_err(|e| PipelineError::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    for entry in &mut entries {
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    Ok(entries)
}

/// The model endpoints used for one document.
#[derive(Clone)]
pub struct DocClients {
    pub explorer: Arc<dyn PolicyClient>,
    pub synthesizer: Arc<dyn PolicyClient>,
    pub teacher: Arc<dyn PolicyClient>,
    pub judge: Option<Arc<dyn PolicyClient>>,
    pub summarizer: Arc<dyn SummarizerClient>,
}

/// Hands out clients per document, so scripted runs can give every document
/// its own scenario and live runs can share endpoints.
pub trait ClientProvider: Send + Sync {
    fn clients_for(&self, doc_id: &str) -> Result<DocClients, ClientError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub synthesis: SynthesisConfig,
    pub agent: AgentConfig,
    pub toolkit: ToolkitConfig,
    pub outline: OutlineOptions,
    /// Documents processed at once.
    pub parallel: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            synthesis: SynthesisConfig::default(),
            agent: AgentConfig::default(),
            toolkit: ToolkitConfig::default(),
            outline: OutlineOptions::default(),
            parallel: 1,
        }
    }
}

/// An accepted teacher trajectory with links back to its pair and evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrajectory {
    pub id: String,
    pub doc_id: String,
    pub source_tag: SourceTag,
    pub qa_id: String,
    pub exploration_id: String,
    pub qa: QAPair,
    pub attempt: usize,
    pub trajectory: Trajectory,
}

/// Audit record for one synthesis slot, kept whether or not it succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub id: String,
    pub doc_id: String,
    pub exploration_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa: Option<QAPair>,
    pub synthesis: Vec<SynthesisAttempt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejection: Vec<RejectionAttempt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocReport {
    pub doc_id: String,
    pub source_tag: SourceTag,
    pub max_depth: usize,
    pub explored: usize,
    pub synthesized: usize,
    pub validated: usize,
    pub accepted: usize,
    pub exploration_depths: Vec<usize>,
    pub accepted_attempts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageReport {
    pub documents: usize,
    pub failed_documents: usize,
    pub explored: usize,
    pub synthesized: usize,
    pub validated: usize,
    pub accepted: usize,
    pub per_document: Vec<DocReport>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOutput {
    pub dataset: Vec<TrainingTrajectory>,
    pub explorations: Vec<ExplorationTrajectory>,
    pub qa: Vec<QaRecord>,
    pub report: StageReport,
}

fn process_document(
    entry: &CorpusEntry,
    provider: &dyn ClientProvider,
    cfg: &PipelineConfig,
    prompts: &PromptSet,
) -> PipelineOutput {
    let fallback_id = entry.doc_id.clone().unwrap_or_else(|| doc_id_from_path(&entry.path));
    let mut report = DocReport {
        doc_id: fallback_id,
        source_tag: entry.source_tag,
        max_depth: cfg.synthesis.max_depth(entry.source_tag),
        explored: 0,
        synthesized: 0,
        validated: 0,
        accepted: 0,
        exploration_depths: Vec::new(),
        accepted_attempts: Vec::new(),
        error: None,
    };
    let mut out = PipelineOutput::default();
    let finish = |mut out: PipelineOutput, report: DocReport| {
        out.report.per_document.push(report);
        out
    };

    let parsed = match ingest_parsed(&entry.path, entry.format) {
        Ok(p) => p,
        Err(e) => {
            report.error = Some(e.to_string());
            return finish(out, report);
        }
    };
    let mut outline = build_outline(&parsed, &cfg.outline);
    if let Some(id) = &entry.doc_id {
        outline.doc_id = id.clone();
    }
    report.doc_id = outline.doc_id.clone();
    let doc_id = outline.doc_id.clone();

    let clients = match provider.clients_for(&doc_id) {
        Ok(c) => c,
        Err(e) => {
            report.error = Some(e.to_string());
            return finish(out, report);
        }
    };
    let toolkit = Toolkit::new(&outline, clients.summarizer.as_ref(), &cfg.toolkit);

    for n in 1..=cfg.synthesis.explorations_per_doc.max(1) {
        let xi = explore(
            &format!("{doc_id}/xi-{n}"),
            &toolkit,
            clients.explorer.as_ref(),
            entry.source_tag,
            &cfg.synthesis,
            prompts,
        );
        if let Some(e) = &xi.error {
            report.error = Some(format!("explorer: {e}"));
        }
        let stop = xi.steps.is_empty();
        if !stop {
            report.explored += 1;
            report.exploration_depths.push(xi.steps.len());
        }
        out.explorations.push(xi.clone());
        if stop || xi.error.is_some() {
            break;
        }

        let qa_id = format!("{doc_id}/qa-{n}");
        let outcome = match synthesize(&xi, &outline, clients.synthesizer.as_ref(), &cfg.synthesis.sampling, prompts) {
            Ok(o) => o,
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        };
        let mut record = QaRecord {
            id: qa_id.clone(),
            doc_id: doc_id.clone(),
            exploration_id: xi.id.clone(),
            qa: outcome.qa.clone(),
            synthesis: outcome.attempts.clone(),
            rejection: Vec::new(),
            trajectory_id: None,
        };
        if outcome.produced_object() {
            report.synthesized += 1;
        }
        let Some(qa) = outcome.qa else {
            out.qa.push(record);
            continue;
        };
        report.validated += 1;

        let rejection = reject_sample(
            &qa,
            &toolkit,
            clients.teacher.as_ref(),
            clients.judge.as_deref(),
            &cfg.synthesis,
            &cfg.agent,
            prompts,
        );
        match rejection {
            Ok(r) => {
                record.rejection = r.attempts;
                if let Some((attempt, trajectory)) = r.accepted {
                    let id = format!("{doc_id}/traj-{n}");
                    record.trajectory_id = Some(id.clone());
                    report.accepted += 1;
                    report.accepted_attempts.push(attempt);
                    out.dataset.push(TrainingTrajectory {
                        id,
                        doc_id: doc_id.clone(),
                        source_tag: entry.source_tag,
                        qa_id,
                        exploration_id: xi.id.clone(),
                        qa,
                        attempt,
                        trajectory,
                    });
                }
                out.qa.push(record);
            }
            Err(e) => {
                out.qa.push(record);
                report.error = Some(e.to_string());
                break;
            }
        }
    }
    finish(out, report)
}

/// Runs every manifest document through explore, synthesize, validate and
/// rejection sampling. Documents run concurrently; outputs keep manifest
/// order. A failing document is reported and does not stop the others.
pub fn run_pipeline(
    entries: &[CorpusEntry],
    provider: &dyn ClientProvider,
    cfg: &PipelineConfig,
    prompts: &PromptSet,
) -> PipelineOutput {
    let work = |entry: &CorpusEntry| process_document(entry, provider, cfg, prompts);
    let parts: Vec<PipelineOutput> = match rayon::ThreadPoolBuilder::new().num_threads(cfg.parallel.max(1)).build() {
        Ok(pool) => pool.install(|| entries.par_iter().map(work).collect()),
        Err(e) => {
            warn!(error = %e, "thread pool unavailable, running sequentially");
            entries.iter().map(work).collect()
        }
    };

    let mut all = PipelineOutput::default();
    for part in parts {
        all.dataset.extend(part.dataset);
        all.explorations.extend(part.explorations);
        all.qa.extend(part.qa);
        for doc in part.report.per_document {
            let r = &mut all.report;
            r.documents += 1;
            r.failed_documents += usize::from(doc.error.is_some());
            r.explored += doc.explored;
            r.synthesized += doc.synthesized;
            r.validated += doc.validated;
            r.accepted += doc.accepted;
            r.per_document.push(doc);
        }
    }
    info!(
        documents = all.report.documents,
        accepted = all.report.accepted,
        "synthesis finished"
    );
    all
}

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const EXPLORATIONS_FILE: &str = "explorations.jsonl";
pub const QA_FILE: &str = "qa.jsonl";
pub const REPORT_FILE: &str = "report.json";

/// Writes `dataset.jsonl`, `explorations.jsonl`, `qa.jsonl` and
/// `report.json` into `dir`.
pub fn write_outputs(dir: &Path, output: &PipelineOutput) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_jsonl(&dir.join(DATASET_FILE), &output.dataset)?;
    write_jsonl(&dir.join(EXPLORATIONS_FILE), &output.explorations)?;
    write_jsonl(&dir.join(QA_FILE), &output.qa)?;
    let mut report = io::BufWriter::new(std::fs::File::create(dir.join(REPORT_FILE))?);
    serde_json::to_writer_pretty(&mut report, &output.report)?;
    report.write_all(b"\n")?;
    report.flush()
}
