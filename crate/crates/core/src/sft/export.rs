use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_loss_mask, build_sample, LossMask, TokenizerAdapter, TrainingSample};
use crate::agent::format_history;
use crate::clients::ChatMessage;
use crate::jsonl::{read_jsonl, write_line, JsonlError};
use crate::synthesis::{QAPair, SourceTag, TrainingTrajectory};

pub const SFT_FORMAT: &str = "docseek-sft/1";

/// First line of an export file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftManifest {
    pub format: String,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
}

/// One training sample: the chat transcript for chat-style trainers, the
/// role-tagged segments, and the token mask when a tokenizer was given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub id: String,
    pub doc_id: String,
    pub source_tag: SourceTag,
    pub qa: QAPair,
    pub messages: Vec<ChatMessage>,
    #[serde(flatten)]
    pub sample: TrainingSample,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<LossMask>,
}

impl SftRecord {
    pub fn from_trajectory(t: &TrainingTrajectory, tok: Option<&dyn TokenizerAdapter>) -> Self {
        let sample = build_sample(&t.trajectory);
        SftRecord {
            id: t.id.clone(),
            doc_id: t.doc_id.clone(),
            source_tag: t.source_tag,
            qa: t.qa.clone(),
            messages: format_history(&t.trajectory.task_context, &t.trajectory.steps),
            mask: tok.map(|tok| build_loss_mask(&sample, tok)),
            sample,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum SftLine {
    Manifest(SftManifest),
    Sample(Box<SftRecord>),
}

/// Writes a manifest line and one sample line per trajectory.
pub fn export_jsonl(
    dataset: &[TrainingTrajectory],
    tok: Option<&dyn TokenizerAdapter>,
    path: &Path,
) -> io::Result<Vec<SftRecord>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let records: Vec<SftRecord> = dataset.iter().map(|t| SftRecord::from_trajectory(t, tok)).collect();
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    let manifest = SftManifest {
        format: SFT_FORMAT.to_string(),
        count: records.len(),
        tokenizer: tok.map(|t| t.name().to_string()),
    };
    write_line(&mut out, &SftLine::Manifest(manifest))?;
    for record in &records {
        write_line(&mut out, &SftLine::Sample(Box::new(record.clone())))?;
    }
    out.flush()?;
    Ok(records)
}

pub fn import_jsonl(path: &Path) -> Result<(SftManifest, Vec<SftRecord>), JsonlError> {
    let bad = |line: usize, message: String| JsonlError::Record {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = read_jsonl::<SftLine>(path)?.into_iter();
    let manifest = match lines.next() {
        Some(SftLine::Manifest(m)) if m.format == SFT_FORMAT => m,
        Some(SftLine::Manifest(m)) => return Err(bad(1, format!("unsupported format `{}`", m.format))),
        _ => return Err(bad(1, "missing manifest line".into())),
    };
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        match line {
            SftLine::Sample(r) => {
                if let Some(mask) = &r.mask {
                    if mask.kept_count != mask.token_flags.iter().filter(|&&f| f == 1).count()
                        || mask.token_flags.iter().any(|&f| f > 1)
                    {
                        return Err(bad(i + 2, "inconsistent mask".into()));
                    }
                }
                records.push(*r);
            }
            SftLine::Manifest(_) => return Err(bad(i + 2, "second manifest line".into())),
        }
    }
    if records.len() != manifest.count {
        return Err(bad(1, format!("manifest count {} but {} samples", manifest.count, records.len())));
    }
    Ok((manifest, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Action, Step, Termination, Trajectory};
    use crate::sft::WhitespaceTokenizer;
    use crate::toolkit::ToolCall;
    use serde_json::json;

    fn training(n: usize) -> TrainingTrajectory {
        let steps = vec![
            Step {
                thought: "look".into(),
                action: Action::ToolCall(ToolCall::new("search", json!({"keywords": ["rent"]}))),
                observation: Some("A Document search found 1 results".into()),
                raw: String::new(),
                forced_prompt: None,
                warnings: vec![],
            },
            Step {
                thought: "done".into(),
                action: Action::FinalAnswer { text: "$100".into() },
                observation: None,
                raw: String::new(),
                forced_prompt: None,
                warnings: vec![],
            },
        ];
        TrainingTrajectory {
            id: format!("d/traj-{n}"),
            doc_id: "d".into(),
            source_tag: SourceTag::Cuad,
            qa_id: format!("d/qa-{n}"),
            exploration_id: format!("d/xi-{n}"),
            qa: QAPair {
                question: "Rent?".into(),
                answer: "$100".into(),
            },
            attempt: 1,
            trajectory: Trajectory {
                doc_id: "d".into(),
                question: "Rent?".into(),
                task_context: "system".into(),
                steps,
                terminated_by: Termination::FinalAnswer,
            },
        }
    }

    #[test]
    fn empty_dataset_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sft.jsonl");
        export_jsonl(&[], None, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "{\"record\":\"manifest\",\"format\":\"docseek-sft/1\",\"count\":0}\n");
        let (m, records) = import_jsonl(&path).unwrap();
        assert_eq!(m.count, 0);
        assert!(records.is_empty());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sft.jsonl");
        let written = export_jsonl(&[training(1), training(2)], Some(&WhitespaceTokenizer), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        let (m, read) = import_jsonl(&path).unwrap();
        assert_eq!(m.tokenizer.as_deref(), Some("whitespace"));
        assert_eq!(read, written);
        let r = &read[0];
        assert_eq!(r.messages.len(), 4);
        let mask = r.mask.as_ref().unwrap();
        assert_eq!(mask.len(), 16);
        assert_eq!(mask.kept_count, 10);
    }

    #[test]
    fn import_rejects_bad_mask() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sft.jsonl");
        export_jsonl(&[training(1)], Some(&WhitespaceTokenizer), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap().replace("\"kept_count\":10", "\"kept_count\":9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(import_jsonl(&path), Err(JsonlError::Record { line: 2, .. })));
    }
}
