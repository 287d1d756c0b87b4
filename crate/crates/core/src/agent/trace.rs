use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Step, Termination, Trajectory};
use crate::jsonl::{read_jsonl, write_line, JsonlError};

pub const TRACE_FORMAT: &str = "docseek-trace/1";

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceManifest {
    pub format: String,
    pub doc_id: String,
    pub question: String,
    pub policy: String,
    pub terminated_by: Termination,
    pub step_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    pub task_context: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceStep {
    index: usize,
    #[serde(flatten)]
    step: Step,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceLine {
    Manifest(TraceManifest),
    Step(TraceStep),
}

/// Writes a manifest line followed by one line per step.
pub fn write_trace(path: &Path, trajectory: &Trajectory, policy: &str) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    let manifest = TraceManifest {
        format: TRACE_FORMAT.to_string(),
        doc_id: trajectory.doc_id.clone(),
        question: trajectory.question.clone(),
        policy: policy.to_string(),
        terminated_by: trajectory.terminated_by,
        step_count: trajectory.steps.len(),
        answer: trajectory.final_answer().map(str::to_string),
        task_context: trajectory.task_context.clone(),
    };
    write_line(&mut out, &TraceLine::Manifest(manifest))?;
    for (i, step) in trajectory.steps.iter().enumerate() {
        write_line(
            &mut out,
            &TraceLine::Step(TraceStep {
                index: i + 1,
                step: step.clone(),
            }),
        )?;
    }
    out.flush()
}

pub fn read_trace(path: &Path) -> Result<(TraceManifest, Trajectory), JsonlError> {
    let lines: Vec<TraceLine> = read_jsonl(path)?;
    let bad = |line: usize, message: String| JsonlError::Record {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = lines.into_iter();
    let manifest = match lines.next() {
        Some(TraceLine::Manifest(m)) => m,
        _ => return Err(bad(1, "trace must start with a manifest record".into())),
    };
    if manifest.format != TRACE_FORMAT {
        return Err(bad(1, format!("unsupported trace format `{}`", manifest.format)));
    }
    let mut steps = Vec::new();
    for (i, line) in lines.enumerate() {
        match line {
            TraceLine::Step(s) if s.index == i + 1 => steps.push(s.step),
            TraceLine::Step(s) => return Err(bad(i + 2, format!("expected step {}, found {}", i + 1, s.index))),
            TraceLine::Manifest(_) => return Err(bad(i + 2, "second manifest record".into())),
        }
    }
    if steps.len() != manifest.step_count {
        return Err(bad(
            steps.len() + 1,
            format!("manifest lists {} steps, file has {}", manifest.step_count, steps.len()),
        ));
    }
    let trajectory = Trajectory {
        doc_id: manifest.doc_id.clone(),
        question: manifest.question.clone(),
        task_context: manifest.task_context.clone(),
        steps,
        terminated_by: manifest.terminated_by,
    };
    Ok((manifest, trajectory))
}
