//! Role-tagged training samples from accepted trajectories, with loss masks
//! that drop tool observations.

mod export;
mod mask;
mod tokenizer;

use serde::{Deserialize, Serialize};

use crate::agent::{render_action, render_thought, Action, Trajectory};

pub use export::{export_jsonl, import_jsonl, SftManifest, SftRecord, SFT_FORMAT};
pub use mask::{build_loss_mask, masked_nll, LossMask, SftError};
pub use tokenizer::{spans_tile, TokenizerAdapter, WhitespaceTokenizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentRole {
    Thought,
    Action,
    /// Text the model did not produce: tool output, repair notices and
    /// forced-answer prompts.
    Observation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub role: SegmentRole,
    pub text: String,
}

/// The task context plus the episode as an ordered list of segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub task_context: String,
    pub segments: Vec<Segment>,
}

impl TrainingSample {
    /// All segment texts joined, i.e. the episode after the task context.
    pub fn text(&self) -> String {
        self.segments.iter().map(|s| s.text.as_str()).collect()
    }
}

/// Splits a trajectory into segments: per step an optional forced prompt,
/// the thought, the action and the observation. Empty pieces are skipped.
pub fn build_sample(traj: &Trajectory) -> TrainingSample {
    let mut segments = Vec::new();
    let mut push = |role, text: String| {
        if !text.is_empty() {
            segments.push(Segment { role, text });
        }
    };
    for step in &traj.steps {
        if let Some(prompt) = &step.forced_prompt {
            push(SegmentRole::Observation, prompt.clone());
        }
        match step.action {
            Action::Invalid { .. } => push(SegmentRole::Action, step.raw.clone()),
            _ => {
                push(SegmentRole::Thought, render_thought(&step.thought));
                push(SegmentRole::Action, render_action(&step.action, &step.raw));
            }
        }
        if let Some(observation) = &step.observation {
            push(SegmentRole::Observation, observation.clone());
        }
    }
    TrainingSample {
        task_context: traj.task_context.clone(),
        segments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Step, Termination};
    use crate::toolkit::ToolCall;
    use serde_json::json;

    fn step(thought: &str, action: Action, observation: Option<&str>) -> Step {
        Step {
            thought: thought.into(),
            action,
            observation: observation.map(str::to_string),
            raw: String::new(),
            forced_prompt: None,
            warnings: vec![],
        }
    }

    fn traj(steps: Vec<Step>) -> Trajectory {
        Trajectory {
            doc_id: "d".into(),
            question: "q".into(),
            task_context: "tc".into(),
            steps,
            terminated_by: Termination::FinalAnswer,
        }
    }

    fn roles(s: &TrainingSample) -> Vec<SegmentRole> {
        s.segments.iter().map(|s| s.role).collect()
    }

    #[test]
    fn answer_only() {
        let s = build_sample(&traj(vec![step("t", Action::FinalAnswer { text: "42".into() }, None)]));
        assert_eq!(roles(&s), [SegmentRole::Thought, SegmentRole::Action]);
        assert_eq!(s.text(), "<think>\nt\n</think>\n\n42");
        assert_eq!(s.task_context, "tc");
    }

    #[test]
    fn forced_prompt_is_observation() {
        let call = Action::ToolCall(ToolCall::new("search", json!({"keywords": ["x"]})));
        let mut last = step("", Action::FinalAnswer { text: "a".into() }, None);
        last.forced_prompt = Some("Answer now.".into());
        let s = build_sample(&traj(vec![step("t", call, Some("obs")), last]));
        let (t, a, o) = (SegmentRole::Thought, SegmentRole::Action, SegmentRole::Observation);
        assert_eq!(roles(&s), [t, a, o, o, a]);
    }
}
