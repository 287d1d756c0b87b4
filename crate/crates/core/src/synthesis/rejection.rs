use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{AcceptanceRule, QAPair, SynthesisConfig, SynthesisError};
use crate::agent::{run_episode, AgentConfig, Termination, Trajectory};
use crate::clients::PolicyClient;
use crate::eval::{extract_answer_rule, judge_score, rule_score, GoldAnswer};
use crate::prompts::PromptSet;
use crate::toolkit::Toolkit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceMethod {
    Judge,
    Rule,
    /// Judge requested but unavailable or unreadable; the rule decided.
    RuleFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionAttempt {
    pub attempt: usize,
    pub answer: String,
    pub accepted: bool,
    pub method: AcceptanceMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub steps: usize,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionOutcome {
    pub attempts: Vec<RejectionAttempt>,
    /// The first accepted attempt number and its trajectory.
    pub accepted: Option<(usize, Trajectory)>,
}

fn rule_accepts(answer: &str, gold: &str) -> bool {
    rule_score(&extract_answer_rule(answer), &GoldAnswer::infer(gold)).correct
}

/// Runs up to `k` teacher episodes on the pair's question and keeps the
/// first whose answer is accepted.
pub fn reject_sample(
    qa: &QAPair,
    toolkit: &Toolkit<'_>,
    teacher: &dyn PolicyClient,
    judge: Option<&dyn PolicyClient>,
    cfg: &SynthesisConfig,
    agent: &AgentConfig,
    prompts: &PromptSet,
) -> Result<RejectionOutcome, SynthesisError> {
    let mut outcome = RejectionOutcome {
        attempts: Vec::new(),
        accepted: None,
    };
    for n in 1..=cfg.k_rejection_samples {
        let (trajectory, answer) = run_episode(&qa.question, toolkit, teacher, agent, prompts)
            .map_err(|e| SynthesisError::TeacherUnavailable(e.to_string()))?;
        let (accepted, method, verdict) = if answer.trim().is_empty() {
            (false, AcceptanceMethod::Rule, None)
        } else {
            match (cfg.acceptance_rule, judge) {
                (AcceptanceRule::ExactMatch, _) => (rule_accepts(&answer, &qa.answer), AcceptanceMethod::Rule, None),
                (AcceptanceRule::Judge, Some(j)) => {
                    match judge_score(&qa.question, &qa.answer, &answer, j, &prompts.judge) {
                        Ok(v) if v.parsed => (v.correct, AcceptanceMethod::Judge, Some(v.raw)),
                        Ok(v) => (rule_accepts(&answer, &qa.answer), AcceptanceMethod::RuleFallback, Some(v.raw)),
                        Err(e) => (
                            rule_accepts(&answer, &qa.answer),
                            AcceptanceMethod::RuleFallback,
                            Some(format!("judge error: {e}")),
                        ),
                    }
                }
                (AcceptanceRule::Judge, None) => {
                    (rule_accepts(&answer, &qa.answer), AcceptanceMethod::RuleFallback, None)
                }
            }
        };
        debug!(attempt = n, accepted, "rejection sample");
        outcome.attempts.push(RejectionAttempt {
            attempt: n,
            answer,
            accepted,
            method,
            verdict,
            steps: trajectory.steps.len(),
            terminated_by: trajectory.terminated_by,
        });
        if accepted {
            outcome.accepted = Some((n, trajectory));
            break;
        }
    }
    Ok(outcome)
}
