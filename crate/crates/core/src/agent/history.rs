use serde_json::json;

use super::{Action, Step};
use crate::clients::ChatMessage;
use crate::prompts::fill;

/// The system message of an episode: the agent template with the outline
/// and question filled in.
pub fn task_context(template: &str, outline_xml: &str, question: &str) -> String {
    fill(template, &[("document_outline", outline_xml), ("question", question)])
}

pub fn render_thought(thought: &str) -> String {
    if thought.is_empty() {
        String::new()
    } else {
        format!("<think>\n{thought}\n</think>\n\n")
    }
}

/// Canonical text of an action. Invalid turns keep the model's raw output.
pub fn render_action(action: &Action, raw: &str) -> String {
    match action {
        Action::ToolCall(call) => {
            let payload = json!({"name": call.name, "arguments": call.arguments});
            format!("<tool_call>\n{payload}\n</tool_call>")
        }
        Action::FinalAnswer { text } => text.clone(),
        Action::Invalid { .. } => raw.to_string(),
    }
}

/// Assistant message content for one step.
pub fn assistant_content(step: &Step) -> String {
    match step.action {
        Action::Invalid { .. } => step.raw.clone(),
        _ => format!("{}{}", render_thought(&step.thought), render_action(&step.action, &step.raw)),
    }
}

pub fn call_id(step_index: usize) -> String {
    format!("call_{step_index}")
}

/// Chat transcript for the next policy call. Tool observations go back as
/// tool messages; repair notices and forced-answer prompts as user messages.
pub fn format_history(task_context: &str, steps: &[Step]) -> Vec<ChatMessage> {
    let mut messages = vec![ChatMessage::system(task_context)];
    for (i, step) in steps.iter().enumerate() {
        if let Some(prompt) = &step.forced_prompt {
            messages.push(ChatMessage::user(prompt.clone()));
        }
        messages.push(ChatMessage::assistant(assistant_content(step)));
        if let Some(observation) = &step.observation {
            match step.action {
                Action::ToolCall(_) => messages.push(ChatMessage::tool(observation.clone(), call_id(i + 1))),
                _ => messages.push(ChatMessage::user(observation.clone())),
            }
        }
    }
    messages
}
