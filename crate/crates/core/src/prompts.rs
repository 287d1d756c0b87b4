//! Prompt templates. Built-in versions are compiled from `prompts/*.v1.txt`;
//! a directory of same-named files can override any of them.

use std::path::Path;

pub const AGENT_SYSTEM: &str = include_str!("../prompts/agent_system.v1.txt");
pub const FORCED_ANSWER: &str = include_str!("../prompts/forced_answer.v1.txt");
pub const MALFORMED_OUTPUT: &str = include_str!("../prompts/malformed_output.v1.txt");
pub const EXPLORE_SYSTEM: &str = include_str!("../prompts/explore_system.v1.txt");
pub const EXPLORE_KICKOFF: &str = include_str!("../prompts/explore_kickoff.v1.txt");
pub const DUPLICATE_CALL: &str = include_str!("../prompts/duplicate_call.v1.txt");
pub const SYNTHESIZE_SYSTEM: &str = include_str!("../prompts/synthesize_system.v1.txt");
pub const SYNTHESIZE_USER: &str = include_str!("../prompts/synthesize_user.v1.txt");
pub const SYNTHESIZE_RETRY: &str = include_str!("../prompts/synthesize_retry.v1.txt");
pub const JUDGE: &str = include_str!("../prompts/judge.v1.txt");
pub const EXTRACT: &str = include_str!("../prompts/extract.v1.txt");
pub const SUMMARIZER_SYSTEM: &str = include_str!("../prompts/summarizer_system.v1.txt");

/// Replaces each `{name}` placeholder in one pass, so substituted values are
/// never rescanned. Unknown placeholders are left as they are.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// User message sent to a summarizer endpoint for one read request.
pub fn render_summarize_request(goal: &str, text: &str, media: &[String], list_media: bool) -> String {
    let mut out = format!("User goal: {goal}\n\nEvidence:\n{text}");
    if list_media && !media.is_empty() {
        out.push_str("\n\nAttached media files:");
        for m in media {
            out.push_str("\n- ");
            out.push_str(m);
        }
    }
    out
}

/// The full set of templates used by the agent, the synthesis pipeline and
/// the judge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub agent_system: String,
    pub forced_answer: String,
    pub malformed_output: String,
    pub explore_system: String,
    pub explore_kickoff: String,
    pub duplicate_call: String,
    pub synthesize_system: String,
    pub synthesize_user: String,
    pub synthesize_retry: String,
    pub judge: String,
    pub extract: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            agent_system: AGENT_SYSTEM.into(),
            forced_answer: FORCED_ANSWER.into(),
            malformed_output: MALFORMED_OUTPUT.into(),
            explore_system: EXPLORE_SYSTEM.into(),
            explore_kickoff: EXPLORE_KICKOFF.into(),
            duplicate_call: DUPLICATE_CALL.into(),
            synthesize_system: SYNTHESIZE_SYSTEM.into(),
            synthesize_user: SYNTHESIZE_USER.into(),
            synthesize_retry: SYNTHESIZE_RETRY.into(),
            judge: JUDGE.into(),
            extract: EXTRACT.into(),
        }
    }
}

impl PromptSet {
    /// Built-ins overridden by any `<name>.v1.txt` found in `dir`.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = PromptSet::default();
        let slots: [(&str, &mut String); 11] = [
            ("agent_system", &mut set.agent_system),
            ("forced_answer", &mut set.forced_answer),
            ("malformed_output", &mut set.malformed_output),
            ("explore_system", &mut set.explore_system),
            ("explore_kickoff", &mut set.explore_kickoff),
            ("duplicate_call", &mut set.duplicate_call),
            ("synthesize_system", &mut set.synthesize_system),
            ("synthesize_user", &mut set.synthesize_user),
            ("synthesize_retry", &mut set.synthesize_retry),
            ("judge", &mut set.judge),
            ("extract", &mut set.extract),
        ];
        for (name, slot) in slots {
            let path = dir.join(format!("{name}.v1.txt"));
            match std::fs::read_to_string(&path) {
                Ok(text) => *slot = text.trim_end_matches('\n').to_string(),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e),
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        let out = fill("a {x} b {y} {z}", &[("x", "{y}"), ("y", "2")]);
        assert_eq!(out, "a {y} b 2 {z}");
    }

    #[test]
    fn system_template_has_both_slots() {
        assert!(AGENT_SYSTEM.starts_with("You are an expert research assistant"));
        assert!(AGENT_SYSTEM.contains("{document_outline}.\n"));
        assert!(AGENT_SYSTEM.ends_with("{question}."));
    }

    #[test]
    fn directory_overrides() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("judge.v1.txt"), "custom {question}\n").unwrap();
        let set = PromptSet::load_dir(dir.path()).unwrap();
        assert_eq!(set.judge, "custom {question}");
        assert_eq!(set.extract, EXTRACT);
    }
}
