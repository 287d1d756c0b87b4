use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use docseek_core::clients::EndpointConfig;
use docseek_core::document::OutlineOptions;
use docseek_core::synthesis::{PipelineConfig, SynthesisConfig};
use docseek_core::{AgentConfig, ToolkitConfig};
use serde::{Deserialize, Serialize};

/// Model roles a run can talk to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Policy,
    Summarizer,
    Explorer,
    Synthesizer,
    Teacher,
    Judge,
    Extractor,
}

impl Role {
    pub const ALL: [Role; 7] = [
        Role::Policy,
        Role::Summarizer,
        Role::Explorer,
        Role::Synthesizer,
        Role::Teacher,
        Role::Judge,
        Role::Extractor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Policy => "policy",
            Role::Summarizer => "summarizer",
            Role::Explorer => "explorer",
            Role::Synthesizer => "synthesizer",
            Role::Teacher => "teacher",
            Role::Judge => "judge",
            Role::Extractor => "extractor",
        }
    }

    fn env_prefix(self) -> String {
        format!("DOCSEEK_{}", self.as_str().to_uppercase())
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown role `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub output_dir: PathBuf,
    pub corpus_manifest: Option<PathBuf>,
    /// Directory of `*.v1.txt` files overriding built-in prompts.
    pub prompts_dir: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            output_dir: PathBuf::from("out"),
            corpus_manifest: None,
            prompts_dir: None,
        }
    }
}

/// Whole-run settings, read from TOML.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub endpoints: BTreeMap<Role, EndpointConfig>,
    pub agent: AgentConfig,
    pub toolkit: ToolkitConfig,
    pub outline: OutlineOptions,
    pub synthesis: SynthesisConfig,
    pub paths: Paths,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                toml::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
            }
            None => RunConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok());
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `DOCSEEK_<ROLE>_BASE_URL`, `_MODEL` and `_API_KEY`. A role
    /// missing from the file is created once both URL and model are set.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        for role in Role::ALL {
            let prefix = role.env_prefix();
            let url = var(&format!("{prefix}_BASE_URL"));
            let model = var(&format!("{prefix}_MODEL"));
            let key = var(&format!("{prefix}_API_KEY"));
            let endpoint = match (self.endpoints.get_mut(&role), &url, &model) {
                (Some(e), _, _) => e,
                (None, Some(u), Some(m)) => self.endpoints.entry(role).or_insert(EndpointConfig::new(u, m)),
                _ => continue,
            };
            if let Some(u) = url {
                endpoint.base_url = u;
            }
            if let Some(m) = model {
                endpoint.model = m;
            }
            if key.is_some() {
                endpoint.api_key = key;
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (role, e) in &self.endpoints {
            if !(e.base_url.starts_with("http://") || e.base_url.starts_with("https://")) {
                return Err(format!("endpoints.{role}.base_url must be an http(s) URL"));
            }
            if e.model.trim().is_empty() {
                return Err(format!("endpoints.{role}.model is empty"));
            }
            if e.max_attempts == 0 {
                return Err(format!("endpoints.{role}.max_attempts must be at least 1"));
            }
        }
        if self.agent.max_steps == 0 {
            return Err("agent.max_steps must be at least 1".into());
        }
        if self.toolkit.hit_cap == 0 {
            return Err("toolkit.hit_cap must be at least 1".into());
        }
        if self.synthesis.k_rejection_samples == 0 {
            return Err("synthesis.k_rejection_samples must be at least 1".into());
        }
        if self.synthesis.explorations_per_doc == 0 {
            return Err("synthesis.explorations_per_doc must be at least 1".into());
        }
        if self.synthesis.max_depth_by_source.values().any(|&d| d == 0) {
            return Err("synthesis.max_depth_by_source values must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.outline.gap_ratio) || self.outline.max_levels == 0 {
            return Err("outline.gap_ratio must lie in [0, 1] and outline.max_levels be at least 1".into());
        }
        Ok(())
    }

    /// Endpoint for `role`, falling back to the policy endpoint for the
    /// roles that are policies too.
    pub fn endpoint(&self, role: Role) -> Option<&EndpointConfig> {
        self.endpoints.get(&role).or(match role {
            Role::Explorer | Role::Synthesizer | Role::Teacher => self.endpoints.get(&Role::Policy),
            _ => None,
        })
    }

    pub fn pipeline(&self, parallel: usize) -> PipelineConfig {
        PipelineConfig {
            synthesis: self.synthesis.clone(),
            agent: self.agent.clone(),
            toolkit: self.toolkit.clone(),
            outline: self.outline.clone(),
            parallel,
        }
    }
}
