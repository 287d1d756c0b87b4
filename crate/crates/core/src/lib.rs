//! Document-grounded agentic question answering: outlines, tools, the agent
//! loop, training-data synthesis, SFT export and evaluation.

pub mod agent;
pub mod clients;
pub mod document;
pub mod eval;
pub mod jsonl;
pub mod prompts;
pub mod sft;
pub mod synthesis;
pub mod toolkit;

pub use agent::{Action, AgentConfig, Step, Termination, Trajectory};
pub use clients::{ChatMessage, ClientError, PolicyClient, SamplingParams, SummarizerClient};
pub use document::{Element, ElementKind, Outline, ParsedDocument, SectionNode};
pub use eval::{GoldAnswer, ScoreReport};
pub use prompts::PromptSet;
pub use sft::{LossMask, TrainingSample};
pub use synthesis::{QAPair, SourceTag, TrainingTrajectory};
pub use toolkit::{ToolCall, Toolkit, ToolkitConfig};
