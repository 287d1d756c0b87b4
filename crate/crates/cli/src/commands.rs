use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use docseek_core::agent::{run_episode, write_trace, AgentError};
use docseek_core::clients::{
    ClientError, HttpClient, HttpSummarizer, PolicyClient, ReplayRecorder, ScriptedClient, ScriptedScenario,
    SummarizerClient,
};
use docseek_core::document::{
    build_outline, enrich_captions, ingest_parsed, parse_xml, serialize_xml, InputFormat, Outline,
};
use docseek_core::eval::{evaluate, pair_records, EvalOptions, GoldRecord, PredictionRecord};
use docseek_core::jsonl::{read_jsonl, JsonlError};
use docseek_core::sft::{export_jsonl, TokenizerAdapter, WhitespaceTokenizer};
use docseek_core::synthesis::{
    load_manifest, run_pipeline, write_outputs, ClientProvider, DocClients, PipelineError, ScenarioBundle,
};
use docseek_core::{PromptSet, Termination, TrainingTrajectory};
use serde::Serialize;
use tracing::{info, warn};

use crate::config::{Role, RunConfig};
use crate::{AskArgs, DocArgs, DocFormat, EvalArgs, ExportArgs, IngestArgs, SynthesizeArgs, TokenizerChoice};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Upstream(String),
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Partial(_) => 1,
            CliError::Usage(_) | CliError::Schema(_) => 2,
            CliError::Upstream(_) => 3,
        }
    }
}

impl From<JsonlError> for CliError {
    fn from(e: JsonlError) -> Self {
        match e {
            JsonlError::Io { .. } => CliError::Usage(e.to_string()),
            JsonlError::Record { .. } => CliError::Schema(e.to_string()),
        }
    }
}

fn write_failed(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

fn prompts(cfg: &RunConfig) -> Result<PromptSet, CliError> {
    match &cfg.paths.prompts_dir {
        Some(dir) => PromptSet::load_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display()))),
        None => Ok(PromptSet::default()),
    }
}

fn load_outline(cfg: &RunConfig, path: &Path, args: &DocArgs) -> Result<Outline, CliError> {
    let format = args.format.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some("xml") => DocFormat::OutlineXml,
            _ => DocFormat::MineruJson,
        }
    });
    let mut outline = match format {
        DocFormat::OutlineXml => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_xml(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?
        }
        DocFormat::MineruJson | DocFormat::NeutralJson => {
            let input = if format == DocFormat::MineruJson {
                InputFormat::MineruJson
            } else {
                InputFormat::NeutralJson
            };
            let doc = ingest_parsed(path, input).map_err(|e| match e {
                docseek_core::document::DocumentError::UnreadableFile { .. } => CliError::Usage(e.to_string()),
                other => CliError::Schema(other.to_string()),
            })?;
            build_outline(&doc, &cfg.outline)
        }
    };
    if let Some(id) = &args.doc_id {
        outline.doc_id = id.clone();
    }
    Ok(outline)
}

fn scripted(path: &Path, identity: &str) -> Result<ScriptedClient, CliError> {
    let scenario = if path.extension().is_some_and(|e| e == "jsonl") {
        ScriptedScenario::from_replay_log(path)
    } else {
        ScriptedScenario::from_file(path)
    }
    .map_err(CliError::Schema)?;
    Ok(ScriptedClient::new(identity, scenario))
}

fn http(cfg: &RunConfig, role: Role, record: Option<&Path>) -> Result<Option<HttpClient>, CliError> {
    let Some(endpoint) = cfg.endpoint(role) else {
        return Ok(None);
    };
    let mut client = HttpClient::new(endpoint.clone());
    if let Some(dir) = record {
        let path = dir.join(format!("{role}.replay.jsonl"));
        let recorder = ReplayRecorder::create(&path).map_err(|e| write_failed(&path, e))?;
        client = client.with_recorder(recorder);
    }
    Ok(Some(client))
}

fn policy_client(
    cfg: &RunConfig,
    role: Role,
    scenario: Option<&Path>,
    record: Option<&Path>,
) -> Result<Option<Arc<dyn PolicyClient>>, CliError> {
    if let Some(path) = scenario {
        return Ok(Some(Arc::new(scripted(path, role.as_str())?)));
    }
    Ok(http(cfg, role, record)?.map(|c| Arc::new(c) as Arc<dyn PolicyClient>))
}

fn summarizer_client(
    cfg: &RunConfig,
    scenario: Option<&Path>,
    record: Option<&Path>,
) -> Result<Option<Arc<dyn SummarizerClient>>, CliError> {
    if let Some(path) = scenario {
        return Ok(Some(Arc::new(scripted(path, "summarizer")?)));
    }
    Ok(http(cfg, Role::Summarizer, record)?.map(|c| Arc::new(HttpSummarizer::new(c)) as Arc<dyn SummarizerClient>))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| write_failed(path, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| write_failed(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| write_failed(path, e))
}

#[derive(Serialize)]
struct SectionEntry<'a> {
    section_id: &'a str,
    title: &'a str,
    level: u8,
    page_span: (u32, u32),
    elements: usize,
}

#[derive(Serialize)]
struct OutlineIndex<'a> {
    doc_id: &'a str,
    sections: Vec<SectionEntry<'a>>,
    element_index: &'a std::collections::BTreeMap<String, docseek_core::document::ElementLocator>,
    page_index: &'a std::collections::BTreeMap<u32, Vec<String>>,
    page_screenshots: &'a std::collections::BTreeMap<u32, String>,
}

pub fn ingest(cfg: &RunConfig, args: IngestArgs) -> Result<(), CliError> {
    let mut outline = load_outline(cfg, &args.path, &args.doc)?;
    if args.captions {
        let captioner = summarizer_client(cfg, args.summarizer.as_deref(), None)?
            .ok_or_else(|| CliError::Usage("--captions needs --summarizer or endpoints.summarizer".into()))?;
        let (enriched, report) = enrich_captions(outline, captioner.as_ref());
        outline = enriched;
        for (id, reason) in &report.failures {
            warn!(element = %id, %reason, "caption failed");
        }
        info!(captioned = report.captioned.len(), "captions added");
    }
    let out = args.out.unwrap_or_else(|| cfg.paths.output_dir.join("outlines"));
    std::fs::create_dir_all(&out).map_err(|e| write_failed(&out, e))?;
    let xml_path = out.join(format!("{}.outline.xml", outline.doc_id));
    std::fs::write(&xml_path, serialize_xml(&outline)).map_err(|e| write_failed(&xml_path, e))?;
    let index = OutlineIndex {
        doc_id: &outline.doc_id,
        sections: outline
            .sections()
            .map(|s| SectionEntry {
                section_id: &s.section_id,
                title: &s.title,
                level: s.level,
                page_span: s.page_span,
                elements: s.elements.len(),
            })
            .collect(),
        element_index: &outline.element_index,
        page_index: &outline.page_index,
        page_screenshots: &outline.page_screenshots,
    };
    let index_path = out.join(format!("{}.index.json", outline.doc_id));
    write_json(&index_path, &index)?;
    println!(
        "{}: {} sections, {} elements -> {}",
        outline.doc_id,
        index.sections.len(),
        outline.element_index.len(),
        xml_path.display()
    );
    Ok(())
}

pub fn ask(cfg: &RunConfig, args: AskArgs) -> Result<(), CliError> {
    let outline = load_outline(cfg, &args.doc, &args.doc_args)?;
    let prompts = prompts(cfg)?;
    let policy = policy_client(cfg, Role::Policy, args.policy.as_deref(), args.record.as_deref())?
        .ok_or_else(|| CliError::Usage("no policy: pass --policy or configure endpoints.policy".into()))?;
    let summarizer = match summarizer_client(cfg, args.summarizer.as_deref(), args.record.as_deref())? {
        Some(s) => s,
        None => {
            warn!("no summarizer configured; read calls will fail");
            Arc::new(ScriptedClient::ordered("unconfigured-summarizer", Vec::<String>::new()))
        }
    };
    let mut agent = cfg.agent.clone();
    if let Some(n) = args.max_steps {
        if n == 0 {
            return Err(CliError::Usage("--max-steps must be at least 1".into()));
        }
        agent.max_steps = n;
    }
    let toolkit = docseek_core::Toolkit::new(&outline, summarizer.as_ref(), &cfg.toolkit);
    let trace = args
        .trace
        .unwrap_or_else(|| cfg.paths.output_dir.join("traces").join(format!("{}.trace.jsonl", outline.doc_id)));

    match run_episode(&args.question, &toolkit, policy.as_ref(), &agent, &prompts) {
        Ok((traj, answer)) => {
            write_trace(&trace, &traj, &policy.identity()).map_err(|e| write_failed(&trace, e))?;
            eprintln!("trace: {} ({} steps, {:?})", trace.display(), traj.steps.len(), traj.terminated_by);
            if answer.trim().is_empty() {
                return Err(CliError::Partial(format!(
                    "no answer after {} steps ({:?})",
                    traj.steps.len(),
                    traj.terminated_by
                )));
            }
            if traj.terminated_by != Termination::FinalAnswer {
                eprintln!("note: answer was forced ({:?})", traj.terminated_by);
            }
            println!("{answer}");
            Ok(())
        }
        Err(e @ AgentError::InvalidConfig) => Err(CliError::Usage(e.to_string())),
        Err(e) => {
            if let Some(partial) = e.partial() {
                write_trace(&trace, partial, &policy.identity()).map_err(|e| write_failed(&trace, e))?;
            }
            Err(CliError::Upstream(format!("{e}; partial trace at {}", trace.display())))
        }
    }
}

/// Same endpoints for every document.
struct LiveProvider(DocClients);

impl ClientProvider for LiveProvider {
    fn clients_for(&self, _doc_id: &str) -> Result<DocClients, ClientError> {
        Ok(self.0.clone())
    }
}

struct NoClients;

impl ClientProvider for NoClients {
    fn clients_for(&self, doc_id: &str) -> Result<DocClients, ClientError> {
        Err(ClientError::Unavailable(format!("no clients configured for {doc_id}")))
    }
}

fn live_provider(cfg: &RunConfig) -> Result<LiveProvider, CliError> {
    let need = |role: Role| {
        policy_client(cfg, role, None, None)?
            .ok_or_else(|| CliError::Usage(format!("no endpoint for {role}: configure endpoints.{role} or endpoints.policy")))
    };
    let summarizer = summarizer_client(cfg, None, None)?
        .ok_or_else(|| CliError::Usage("no endpoint for summarizer: configure endpoints.summarizer".into()))?;
    let judge = policy_client(cfg, Role::Judge, None, None)?;
    if judge.is_none() {
        warn!("no judge endpoint; acceptance falls back to rule matching");
    }
    Ok(LiveProvider(DocClients {
        explorer: need(Role::Explorer)?,
        synthesizer: need(Role::Synthesizer)?,
        teacher: need(Role::Teacher)?,
        judge,
        summarizer,
    }))
}

pub fn synthesize(cfg: &RunConfig, args: SynthesizeArgs) -> Result<(), CliError> {
    let manifest = args
        .manifest
        .or_else(|| cfg.paths.corpus_manifest.clone())
        .ok_or_else(|| CliError::Usage("no manifest: pass one or set paths.corpus_manifest".into()))?;
    let entries = load_manifest(&manifest).map_err(|e| match e {
        PipelineError::Io { .. } => CliError::Usage(e.to_string()),
        PipelineError::Schema { .. } => CliError::Schema(e.to_string()),
    })?;
    if let Some(missing) = entries.iter().find(|e| !e.path.is_file()) {
        return Err(CliError::Usage(format!("document not found: {}", missing.path.display())));
    }
    let provider: Box<dyn ClientProvider> = match &args.scenarios {
        Some(path) => Box::new(ScenarioBundle::from_file(path).map_err(CliError::Schema)?),
        None if entries.is_empty() => Box::new(NoClients),
        None => Box::new(live_provider(cfg)?),
    };
    let prompts = prompts(cfg)?;
    let output = run_pipeline(&entries, provider.as_ref(), &cfg.pipeline(args.parallel as usize), &prompts);
    let out = args.out.unwrap_or_else(|| cfg.paths.output_dir.join("synthesis"));
    write_outputs(&out, &output).map_err(|e| write_failed(&out, e))?;

    let r = &output.report;
    println!(
        "documents {} explored {} synthesized {} validated {} accepted {} failed {}",
        r.documents, r.explored, r.synthesized, r.validated, r.accepted, r.failed_documents
    );
    for doc in r.per_document.iter().filter(|d| d.error.is_some()) {
        eprintln!("{}: {}", doc.doc_id, doc.error.as_deref().unwrap_or_default());
    }
    if r.documents > 0 && r.failed_documents == r.documents {
        return Err(CliError::Upstream("every document failed".into()));
    }
    Ok(())
}

pub fn export_sft(args: ExportArgs) -> Result<(), CliError> {
    let dataset: Vec<TrainingTrajectory> = read_jsonl(&args.dataset)?;
    let tok: Option<&dyn TokenizerAdapter> = match args.tokenizer {
        TokenizerChoice::Whitespace => Some(&WhitespaceTokenizer),
        TokenizerChoice::None => None,
    };
    let records = export_jsonl(&dataset, tok, &args.out).map_err(|e| write_failed(&args.out, e))?;
    println!("{} samples -> {}", records.len(), args.out.display());
    Ok(())
}

pub fn eval(cfg: &RunConfig, args: EvalArgs) -> Result<(), CliError> {
    let golds: Vec<GoldRecord> = read_jsonl(&args.gold)?;
    let preds: Vec<PredictionRecord> = read_jsonl(&args.predictions)?;
    let inputs = pair_records(&golds, &preds).map_err(|(line, msg)| {
        CliError::Schema(format!("{}:{line}: {msg}", args.gold.display()))
    })?;
    let judge = match (&args.judge, args.judge_endpoint) {
        (Some(path), _) => Some(Arc::new(scripted(path, "judge")?) as Arc<dyn PolicyClient>),
        (None, true) => Some(
            policy_client(cfg, Role::Judge, None, None)?
                .ok_or_else(|| CliError::Usage("--judge-endpoint needs endpoints.judge".into()))?,
        ),
        (None, false) => None,
    };
    let extractor = match (&args.extractor, args.extractor_endpoint) {
        (Some(path), _) => Some(Arc::new(scripted(path, "extractor")?) as Arc<dyn PolicyClient>),
        (None, true) => Some(
            policy_client(cfg, Role::Extractor, None, None)?
                .ok_or_else(|| CliError::Usage("--extractor-endpoint needs endpoints.extractor".into()))?,
        ),
        (None, false) => None,
    };
    let prompts = prompts(cfg)?;
    let report = evaluate(
        &inputs,
        EvalOptions {
            extractor: extractor.as_deref(),
            judge: judge.as_deref(),
            prompts: &prompts,
        },
    )
    .map_err(|e| CliError::Upstream(e.to_string()))?;

    let a = &report.aggregate;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "count {}", a.count);
    let _ = writeln!(stdout, "acc {:.4}", a.acc);
    let _ = writeln!(stdout, "f1 {:.4}", a.f1);
    if let Some(lasj) = a.lasj {
        let _ = writeln!(stdout, "lasj {lasj:.4}");
    }
    if a.judge_unparsed > 0 {
        eprintln!("warning: {} judge replies could not be parsed and count as incorrect", a.judge_unparsed);
    }
    if a.empty {
        eprintln!("warning: no predictions; all scores are zero");
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(())
}
