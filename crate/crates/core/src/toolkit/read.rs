use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ToolError;
use crate::clients::{SummarizeRequest, SummarizerClient};
use crate::document::{Element, ElementKind, Outline, SectionNode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadResult {
    pub goal: String,
    pub sections_read: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown_ids: Vec<String>,
    pub evidence: String,
    pub media: Vec<String>,
    pub summary: String,
    /// Set when the summarizer failed and `summary` is a failure notice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summarizer_error: Option<String>,
}

fn render_element(element: &Element) -> Vec<String> {
    let text = element.text.trim();
    let mut lines = Vec::new();
    match element.kind {
        ElementKind::Title => lines.push(format!("Heading: {text}")),
        ElementKind::Paragraph => lines.push(format!("Paragraph: {text}")),
        ElementKind::List => lines.push(format!("List: {text}")),
        ElementKind::Table => {
            let body = element.table_html.as_deref().unwrap_or(text);
            lines.push(format!("<HTML_Table>\n{}\n</HTML_Table>", body.trim()));
        }
        ElementKind::TableCaption | ElementKind::ImageCaption => lines.push(format!("Caption: {text}")),
        ElementKind::TableFootnote | ElementKind::ImageFootnote | ElementKind::Footnote => {
            lines.push(format!("Footnote: {text}"))
        }
        ElementKind::Image | ElementKind::Chart => {
            let label = if element.kind == ElementKind::Image { "Image" } else { "Chart" };
            let media = element.media_ref.as_deref().unwrap_or(&element.element_id);
            lines.push(format!("{label}: {media}"));
            if !text.is_empty() {
                lines.push(format!("Text in {}: {text}", label.to_lowercase()));
            }
        }
        ElementKind::Formula => lines.push(format!("Formula: {text}")),
        ElementKind::Code => lines.push(format!("Code: {text}")),
        ElementKind::TocEntry => lines.push(format!("Contents entry: {text}")),
        ElementKind::Header | ElementKind::Footer | ElementKind::PageNumber => {}
    }
    if let Some(caption) = &element.generated_caption {
        lines.push(format!("Generated caption: {caption}"));
    }
    lines
}

fn collect(outline: &Outline, node: &SectionNode, lines: &mut Vec<String>, media: &mut Vec<String>) {
    for section in node.walk() {
        for element in &section.elements {
            lines.extend(render_element(element));
            if element.kind.is_visual() {
                if let Some(m) = &element.media_ref {
                    if !media.contains(m) {
                        media.push(m.clone());
                    }
                }
            }
        }
    }
    for page in node.page_span.0..=node.page_span.1 {
        if let Some(shot) = outline.page_screenshots.get(&page) {
            if !media.contains(shot) {
                media.push(shot.clone());
            }
        }
    }
}

/// Gathers the content of the requested sections (with descendants), hands
/// it to the summarizer with `goal`, and returns evidence plus summary.
/// Unknown ids are reported; known ones are still read.
pub fn read(
    outline: &Outline,
    section_ids: &[String],
    goal: &str,
    summarizer: &dyn SummarizerClient,
) -> Result<ReadResult, ToolError> {
    if goal.trim().is_empty() {
        return Err(ToolError::EmptyGoal);
    }
    let mut seen = BTreeSet::new();
    let mut known = Vec::new();
    let mut unknown = Vec::new();
    for id in section_ids {
        let id = id.trim();
        if !seen.insert(id.to_string()) {
            continue;
        }
        match outline.section(id) {
            Some(node) => known.push(node),
            None => unknown.push(id.to_string()),
        }
    }
    if known.is_empty() {
        return Err(ToolError::UnknownSectionId {
            unknown,
            processed: Vec::new(),
        });
    }

    let mut lines = Vec::new();
    let mut media = Vec::new();
    let multi = known.len() > 1;
    for node in &known {
        if multi {
            lines.push(format!("[section_id={}] {}", node.section_id, node.title));
        }
        collect(outline, node, &mut lines, &mut media);
    }
    let evidence = lines.join("\n");

    let request = SummarizeRequest {
        goal: goal.to_string(),
        text: evidence.clone(),
        media: media.clone(),
    };
    let (summary, summarizer_error) = match summarizer.summarize(&request) {
        Ok(text) if !text.trim().is_empty() => (text.trim().to_string(), None),
        Ok(_) => summary_failure("summarizer returned empty text".into()),
        Err(e) => summary_failure(e.to_string()),
    };

    Ok(ReadResult {
        goal: goal.to_string(),
        sections_read: known.iter().map(|n| n.section_id.clone()).collect(),
        unknown_ids: unknown,
        evidence,
        media,
        summary,
        summarizer_error,
    })
}

fn summary_failure(reason: String) -> (String, Option<String>) {
    (
        format!("Summary unavailable ({reason}). Use the evidence above directly."),
        Some(reason),
    )
}

pub fn render_read(result: &ReadResult) -> String {
    let mut out = format!(
        "The useful information from the document section (section_id={}) for user goal `{}` is as follows:\nEvidence in document:\n{}\nSummary:\n{}",
        result.sections_read.join(", "),
        result.goal,
        result.evidence,
        result.summary
    );
    if !result.unknown_ids.is_empty() {
        out.push_str(&format!(
            "\nNote: section_id(s) {} were not found in the document outline and were skipped.",
            quote_ids(&result.unknown_ids)
        ));
    }
    out
}

pub(crate) fn quote_ids(ids: &[String]) -> String {
    ids.iter().map(|i| format!("`{i}`")).collect::<Vec<_>>().join(", ")
}
