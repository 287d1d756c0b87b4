use crate::clients::{SummarizeRequest, SummarizerClient};

use super::Outline;

const CAPTION_GOAL: &str = "Write a one-sentence caption describing the content of this visual element.";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnrichReport {
    /// Element ids that received a generated caption in this run.
    pub captioned: Vec<String>,
    /// Visual elements skipped because they already had a caption.
    pub skipped: Vec<String>,
    /// `(element_id, reason)` for elements the captioner failed on.
    pub failures: Vec<(String, String)>,
}

/// Adds a generated caption to every image or chart that has neither an
/// upstream caption nor a generated one. Failed elements are left as they were.
pub fn enrich_captions(mut outline: Outline, captioner: &dyn SummarizerClient) -> (Outline, EnrichReport) {
    let mut report = EnrichReport::default();
    outline.for_each_element_mut(|section_title, element| {
        if !element.kind.is_captionable() {
            return;
        }
        if element.caption.is_some() || element.generated_caption.is_some() {
            report.skipped.push(element.element_id.clone());
            return;
        }
        let request = SummarizeRequest {
            goal: CAPTION_GOAL.to_string(),
            text: format!(
                "{} `{}` in section \"{}\" (page {})",
                element.kind.item_type(),
                element.element_id,
                section_title,
                element.page_num
            ),
            media: element.media_ref.iter().cloned().collect(),
        };
        match captioner.summarize(&request) {
            Ok(text) if !text.trim().is_empty() => {
                element.generated_caption = Some(text.trim().to_string());
                report.captioned.push(element.element_id.clone());
            }
            Ok(_) => report
                .failures
                .push((element.element_id.clone(), "captioner returned empty text".into())),
            Err(e) => report.failures.push((element.element_id.clone(), e.to_string())),
        }
    });
    (outline, report)
}
