//! Layout-parsed documents and the hierarchical outline built from them.
//!
//! A [`ParsedDocument`] is the raw page/block output of a layout parser. The
//! [`Outline`] is the tree of sections the agent sees: every non-noise block
//! becomes an [`Element`] inside exactly one [`SectionNode`].

mod enrich;
mod ingest;
mod outline;
mod xml;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use enrich::{enrich_captions, EnrichReport};
pub use ingest::{doc_id_from_path, ingest_parsed, parse_layout_str, InputFormat};
pub use outline::{build_outline, cluster_title_levels, OutlineOptions, FRONT_MATTER_ID, FRONT_MATTER_TITLE};
pub use xml::{parse_xml, serialize_xml};

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed layout: {0}")]
    MalformedLayout(String),
    #[error("malformed outline xml: {0}")]
    MalformedXml(String),
}

/// The 17 content kinds a layout block can be classified into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Title,
    Paragraph,
    List,
    Table,
    TableCaption,
    TableFootnote,
    Image,
    ImageCaption,
    ImageFootnote,
    Chart,
    Formula,
    Code,
    Footnote,
    Header,
    Footer,
    PageNumber,
    TocEntry,
}

impl ElementKind {
    pub const ALL: [ElementKind; 17] = [
        ElementKind::Title,
        ElementKind::Paragraph,
        ElementKind::List,
        ElementKind::Table,
        ElementKind::TableCaption,
        ElementKind::TableFootnote,
        ElementKind::Image,
        ElementKind::ImageCaption,
        ElementKind::ImageFootnote,
        ElementKind::Chart,
        ElementKind::Formula,
        ElementKind::Code,
        ElementKind::Footnote,
        ElementKind::Header,
        ElementKind::Footer,
        ElementKind::PageNumber,
        ElementKind::TocEntry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Title => "title",
            ElementKind::Paragraph => "paragraph",
            ElementKind::List => "list",
            ElementKind::Table => "table",
            ElementKind::TableCaption => "table_caption",
            ElementKind::TableFootnote => "table_footnote",
            ElementKind::Image => "image",
            ElementKind::ImageCaption => "image_caption",
            ElementKind::ImageFootnote => "image_footnote",
            ElementKind::Chart => "chart",
            ElementKind::Formula => "formula",
            ElementKind::Code => "code",
            ElementKind::Footnote => "footnote",
            ElementKind::Header => "header",
            ElementKind::Footer => "footer",
            ElementKind::PageNumber => "page_number",
            ElementKind::TocEntry => "toc_entry",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }

    /// Maps an upstream layout label (MinerU block `type`) onto the taxonomy.
    ///
    /// A `discarded/` prefix is accepted. Unknown labels become paragraphs.
    pub fn from_layout_label(label: &str) -> Self {
        let label = label.strip_prefix("discarded/").unwrap_or(label);
        match label.to_ascii_lowercase().as_str() {
            "title" | "doc_title" | "paragraph_title" => ElementKind::Title,
            "text" | "paragraph" | "ref_text" | "aside_text" | "phonetic" => ElementKind::Paragraph,
            "list" => ElementKind::List,
            "table" | "table_body" => ElementKind::Table,
            "table_caption" => ElementKind::TableCaption,
            "table_footnote" => ElementKind::TableFootnote,
            "image" | "image_body" | "figure" => ElementKind::Image,
            "image_caption" | "figure_caption" | "chart_caption" => ElementKind::ImageCaption,
            "image_footnote" | "chart_footnote" => ElementKind::ImageFootnote,
            "chart" | "chart_body" => ElementKind::Chart,
            "interline_equation" | "equation" | "formula" | "inline_equation" => ElementKind::Formula,
            "code" | "code_body" | "algorithm" => ElementKind::Code,
            "page_footnote" | "footnote" => ElementKind::Footnote,
            "header" | "page_header" => ElementKind::Header,
            "footer" | "page_footer" => ElementKind::Footer,
            "page_number" => ElementKind::PageNumber,
            "index" | "toc" | "toc_entry" => ElementKind::TocEntry,
            _ => ElementKind::Paragraph,
        }
    }

    /// Page furniture that never reaches an outline.
    pub fn is_structural_noise(self) -> bool {
        matches!(self, ElementKind::Header | ElementKind::Footer | ElementKind::PageNumber)
    }

    /// Kinds whose content lives in a media crop.
    pub fn is_visual(self) -> bool {
        matches!(self, ElementKind::Image | ElementKind::Chart | ElementKind::Table)
    }

    /// Kinds that receive model-generated captions during enrichment.
    pub fn is_captionable(self) -> bool {
        matches!(self, ElementKind::Image | ElementKind::Chart)
    }

    /// Item type label used in rendered search results.
    pub fn item_type(self) -> &'static str {
        match self {
            ElementKind::Title => "Heading",
            ElementKind::Paragraph => "Paragraph",
            ElementKind::List => "List",
            ElementKind::Table => "HTML_Table",
            ElementKind::TableCaption | ElementKind::ImageCaption => "Caption",
            ElementKind::TableFootnote | ElementKind::ImageFootnote | ElementKind::Footnote => "Footnote",
            ElementKind::Image => "Image",
            ElementKind::Chart => "Chart",
            ElementKind::Formula => "Formula",
            ElementKind::Code => "Code",
            ElementKind::TocEntry => "TOC_Entry",
            ElementKind::Header => "Header",
            ElementKind::Footer => "Footer",
            ElementKind::PageNumber => "Page_Number",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned box in page pixels: `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox(pub [f64; 4]);

impl BBox {
    pub fn height(&self) -> f64 {
        self.0[3] - self.0[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub kind: ElementKind,
    #[serde(default)]
    pub text: String,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_html: Option<String>,
}

impl Block {
    pub fn structural_noise(&self) -> bool {
        self.kind.is_structural_noise()
    }

    /// Rendered glyph height used for title clustering.
    pub fn effective_title_height(&self) -> f64 {
        self.title_height.unwrap_or_else(|| self.bbox.height())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageLayout {
    pub page_num: u32,
    pub width_px: f64,
    pub height_px: f64,
    #[serde(default)]
    pub blocks: Vec<Block>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParsedDocument {
    pub doc_id: String,
    #[serde(default)]
    pub pages: Vec<PageLayout>,
    #[serde(default)]
    pub source_path: String,
}

impl ParsedDocument {
    pub fn blocks(&self) -> impl Iterator<Item = (u32, &Block)> {
        self.pages
            .iter()
            .flat_map(|p| p.blocks.iter().map(move |b| (p.page_num, b)))
    }

    /// Page numbers strictly increasing from 1, boxes well formed.
    pub fn validate(&self) -> Result<(), DocumentError> {
        let mut prev = 0u32;
        for page in &self.pages {
            if page.page_num == 0 || page.page_num <= prev {
                return Err(DocumentError::MalformedLayout(format!(
                    "page numbers must be strictly increasing from 1 (saw {} after {})",
                    page.page_num, prev
                )));
            }
            prev = page.page_num;
            if !(page.width_px > 0.0 && page.height_px > 0.0) {
                return Err(DocumentError::MalformedLayout(format!(
                    "page {} has non-positive dimensions",
                    page.page_num
                )));
            }
            for block in &page.blocks {
                let [x0, y0, x1, y1] = block.bbox.0;
                if !(x0 <= x1 && y0 <= y1) || [x0, y0, x1, y1].iter().any(|v| !v.is_finite()) {
                    return Err(DocumentError::MalformedLayout(format!(
                        "page {} has an inverted or non-finite bbox {:?}",
                        page.page_num, block.bbox.0
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub element_id: String,
    pub kind: ElementKind,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_caption: Option<String>,
    pub page_num: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_html: Option<String>,
}

impl Element {
    /// Numeric suffix of the element id, e.g. `"5"` for `table-5`.
    pub fn ordinal(&self) -> &str {
        self.element_id.rsplit('-').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionNode {
    pub section_id: String,
    pub title: String,
    pub level: u8,
    pub page_span: (u32, u32),
    #[serde(default)]
    pub elements: Vec<Element>,
    #[serde(default)]
    pub children: Vec<SectionNode>,
}

impl SectionNode {
    /// Pre-order walk over this node and its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &SectionNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementLocator {
    pub section_id: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub doc_id: String,
    pub roots: Vec<SectionNode>,
    #[serde(default)]
    pub element_index: BTreeMap<String, ElementLocator>,
    #[serde(default)]
    pub page_index: BTreeMap<u32, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub page_screenshots: BTreeMap<u32, String>,
}

impl Outline {
    pub fn new(doc_id: impl Into<String>, roots: Vec<SectionNode>) -> Self {
        let mut outline = Outline {
            doc_id: doc_id.into(),
            roots,
            element_index: BTreeMap::new(),
            page_index: BTreeMap::new(),
            page_screenshots: BTreeMap::new(),
        };
        outline.rebuild_indexes();
        outline
    }

    /// Pre-order walk over every section.
    pub fn sections(&self) -> impl Iterator<Item = &SectionNode> {
        self.roots.iter().flat_map(|r| r.walk())
    }

    pub fn section(&self, section_id: &str) -> Option<&SectionNode> {
        self.sections().find(|s| s.section_id == section_id)
    }

    /// Every element paired with its owning section, in document order.
    pub fn elements(&self) -> impl Iterator<Item = (&SectionNode, &Element)> {
        self.sections()
            .flat_map(|s| s.elements.iter().map(move |e| (s, e)))
    }

    pub fn element(&self, element_id: &str) -> Option<&Element> {
        let loc = self.element_index.get(element_id)?;
        self.section(&loc.section_id)?.elements.get(loc.position)
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn rebuild_indexes(&mut self) {
        let mut element_index = BTreeMap::new();
        let mut page_index: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for section in self.sections() {
            for (position, element) in section.elements.iter().enumerate() {
                element_index.insert(
                    element.element_id.clone(),
                    ElementLocator {
                        section_id: section.section_id.clone(),
                        position,
                    },
                );
                let ids = page_index.entry(element.page_num).or_default();
                if ids.last() != Some(&section.section_id) && !ids.contains(&section.section_id) {
                    ids.push(section.section_id.clone());
                }
            }
        }
        self.element_index = element_index;
        self.page_index = page_index;
    }

    /// Visits every element mutably together with its section title.
    pub(crate) fn for_each_element_mut(&mut self, mut f: impl FnMut(&str, &mut Element)) {
        fn visit(node: &mut SectionNode, f: &mut dyn FnMut(&str, &mut Element)) {
            for element in &mut node.elements {
                f(&node.title, element);
            }
            for child in &mut node.children {
                visit(child, f);
            }
        }
        for root in &mut self.roots {
            visit(root, &mut f);
        }
    }
}

/// Compares dotted section ids component-wise as integers, so `3.9 < 3.19`.
pub fn compare_section_ids(a: &str, b: &str) -> Ordering {
    let mut left = a.split('.');
    let mut right = b.split('.');
    loop {
        match (left.next(), right.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(x), Ok(y)) => x.cmp(&y),
                    _ => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}
