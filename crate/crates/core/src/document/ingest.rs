use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::{BBox, Block, DocumentError, ElementKind, PageLayout, ParsedDocument};

/// Layout formats the ingester understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    #[default]
    /// MinerU `middle.json`-style output (`pdf_info` pages with `para_blocks`).
    MineruJson,
    /// The neutral interchange schema: a serialized [`ParsedDocument`].
    NeutralJson,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mineru_json" => Ok(InputFormat::MineruJson),
            "neutral_json" => Ok(InputFormat::NeutralJson),
            other => Err(format!(
                "unknown layout format `{other}` (expected mineru_json or neutral_json)"
            )),
        }
    }
}

pub fn ingest_parsed(path: &Path, format: InputFormat) -> Result<ParsedDocument, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|source| DocumentError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    parse_layout_str(&text, format, &doc_id_from_path(path), &path.display().to_string())
}

/// Parses layout JSON already in memory. `doc_id_hint` is used when the file
/// does not name its document.
pub fn parse_layout_str(
    text: &str,
    format: InputFormat,
    doc_id_hint: &str,
    source_path: &str,
) -> Result<ParsedDocument, DocumentError> {
    let doc = match format {
        InputFormat::NeutralJson => {
            let mut doc: ParsedDocument = serde_json::from_str(text)
                .map_err(|e| DocumentError::MalformedLayout(e.to_string()))?;
            if doc.source_path.is_empty() {
                doc.source_path = source_path.to_string();
            }
            for page in &mut doc.pages {
                for block in &mut page.blocks {
                    if !block.kind.is_visual() {
                        block.media_ref = None;
                    }
                }
            }
            doc
        }
        InputFormat::MineruJson => {
            let root: Value = serde_json::from_str(text)
                .map_err(|e| DocumentError::MalformedLayout(e.to_string()))?;
            parse_mineru(&root, doc_id_hint, source_path)?
        }
    };
    doc.validate()?;
    Ok(doc)
}

/// File name up to its first dot.
pub fn doc_id_from_path(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_string()
}

fn malformed(msg: impl Into<String>) -> DocumentError {
    DocumentError::MalformedLayout(msg.into())
}

fn parse_mineru(root: &Value, doc_id_hint: &str, source_path: &str) -> Result<ParsedDocument, DocumentError> {
    let pages_value = match root {
        Value::Array(_) => root,
        Value::Object(map) => map
            .get("pdf_info")
            .ok_or_else(|| malformed("missing `pdf_info` array"))?,
        _ => return Err(malformed("expected an object or an array of pages")),
    };
    let pages_json = pages_value
        .as_array()
        .ok_or_else(|| malformed("`pdf_info` must be an array"))?;
    let doc_id = root
        .get("doc_id")
        .and_then(Value::as_str)
        .unwrap_or(doc_id_hint)
        .to_string();

    let mut pages = Vec::with_capacity(pages_json.len());
    for (i, page) in pages_json.iter().enumerate() {
        let page_idx = page
            .get("page_idx")
            .and_then(Value::as_u64)
            .ok_or_else(|| malformed(format!("page entry {i} has no `page_idx`")))?;
        let page_num = u32::try_from(page_idx + 1).map_err(|_| malformed("page index out of range"))?;
        let size = page
            .get("page_size")
            .and_then(Value::as_array)
            .filter(|s| s.len() == 2)
            .ok_or_else(|| malformed(format!("page {page_num} has no `page_size`")))?;
        let width_px = size[0].as_f64().unwrap_or(0.0);
        let height_px = size[1].as_f64().unwrap_or(0.0);
        let screenshot_ref = page
            .get("page_image")
            .and_then(Value::as_str)
            .map(str::to_string);

        let mut head = Vec::new();
        let mut body = Vec::new();
        let mut tail = Vec::new();
        for block in array_field(page, "discarded_blocks") {
            for leaf in leaves(block) {
                let mut b = convert_leaf(leaf, page_num, width_px, height_px)?;
                if b.kind == ElementKind::Paragraph {
                    // discarded blocks are noise whatever their label
                    b.kind = ElementKind::Footer;
                }
                if b.kind == ElementKind::Header {
                    head.push(b);
                } else {
                    tail.push(b);
                }
            }
        }
        for block in array_field(page, "para_blocks") {
            for leaf in leaves(block) {
                body.push(convert_leaf(leaf, page_num, width_px, height_px)?);
            }
        }
        head.extend(body);
        head.extend(tail);
        pages.push(PageLayout {
            page_num,
            width_px,
            height_px,
            blocks: head,
            screenshot_ref,
        });
    }
    Ok(ParsedDocument {
        doc_id,
        pages,
        source_path: source_path.to_string(),
    })
}

fn array_field<'a>(value: &'a Value, key: &str) -> impl Iterator<Item = &'a Value> {
    value
        .get(key)
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
}

/// Grouped blocks (an image with its caption, a table with its body) are
/// flattened into their leaves in order.
fn leaves(block: &Value) -> Vec<&Value> {
    match block.get("blocks").and_then(Value::as_array) {
        Some(children) if !children.is_empty() => children.iter().flat_map(leaves).collect(),
        _ => vec![block],
    }
}

fn convert_leaf(leaf: &Value, page_num: u32, width: f64, height: f64) -> Result<Block, DocumentError> {
    let label = leaf
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed(format!("block on page {page_num} has no `type`")))?;
    let kind = ElementKind::from_layout_label(label);
    let bbox = leaf
        .get("bbox")
        .and_then(parse_bbox)
        .ok_or_else(|| malformed(format!("`{label}` block on page {page_num} has no valid `bbox`")))?;
    let bbox = BBox([
        bbox[0].clamp(0.0, width),
        bbox[1].clamp(0.0, height),
        bbox[2].clamp(0.0, width),
        bbox[3].clamp(0.0, height),
    ]);

    let spans: Vec<&Value> = array_field(leaf, "lines")
        .flat_map(|line| array_field(line, "spans"))
        .collect();
    let text = match leaf.get("text").and_then(Value::as_str) {
        Some(t) => t.trim().to_string(),
        None => {
            let sep = if kind == ElementKind::List { "\n" } else { " " };
            array_field(leaf, "lines")
                .map(|line| {
                    array_field(line, "spans")
                        .filter_map(|s| s.get("content").and_then(Value::as_str))
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(sep)
        }
    };
    let media_ref = ["image_path", "img_path"]
        .iter()
        .find_map(|k| leaf.get(*k).and_then(Value::as_str))
        .or_else(|| spans.iter().find_map(|s| s.get("image_path").and_then(Value::as_str)))
        .filter(|_| kind.is_visual())
        .map(str::to_string);
    let table_html = ["html", "table_body"]
        .iter()
        .find_map(|k| leaf.get(*k).and_then(Value::as_str))
        .or_else(|| spans.iter().find_map(|s| s.get("html").and_then(Value::as_str)))
        .filter(|_| kind == ElementKind::Table)
        .map(str::to_string);
    let title_height = leaf
        .get("title_height")
        .and_then(Value::as_f64)
        .or_else(|| {
            array_field(leaf, "lines")
                .next()
                .and_then(|l| l.get("bbox"))
                .and_then(parse_bbox)
                .map(|b| b[3] - b[1])
        })
        .filter(|_| kind == ElementKind::Title);

    Ok(Block {
        kind,
        text,
        bbox,
        title_height,
        media_ref,
        table_html,
    })
}

fn parse_bbox(value: &Value) -> Option<[f64; 4]> {
    let arr = value.as_array()?;
    if arr.len() != 4 {
        return None;
    }
    let mut out = [0.0; 4];
    for (slot, v) in out.iter_mut().zip(arr) {
        *slot = v.as_f64()?;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(blocks: &str, discarded: &str) -> String {
        format!(
            r#"{{"pdf_info":[{{"page_idx":0,"page_size":[600,800],"para_blocks":[{blocks}],"discarded_blocks":[{discarded}]}}]}}"#
        )
    }

    #[test]
    fn empty_pages_accepted() {
        let doc = parse_layout_str(r#"{"pdf_info":[]}"#, InputFormat::MineruJson, "empty", "x").unwrap();
        assert!(doc.pages.is_empty());
        assert_eq!(doc.doc_id, "empty");
    }

    #[test]
    fn discarded_header_label_is_noise() {
        let json = page(
            r#"{"type":"discarded/header","bbox":[0,0,10,10],"text":"Running head"}"#,
            "",
        );
        let doc = parse_layout_str(&json, InputFormat::MineruJson, "d", "x").unwrap();
        let block = &doc.pages[0].blocks[0];
        assert_eq!(block.kind, ElementKind::Header);
        assert!(block.structural_noise());
    }

    #[test]
    fn unknown_labels_become_paragraphs() {
        let json = page(r#"{"type":"marginalia","bbox":[0,0,10,10],"text":"x"}"#, "");
        let doc = parse_layout_str(&json, InputFormat::MineruJson, "d", "x").unwrap();
        assert_eq!(doc.pages[0].blocks[0].kind, ElementKind::Paragraph);
    }

    #[test]
    fn missing_bbox_is_malformed() {
        let json = page(r#"{"type":"text","text":"x"}"#, "");
        let err = parse_layout_str(&json, InputFormat::MineruJson, "d", "x").unwrap_err();
        assert!(matches!(err, DocumentError::MalformedLayout(_)), "{err}");
    }

    #[test]
    fn missing_page_index_is_malformed() {
        let json = r#"{"pdf_info":[{"page_size":[1,1],"para_blocks":[]}]}"#;
        assert!(matches!(
            parse_layout_str(json, InputFormat::MineruJson, "d", "x"),
            Err(DocumentError::MalformedLayout(_))
        ));
    }

    #[test]
    fn nested_groups_flatten_and_keep_media() {
        let json = page(
            r#"{"type":"table","bbox":[0,0,100,100],"blocks":[
                {"type":"table_caption","bbox":[0,0,100,10],"lines":[{"spans":[{"content":"Rates","type":"text"}]}]},
                {"type":"table_body","bbox":[0,10,100,100],"lines":[{"spans":[{"type":"table","html":"<table></table>","image_path":"t.jpg"}]}]}
            ]}"#,
            "",
        );
        let doc = parse_layout_str(&json, InputFormat::MineruJson, "d", "x").unwrap();
        let blocks = &doc.pages[0].blocks;
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].kind, ElementKind::TableCaption);
        assert_eq!(blocks[0].text, "Rates");
        assert_eq!(blocks[1].table_html.as_deref(), Some("<table></table>"));
        assert_eq!(blocks[1].media_ref.as_deref(), Some("t.jpg"));
        assert_eq!(blocks[0].media_ref, None);
    }

    #[test]
    fn bbox_clamped_to_page() {
        let json = page(r#"{"type":"text","bbox":[-5,0,900,10],"text":"x"}"#, "");
        let doc = parse_layout_str(&json, InputFormat::MineruJson, "d", "x").unwrap();
        assert_eq!(doc.pages[0].blocks[0].bbox.0, [0.0, 0.0, 600.0, 10.0]);
    }

    #[test]
    fn neutral_rejects_non_increasing_pages() {
        let json = r#"{"doc_id":"n","pages":[
            {"page_num":2,"width_px":1,"height_px":1},
            {"page_num":2,"width_px":1,"height_px":1}]}"#;
        assert!(parse_layout_str(json, InputFormat::NeutralJson, "n", "x").is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("mineru_json".parse::<InputFormat>(), Ok(InputFormat::MineruJson));
        assert!("pdf".parse::<InputFormat>().is_err());
    }
}
